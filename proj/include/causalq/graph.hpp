#pragma once

#include <optional>
#include <string>
#include <vector>

#include "causalq/errors.hpp"
#include "causalq/order_graph.hpp"

namespace causalq {

struct Edge {
    int from = 0;
    int to = 0;
    double weight = 0.0;
};

/// A weighted DAG on d named variables. weight(i, j) is the coefficient of
/// edge i -> j; zero means absent. The diagonal is always zero.
class WeightedDag {
public:
    WeightedDag() = default;
    explicit WeightedDag(int num_vars, std::vector<std::string> names = {});

    int num_vars() const { return num_vars_; }
    const std::vector<std::string>& names() const { return names_; }

    double weight(int from, int to) const { return weights_[index(from, to)]; }
    void set_weight(int from, int to, double w);
    bool has_edge(int from, int to) const { return weight(from, to) != 0.0; }

    std::vector<Edge> edges() const;
    int edge_count() const;
    std::vector<int> parents(int node) const;
    std::uint64_t parent_mask(int node) const;

    bool is_acyclic() const;
    /// Kahn topological sort; throws CyclicGraph when no ordering exists.
    Ordering topological_order() const;

private:
    std::size_t index(int from, int to) const;

    int num_vars_ = 0;
    std::vector<std::string> names_;
    std::vector<double> weights_;  // row-major d x d
};

std::vector<std::string> default_names(int num_vars);

/// JSON form: {"names": [...], "edges": [{"from","to","weight"}, ...]}
/// with an optional "score" echoed back by readers that care.
std::string dag_to_json(const WeightedDag& g, std::optional<double> score = std::nullopt);
WeightedDag dag_from_json(const std::string& text);

/// Plain-text edge list: one "i j weight" line per edge.
std::string dag_to_edge_list(const WeightedDag& g);

}  // namespace causalq
