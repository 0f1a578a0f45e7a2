#include "causalq/graph.hpp"

#include <deque>
#include <sstream>

#include <json.hpp>

namespace causalq {

WeightedDag::WeightedDag(int num_vars, std::vector<std::string> names)
    : num_vars_(num_vars), names_(std::move(names)), weights_(static_cast<std::size_t>(num_vars) * num_vars, 0.0) {
    if (num_vars < 0) throw DimensionMismatch("WeightedDag: negative size");
    if (names_.empty()) names_ = default_names(num_vars);
    if (static_cast<int>(names_.size()) != num_vars)
        throw DimensionMismatch("WeightedDag: names size mismatch");
}

std::size_t WeightedDag::index(int from, int to) const {
    if (from < 0 || from >= num_vars_ || to < 0 || to >= num_vars_)
        throw DimensionMismatch("WeightedDag: node index out of range");
    return static_cast<std::size_t>(from) * num_vars_ + to;
}

void WeightedDag::set_weight(int from, int to, double w) {
    if (from == to && w != 0.0)
        throw CyclicGraph("WeightedDag: self-loop on node " + std::to_string(from));
    weights_[index(from, to)] = w;
}

std::vector<Edge> WeightedDag::edges() const {
    std::vector<Edge> out;
    for (int i = 0; i < num_vars_; ++i)
        for (int j = 0; j < num_vars_; ++j)
            if (has_edge(i, j)) out.push_back({i, j, weight(i, j)});
    return out;
}

int WeightedDag::edge_count() const {
    int c = 0;
    for (double w : weights_)
        if (w != 0.0) ++c;
    return c;
}

std::vector<int> WeightedDag::parents(int node) const {
    std::vector<int> out;
    for (int i = 0; i < num_vars_; ++i)
        if (has_edge(i, node)) out.push_back(i);
    return out;
}

std::uint64_t WeightedDag::parent_mask(int node) const {
    std::uint64_t mask = 0;
    for (int i = 0; i < num_vars_; ++i)
        if (has_edge(i, node)) mask |= std::uint64_t{1} << i;
    return mask;
}

bool WeightedDag::is_acyclic() const {
    try {
        topological_order();
        return true;
    } catch (const CyclicGraph&) {
        return false;
    }
}

Ordering WeightedDag::topological_order() const {
    std::vector<int> indeg(num_vars_, 0);
    for (int i = 0; i < num_vars_; ++i)
        for (int j = 0; j < num_vars_; ++j)
            if (has_edge(i, j)) ++indeg[j];
    std::deque<int> ready;
    for (int j = 0; j < num_vars_; ++j)
        if (indeg[j] == 0) ready.push_back(j);
    Ordering order;
    order.reserve(num_vars_);
    while (!ready.empty()) {
        const int u = ready.front();
        ready.pop_front();
        order.push_back(u);
        for (int v = 0; v < num_vars_; ++v) {
            if (has_edge(u, v) && --indeg[v] == 0) ready.push_back(v);
        }
    }
    if (static_cast<int>(order.size()) != num_vars_)
        throw CyclicGraph("WeightedDag: graph contains a cycle");
    return order;
}

std::vector<std::string> default_names(int num_vars) {
    std::vector<std::string> names;
    names.reserve(num_vars);
    for (int i = 0; i < num_vars; ++i) names.push_back("X" + std::to_string(i));
    return names;
}

std::string dag_to_json(const WeightedDag& g, std::optional<double> score) {
    nlohmann::json j;
    j["names"] = g.names();
    auto edges = nlohmann::json::array();
    for (const Edge& e : g.edges())
        edges.push_back({{"from", e.from}, {"to", e.to}, {"weight", e.weight}});
    j["edges"] = edges;
    if (score) j["score"] = *score;
    return j.dump(2);
}

WeightedDag dag_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("graph JSON: ") + e.what());
    }
    if (!j.contains("names") || !j.contains("edges"))
        throw ParseError("graph JSON: missing 'names' or 'edges'");
    std::vector<std::string> names = j["names"].get<std::vector<std::string>>();
    WeightedDag g(static_cast<int>(names.size()), names);
    for (const auto& e : j["edges"])
        g.set_weight(e.at("from").get<int>(), e.at("to").get<int>(), e.at("weight").get<double>());
    return g;
}

std::string dag_to_edge_list(const WeightedDag& g) {
    std::ostringstream os;
    os.precision(17);
    for (const Edge& e : g.edges()) os << e.from << " " << e.to << " " << e.weight << "\n";
    return os.str();
}

}  // namespace causalq
