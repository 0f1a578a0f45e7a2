#pragma once

#include <cstdint>
#include <string>

#include "causalq/dataset.hpp"
#include "causalq/graph.hpp"
#include "causalq/rng.hpp"

namespace causalq {

struct GenConfig {
    int num_vars = 5;
    /// Expected edge count of the random DAG; <= 0 selects the 2d default.
    double expected_edges = -1.0;
    int num_samples = 200;
    double weight_low = 0.5;
    double weight_high = 2.0;
    double noise_std = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
    double resolved_edges() const { return expected_edges > 0.0 ? expected_edges : 2.0 * num_vars; }
    /// expected_edges / C(d, 2), capped at 1.
    double edge_probability() const;
};

/// Random DAG: a uniform permutation fixes the topological order, each
/// forward pair enters independently with edge_probability(), and weights
/// are uniform on +-[low, high] with a fair sign.
WeightedDag er_dag(const GenConfig& config, Rng& rng);

/// Linear additive-noise draw: in topological order, each column is the
/// weighted sum of its parents plus Gaussian noise. Columns keep their
/// natural scale; use standardize() separately when wanted.
Dataset linear_gaussian_sample(const WeightedDag& graph, int num_samples, double noise_std,
                               Rng& rng);

/// Comma-separated file with a header row of names and a numeric body.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& data, const std::string& path);

}  // namespace causalq
