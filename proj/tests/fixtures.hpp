#pragma once

#include <vector>

#include "causalq/datagen.hpp"
#include "causalq/dataset.hpp"
#include "causalq/graph.hpp"
#include "causalq/rng.hpp"

namespace causalq::test {

/// X0 -> X1 -> ... -> X_{d-1} with a fixed weight and unit noise.
inline WeightedDag chain_graph(int d, double weight = 2.0) {
    WeightedDag g(d);
    for (int i = 0; i + 1 < d; ++i) g.set_weight(i, i + 1, weight);
    return g;
}

inline Dataset chain_data(int d, int n, std::uint64_t seed, double weight = 2.0) {
    Rng rng(derive_seed(seed, "chain"));
    return linear_gaussian_sample(chain_graph(d, weight), n, 1.0, rng);
}

inline Dataset iid_noise_data(int d, int n, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "noise"));
    return linear_gaussian_sample(WeightedDag(d), n, 1.0, rng);
}

struct ErInstance {
    WeightedDag truth;
    Dataset data;
};

inline ErInstance er_instance(int d, int n, std::uint64_t seed, double expected_edges = -1.0) {
    GenConfig config;
    config.num_vars = d;
    config.num_samples = n;
    config.expected_edges = expected_edges;
    config.seed = seed;
    Rng graph_rng(derive_seed(seed, "gen/graph"));
    Rng data_rng(derive_seed(seed, "gen/data"));
    ErInstance inst;
    inst.truth = er_dag(config, graph_rng);
    inst.data = linear_gaussian_sample(inst.truth, n, config.noise_std, data_rng);
    return inst;
}

}  // namespace causalq::test
