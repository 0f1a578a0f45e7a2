#pragma once

#include <utility>
#include <vector>

#include "causalq/graph.hpp"
#include "causalq/scoring.hpp"
#include "causalq/trainer.hpp"

namespace causalq {

/// Walks s_0 -> s_d sampling each step from the model's softmax; returns
/// the ordering and the summed log probability of the taken path.
std::pair<Ordering, double> sample_ordering(const LayeredQModels& models, Rng& rng);

/// Deterministic argmax walk; ties break toward the lowest variable index.
Ordering greedy_ordering(const LayeredQModels& models);

/// Fully connected DAG of an ordering: edge i -> j (unit weight) whenever
/// i precedes j.
WeightedDag ordering_to_full_dag(const Ordering& ordering,
                                 const std::vector<std::string>& names = {});

/// Re-estimates every node's incoming edges by OLS on its parents (with
/// intercept) and drops edges with |coefficient| < threshold. Surviving
/// edges carry their coefficients.
WeightedDag prune_linear(const WeightedDag& full, const Dataset& data, double threshold,
                         const ScoreOptions& opts = {});

struct ScoredDag {
    WeightedDag graph;
    double log_score = 0.0;
    Ordering ordering;
    double ordering_log_prob = 0.0;
};

/// Draws n orderings, converts and prunes each, ranks by dag_log_score and
/// returns the best k (descending; duplicates retained). Samples run in
/// parallel on rng streams derived from the seed, so the result does not
/// depend on the thread count.
std::vector<ScoredDag> sample_best_k(const LayeredQModels& models, const LocalScoreCache& cache,
                                     int n, int k, double threshold, std::uint64_t seed);
std::vector<ScoredDag> sample_best_k_serial(const LayeredQModels& models,
                                            const LocalScoreCache& cache, int n, int k,
                                            double threshold, std::uint64_t seed);

}  // namespace causalq
