#include "causalq/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <omp.h>

namespace causalq {

std::pair<Ordering, double> sample_ordering(const LayeredQModels& models, Rng& rng) {
    const int d = models.num_vars();
    Ordering ordering;
    ordering.reserve(d);
    double log_prob = 0.0;
    State s = State::empty(d);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < d; ++k) {
        const auto dist = transition_distribution(forward_masked(models.eval_model(s), s));
        const auto feasible = feasible_actions(s);
        const double u = unit(rng);
        double acc = 0.0;
        int chosen = feasible.back();
        for (int a : feasible) {
            acc += dist.probs[a];
            if (u < acc) {
                chosen = a;
                break;
            }
        }
        log_prob += std::log(dist.probs[chosen]);
        ordering.push_back(chosen);
        s = apply_action(s, chosen);
    }
    return {ordering, log_prob};
}

Ordering greedy_ordering(const LayeredQModels& models) {
    const int d = models.num_vars();
    Ordering ordering;
    ordering.reserve(d);
    State s = State::empty(d);
    for (int k = 0; k < d; ++k) {
        const auto dist = transition_distribution(forward_masked(models.eval_model(s), s));
        int best = -1;
        double best_p = -1.0;
        for (int a = 0; a < d; ++a) {
            if (s.contains(a)) continue;
            if (dist.probs[a] > best_p) {  // strict: ties keep the lowest index
                best_p = dist.probs[a];
                best = a;
            }
        }
        ordering.push_back(best);
        s = apply_action(s, best);
    }
    return ordering;
}

WeightedDag ordering_to_full_dag(const Ordering& ordering, const std::vector<std::string>& names) {
    const int d = static_cast<int>(ordering.size());
    if (!is_valid_ordering(ordering, d))
        throw DimensionMismatch("ordering_to_full_dag: not a permutation");
    WeightedDag g(d, names);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) g.set_weight(ordering[i], ordering[j], 1.0);
    return g;
}

WeightedDag prune_linear(const WeightedDag& full, const Dataset& data, double threshold,
                         const ScoreOptions& opts) {
    if (full.num_vars() != data.num_vars())
        throw DimensionMismatch("prune_linear: graph/data width mismatch");
    full.topological_order();  // CyclicGraph on cycles
    WeightedDag pruned(full.num_vars(), full.names());
    for (int node = 0; node < full.num_vars(); ++node) {
        const auto parents = full.parents(node);
        if (parents.empty()) continue;
        const auto coefs = ols_coefficients(node, parents, data, opts);
        for (std::size_t i = 0; i < parents.size(); ++i)
            if (!(std::abs(coefs[i]) < threshold)) pruned.set_weight(parents[i], node, coefs[i]);
    }
    return pruned;
}

namespace {

std::vector<ScoredDag> sample_best_k_impl(const LayeredQModels& models,
                                          const LocalScoreCache& cache, int n, int k,
                                          double threshold, std::uint64_t seed, bool parallel) {
    if (k < 0 || n < 0 || k > n) throw ConfigError("sample_best_k: need 0 <= k <= n");
    const auto& names = cache.data().names;

    std::vector<ScoredDag> sampled(n);
    std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(static) if (parallel)
    for (int i = 0; i < n; ++i) {
        try {
            Rng rng(derive_seed(seed, "sample", static_cast<std::uint64_t>(i)));
            auto [ordering, log_prob] = sample_ordering(models, rng);
            WeightedDag pruned =
                prune_linear(ordering_to_full_dag(ordering, names), cache.data(), threshold);
            const double score = dag_log_score(pruned, cache);
            sampled[i] = {std::move(pruned), score, std::move(ordering), log_prob};
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return sampled[a].log_score > sampled[b].log_score; });
    std::vector<ScoredDag> best;
    best.reserve(k);
    for (int i = 0; i < k; ++i) best.push_back(std::move(sampled[order[i]]));
    return best;
}

}  // namespace

std::vector<ScoredDag> sample_best_k(const LayeredQModels& models, const LocalScoreCache& cache,
                                     int n, int k, double threshold, std::uint64_t seed) {
    return sample_best_k_impl(models, cache, n, k, threshold, seed, true);
}

std::vector<ScoredDag> sample_best_k_serial(const LayeredQModels& models,
                                            const LocalScoreCache& cache, int n, int k,
                                            double threshold, std::uint64_t seed) {
    return sample_best_k_impl(models, cache, n, k, threshold, seed, false);
}

}  // namespace causalq
