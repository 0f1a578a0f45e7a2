#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "causalq/dataset.hpp"
#include "causalq/graph.hpp"
#include "causalq/order_graph.hpp"

namespace causalq {

struct ScoreOptions {
    /// RSS is floored at rss_floor * n before the log so degenerate or
    /// duplicated columns cannot produce log(0).
    double rss_floor = 1e-8;
    /// Jitter added to the normal equations when the plain solve fails;
    /// full-parent regressions near the bottom of the order graph are
    /// near-collinear for small n.
    double ridge = 1e-8;
    /// Action rewards score the new variable against a parent set chosen
    /// greedily inside the candidate pool instead of the whole pool. With
    /// the whole pool as parents the Gaussian BIC ordering reward is the
    /// same for every permutation (the sequential residual variances
    /// multiply to det of the covariance matrix), so the posterior would
    /// carry no ordering information at all.
    bool select_parents = true;
    /// Cap on the selected parent-set size; <= 0 means unlimited.
    int max_parents = 0;
};

/// Gaussian BIC local score of `child` regressed on the members of
/// `parents` plus an intercept:
///   -(n/2) * (log(2*pi*RSS/n) + 1) - (|parents|+1)/2 * log(n)
double bic_local_score(int child, const State& parents, const Dataset& data,
                       const ScoreOptions& opts = {});

/// OLS coefficients (without the intercept entry) of `child` on `parents`,
/// with the same ridge-retry semantics as the score.
std::vector<double> ols_coefficients(int child, const std::vector<int>& parents,
                                     const Dataset& data, const ScoreOptions& opts = {});

/// Process-wide cache of local scores and action rewards for one dataset.
/// Keys are (child, parent bit pattern). Lookups take a shared lock;
/// misses compute outside the lock and insert under an exclusive lock --
/// two threads may race to compute the same key but store identical
/// values, so last-write-wins is harmless.
class LocalScoreCache {
public:
    explicit LocalScoreCache(const Dataset& data, ScoreOptions opts = {});

    const Dataset& data() const { return *data_; }
    const ScoreOptions& options() const { return opts_; }
    int num_vars() const { return data_->num_vars(); }
    int num_samples() const { return data_->num_samples(); }

    /// Cached bic_local_score(child, parent_mask).
    double local_score(int child, std::uint64_t parent_mask) const;

    /// Cached log R(a): the score of `child` against its greedily selected
    /// parents within `pool_mask` (or against the whole pool when
    /// select_parents is off).
    double action_reward(int child, std::uint64_t pool_mask) const;

    std::size_t cached_entries() const;

private:
    double compute_local_score(int child, std::uint64_t parent_mask) const;
    double compute_action_reward(int child, std::uint64_t pool_mask) const;

    const Dataset* data_;
    ScoreOptions opts_;
    Eigen::MatrixXd gram_;  // (d+1)x(d+1); row/col 0 is the intercept column

    // Small d gets dense lock-free tables (NaN = not yet computed; racing
    // writers store identical values). Larger d falls back to guarded maps.
    bool dense_ = false;
    std::unique_ptr<std::atomic<double>[]> dense_scores_;
    std::unique_ptr<std::atomic<double>[]> dense_rewards_;

    mutable std::shared_mutex mutex_;
    mutable std::unordered_map<std::uint64_t, double> scores_;
    mutable std::unordered_map<std::uint64_t, double> rewards_;
};

/// log R(a) for taking `action` in state `s` (Eq.-style action reward).
double action_log_reward(const State& s, int action, const LocalScoreCache& cache);

/// log R(L): sum of action rewards along the ordering's prefix path.
double ordering_log_reward(const Ordering& ordering, const LocalScoreCache& cache);

/// Sum of raw local scores of every node given its parents in `g`.
/// Throws CyclicGraph when g has a cycle.
double dag_log_score(const WeightedDag& g, const LocalScoreCache& cache);

}  // namespace causalq
