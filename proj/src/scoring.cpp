#include "causalq/scoring.hpp"

#include <cmath>
#include <mutex>
#include <numbers>

namespace causalq {

namespace {

// Dot product between design columns; index -1 is the intercept column of
// ones. Plain ascending-t loop: the cached Gram and the fresh path must
// produce bit-identical entries.
double design_dot(const Dataset& data, int i, int j) {
    const int n = data.num_samples();
    if (i == -1 && j == -1) return static_cast<double>(n);
    double s = 0.0;
    if (i == -1 || j == -1) {
        const auto& col = data.columns[i == -1 ? j : i];
        for (int t = 0; t < n; ++t) s += col[t];
        return s;
    }
    const auto& a = data.columns[i];
    const auto& b = data.columns[j];
    for (int t = 0; t < n; ++t) s += a[t] * b[t];
    return s;
}

struct Key {
    static std::uint64_t pack(int child, std::uint64_t mask) {
        // num_vars <= 57 keeps child disjoint from the mask bits.
        return mask | (static_cast<std::uint64_t>(child) << 57);
    }
};

// BIC of child on the given ascending parent list, from Gram entries.
// `gram(i, j)` must accept -1 for the intercept column.
template <typename GramFn>
double bic_from_gram(GramFn&& gram, int child, const std::vector<int>& parents, int n,
                     const ScoreOptions& opts) {
    const int p = static_cast<int>(parents.size());
    Eigen::MatrixXd A(p + 1, p + 1);
    Eigen::VectorXd b(p + 1);
    auto col = [&](int k) { return k == 0 ? -1 : parents[k - 1]; };
    for (int r = 0; r <= p; ++r) {
        for (int c = r; c <= p; ++c) {
            const double v = gram(col(r), col(c));
            A(r, c) = v;
            A(c, r) = v;
        }
        b(r) = gram(col(r), child);
    }
    const double yty = gram(child, child);

    auto rss_of = [&](const Eigen::VectorXd& coef) {
        return yty - 2.0 * coef.dot(b) + coef.dot(A * coef);
    };

    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    double rss = std::numeric_limits<double>::quiet_NaN();
    if (ldlt.info() == Eigen::Success) {
        Eigen::VectorXd coef = ldlt.solve(b);
        if (coef.allFinite()) rss = rss_of(coef);
    }
    if (!std::isfinite(rss)) {
        Eigen::MatrixXd Aj = A + opts.ridge * Eigen::MatrixXd::Identity(p + 1, p + 1);
        Eigen::LDLT<Eigen::MatrixXd> ldlt2(Aj);
        if (ldlt2.info() == Eigen::Success) {
            Eigen::VectorXd coef = ldlt2.solve(b);
            if (coef.allFinite()) rss = rss_of(coef);
        }
        if (!std::isfinite(rss))
            throw SingularRegression("bic_local_score: singular design for child " +
                                     std::to_string(child));
    }
    rss = std::max(rss, opts.rss_floor * n);
    const double nn = static_cast<double>(n);
    return -0.5 * nn * (std::log(2.0 * std::numbers::pi * rss / nn) + 1.0) -
           0.5 * (p + 1) * std::log(nn);
}

std::vector<int> mask_to_list(std::uint64_t mask, int num_vars) {
    std::vector<int> out;
    for (int v = 0; v < num_vars; ++v)
        if ((mask >> v) & 1u) out.push_back(v);
    return out;
}

}  // namespace

double bic_local_score(int child, const State& parents, const Dataset& data,
                       const ScoreOptions& opts) {
    if (child < 0 || child >= data.num_vars())
        throw DimensionMismatch("bic_local_score: child index out of range");
    if (parents.contains(child))
        throw InfeasibleAction("bic_local_score: child is in its own parent set");
    const auto list = mask_to_list(parents.members, parents.num_vars);
    return bic_from_gram([&](int i, int j) { return design_dot(data, i, j); }, child, list,
                         data.num_samples(), opts);
}

std::vector<double> ols_coefficients(int child, const std::vector<int>& parents,
                                     const Dataset& data, const ScoreOptions& opts) {
    const int p = static_cast<int>(parents.size());
    Eigen::MatrixXd A(p + 1, p + 1);
    Eigen::VectorXd b(p + 1);
    auto col = [&](int k) { return k == 0 ? -1 : parents[k - 1]; };
    for (int r = 0; r <= p; ++r) {
        for (int c = r; c <= p; ++c) {
            const double v = design_dot(data, col(r), col(c));
            A(r, c) = v;
            A(c, r) = v;
        }
        b(r) = design_dot(data, col(r), child);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    Eigen::VectorXd coef;
    if (ldlt.info() == Eigen::Success) coef = ldlt.solve(b);
    if (ldlt.info() != Eigen::Success || !coef.allFinite()) {
        Eigen::MatrixXd Aj = A + opts.ridge * Eigen::MatrixXd::Identity(p + 1, p + 1);
        Eigen::LDLT<Eigen::MatrixXd> ldlt2(Aj);
        if (ldlt2.info() != Eigen::Success)
            throw SingularRegression("ols_coefficients: singular design for child " +
                                     std::to_string(child));
        coef = ldlt2.solve(b);
        if (!coef.allFinite())
            throw SingularRegression("ols_coefficients: singular design for child " +
                                     std::to_string(child));
    }
    return std::vector<double>(coef.data() + 1, coef.data() + 1 + p);
}

LocalScoreCache::LocalScoreCache(const Dataset& data, ScoreOptions opts)
    : data_(&data), opts_(opts) {
    data.validate();
    if (data.num_vars() > 57)
        throw LimitExceeded("LocalScoreCache: at most 57 variables supported");
    const int d = data.num_vars();
    gram_.resize(d + 1, d + 1);
    for (int i = -1; i < d; ++i)
        for (int j = i; j < d; ++j) {
            const double v = design_dot(data, i, j);
            gram_(i + 1, j + 1) = v;
            gram_(j + 1, i + 1) = v;
        }
    dense_ = d <= 18;  // d * 2^d doubles per table
    if (dense_) {
        const std::size_t count = static_cast<std::size_t>(d) << d;
        dense_scores_ = std::make_unique<std::atomic<double>[]>(count);
        dense_rewards_ = std::make_unique<std::atomic<double>[]>(count);
        const double unset = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t i = 0; i < count; ++i) {
            dense_scores_[i].store(unset, std::memory_order_relaxed);
            dense_rewards_[i].store(unset, std::memory_order_relaxed);
        }
    }
}

double LocalScoreCache::compute_local_score(int child, std::uint64_t parent_mask) const {
    const auto list = mask_to_list(parent_mask, num_vars());
    return bic_from_gram([&](int i, int j) { return gram_(i + 1, j + 1); }, child, list,
                         num_samples(), opts_);
}

double LocalScoreCache::local_score(int child, std::uint64_t parent_mask) const {
    if (child < 0 || child >= num_vars())
        throw DimensionMismatch("local_score: child index out of range");
    if ((parent_mask >> child) & 1u)
        throw InfeasibleAction("local_score: child is in its own parent set");
    if (dense_) {
        auto& slot = dense_scores_[(static_cast<std::size_t>(child) << num_vars()) | parent_mask];
        double value = slot.load(std::memory_order_relaxed);
        if (std::isnan(value)) {
            value = compute_local_score(child, parent_mask);
            slot.store(value, std::memory_order_relaxed);
        }
        return value;
    }
    const std::uint64_t key = Key::pack(child, parent_mask);
    {
        std::shared_lock lock(mutex_);
        if (auto it = scores_.find(key); it != scores_.end()) return it->second;
    }
    const double value = compute_local_score(child, parent_mask);
    {
        std::unique_lock lock(mutex_);
        scores_.emplace(key, value);
    }
    return value;
}

double LocalScoreCache::compute_action_reward(int child, std::uint64_t pool_mask) const {
    if (!opts_.select_parents) return local_score(child, pool_mask);
    // Greedy forward selection inside the pool; ties keep the lowest index.
    std::uint64_t chosen = 0;
    double best = local_score(child, 0);
    const int limit = opts_.max_parents > 0 ? opts_.max_parents : num_vars();
    while (std::popcount(chosen) < limit) {
        int best_cand = -1;
        double best_score = best;
        for (int c = 0; c < num_vars(); ++c) {
            if (((pool_mask >> c) & 1u) == 0 || ((chosen >> c) & 1u) != 0) continue;
            const double sc = local_score(child, chosen | (std::uint64_t{1} << c));
            if (sc > best_score) {
                best_score = sc;
                best_cand = c;
            }
        }
        if (best_cand < 0) break;
        chosen |= std::uint64_t{1} << best_cand;
        best = best_score;
    }
    return best;
}

double LocalScoreCache::action_reward(int child, std::uint64_t pool_mask) const {
    if (child < 0 || child >= num_vars())
        throw DimensionMismatch("action_reward: child index out of range");
    if ((pool_mask >> child) & 1u)
        throw InfeasibleAction("action_reward: child is in the candidate pool");
    if (dense_) {
        auto& slot = dense_rewards_[(static_cast<std::size_t>(child) << num_vars()) | pool_mask];
        double value = slot.load(std::memory_order_relaxed);
        if (std::isnan(value)) {
            value = compute_action_reward(child, pool_mask);
            slot.store(value, std::memory_order_relaxed);
        }
        return value;
    }
    const std::uint64_t key = Key::pack(child, pool_mask);
    {
        std::shared_lock lock(mutex_);
        if (auto it = rewards_.find(key); it != rewards_.end()) return it->second;
    }
    const double value = compute_action_reward(child, pool_mask);
    {
        std::unique_lock lock(mutex_);
        rewards_.emplace(key, value);
    }
    return value;
}

std::size_t LocalScoreCache::cached_entries() const {
    if (dense_) {
        std::size_t filled = 0;
        const std::size_t count = static_cast<std::size_t>(num_vars()) << num_vars();
        for (std::size_t i = 0; i < count; ++i) {
            if (!std::isnan(dense_scores_[i].load(std::memory_order_relaxed))) ++filled;
            if (!std::isnan(dense_rewards_[i].load(std::memory_order_relaxed))) ++filled;
        }
        return filled;
    }
    std::shared_lock lock(mutex_);
    return scores_.size() + rewards_.size();
}

double action_log_reward(const State& s, int action, const LocalScoreCache& cache) {
    if (s.num_vars != cache.num_vars())
        throw DimensionMismatch("action_log_reward: state size mismatch");
    if (s.contains(action))
        throw InfeasibleAction("action_log_reward: action already in state");
    return cache.action_reward(action, s.members);
}

double ordering_log_reward(const Ordering& ordering, const LocalScoreCache& cache) {
    if (!is_valid_ordering(ordering, cache.num_vars()))
        throw DimensionMismatch("ordering_log_reward: not a permutation of the variables");
    double total = 0.0;
    State s = State::empty(cache.num_vars());
    for (int v : ordering) {
        total += action_log_reward(s, v, cache);
        s = apply_action(s, v);
    }
    return total;
}

double dag_log_score(const WeightedDag& g, const LocalScoreCache& cache) {
    if (g.num_vars() != cache.num_vars())
        throw DimensionMismatch("dag_log_score: graph size mismatch");
    g.topological_order();  // CyclicGraph on cycles
    double total = 0.0;
    for (int k = 0; k < g.num_vars(); ++k) total += cache.local_score(k, g.parent_mask(k));
    return total;
}

}  // namespace causalq
