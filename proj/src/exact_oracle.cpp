#include "causalq/exact_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <omp.h>
#include <json.hpp>

#include "causalq/numeric.hpp"

namespace causalq {

namespace {

std::vector<std::vector<std::uint32_t>> states_by_layer(int d) {
    std::vector<std::vector<std::uint32_t>> layers(d + 1);
    for (std::uint32_t s = 0; s < (std::uint32_t{1} << d); ++s)
        layers[std::popcount(s)].push_back(s);
    return layers;
}

void check_dp_limit(int d, const OracleLimits& limits) {
    if (d > limits.dp_max_vars)
        throw LimitExceeded("exact DP requires d <= " + std::to_string(limits.dp_max_vars) +
                            ", got d = " + std::to_string(d));
}

void check_enum_limit(int d, const OracleLimits& limits) {
    if (d > limits.enum_max_vars)
        throw LimitExceeded("exact enumeration requires d <= " +
                            std::to_string(limits.enum_max_vars) + ", got d = " +
                            std::to_string(d) + "; use the DP oracle for larger graphs");
}

std::string state_bits(std::uint64_t mask, int d) {
    std::string s(d, '0');
    for (int i = 0; i < d; ++i)
        if ((mask >> i) & 1u) s[i] = '1';
    return s;
}

}  // namespace

ExactQTable::ExactQTable(int num_vars)
    : num_vars_(num_vars),
      table_(static_cast<std::size_t>(num_vars) << num_vars,
             std::numeric_limits<double>::quiet_NaN()) {
    if (num_vars < 1 || num_vars > 25)
        throw LimitExceeded("ExactQTable: num_vars out of range");
}

std::size_t ExactQTable::index(const State& s, int action) const {
    if (s.num_vars != num_vars_)
        throw DimensionMismatch("ExactQTable: state size mismatch");
    if (action < 0 || action >= num_vars_ || s.contains(action))
        throw InfeasibleAction("ExactQTable: infeasible action");
    return static_cast<std::size_t>(s.members) * num_vars_ + action;
}

double ExactQTable::log_q(const State& s, int action) const { return table_[index(s, action)]; }

void ExactQTable::set_log_q(const State& s, int action, double value) {
    table_[index(s, action)] = value;
}

double ExactQTable::log_transition(const State& s, int action) const {
    if (layer(s) >= num_vars_) throw TerminalState("log_transition: full state has no actions");
    std::vector<double> qs;
    qs.reserve(num_vars_ - layer(s));
    for (int a = 0; a < num_vars_; ++a)
        if (!s.contains(a)) qs.push_back(log_q(s, a));
    return log_q(s, action) - log_sum_exp(qs);
}

TransitionDistribution ExactQTable::transition(const State& s) const {
    if (layer(s) >= num_vars_) throw TerminalState("transition: full state has no actions");
    TransitionDistribution dist{s, std::vector<double>(num_vars_, 0.0)};
    std::vector<double> qs;
    qs.reserve(num_vars_ - layer(s));
    for (int a = 0; a < num_vars_; ++a)
        if (!s.contains(a)) qs.push_back(log_q(s, a));
    const double lse = log_sum_exp(qs);
    for (int a = 0; a < num_vars_; ++a)
        if (!s.contains(a)) dist.probs[a] = std::exp(log_q(s, a) - lse);
    return dist;
}

std::string ExactQTable::to_json() const {
    nlohmann::json entries = nlohmann::json::object();
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << num_vars_); ++m) {
        const State s(m, num_vars_);
        for (int a = 0; a < num_vars_; ++a) {
            if (s.contains(a)) continue;
            entries[state_bits(m, num_vars_) + "/" + std::to_string(a)] = log_q(s, a);
        }
    }
    nlohmann::json j;
    j["num_vars"] = num_vars_;
    j["log_q"] = std::move(entries);
    return j.dump(2);
}

ExactQTable ExactQTable::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("q-table JSON: ") + e.what());
    }
    const int d = j.at("num_vars").get<int>();
    ExactQTable table(d);
    for (const auto& [key, value] : j.at("log_q").items()) {
        const auto slash = key.find('/');
        if (slash == std::string::npos || slash != static_cast<std::size_t>(d))
            throw ParseError("q-table JSON: bad key '" + key + "'");
        std::uint64_t mask = 0;
        for (int i = 0; i < d; ++i) {
            if (key[i] == '1') mask |= std::uint64_t{1} << i;
            else if (key[i] != '0') throw ParseError("q-table JSON: bad key '" + key + "'");
        }
        table.set_log_q(State(mask, d), std::stoi(key.substr(slash + 1)), value.get<double>());
    }
    return table;
}

namespace {

ExactQTable dp_impl(const LocalScoreCache& cache, const OracleLimits& limits, bool parallel) {
    const int d = cache.num_vars();
    check_dp_limit(d, limits);
    ExactQTable table(d);
    const auto layers = states_by_layer(d);

    std::exception_ptr failure = nullptr;
    for (int level = d - 1; level >= 0; --level) {
        const auto& states = layers[level];
        const std::int64_t count = static_cast<std::int64_t>(states.size());
#pragma omp parallel for schedule(static) if (parallel)
        for (std::int64_t i = 0; i < count; ++i) {
            try {
                const State s(states[i], d);
                std::vector<double> next_qs;
                for (int a = 0; a < d; ++a) {
                    if (s.contains(a)) continue;
                    const double reward = cache.action_reward(a, s.members);
                    if (level == d - 1) {
                        table.set_log_q(s, a, reward);
                        continue;
                    }
                    const State next = apply_action(s, a);
                    next_qs.clear();
                    for (int b = 0; b < d; ++b)
                        if (!next.contains(b)) next_qs.push_back(table.log_q(next, b));
                    table.set_log_q(s, a, reward + log_sum_exp(next_qs));
                }
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    }
    return table;
}

}  // namespace

ExactQTable exact_q_dp(const LocalScoreCache& cache, const OracleLimits& limits) {
    return dp_impl(cache, limits, true);
}

ExactQTable exact_q_dp_serial(const LocalScoreCache& cache, const OracleLimits& limits) {
    return dp_impl(cache, limits, false);
}

TransitionDistribution exact_transition_dp(const ExactQTable& table, const State& s) {
    return table.transition(s);
}

EnumerationOracle EnumerationOracle::build_impl(const LocalScoreCache& cache,
                                                const OracleLimits& limits, bool parallel) {
    const int d = cache.num_vars();
    check_enum_limit(d, limits);

    EnumerationOracle oracle;
    oracle.num_vars_ = d;
    const std::size_t num_states = std::size_t{1} << d;

    // One chunk per leading variable; chunk results merge in chunk order so
    // the result does not depend on the thread count.
    std::vector<std::vector<LogSumAccumulator>> chunk_state(d);
    std::vector<std::vector<LogSumAccumulator>> chunk_pair(d);

    std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(static) if (parallel)
    for (int first = 0; first < d; ++first) {
        try {
            auto& state_acc = chunk_state[first];
            auto& pair_acc = chunk_pair[first];
            state_acc.assign(num_states, {});
            pair_acc.assign(num_states * d, {});

            Ordering rest;
            for (int v = 0; v < d; ++v)
                if (v != first) rest.push_back(v);

            Ordering full(d);
            full[0] = first;
            do {
                std::copy(rest.begin(), rest.end(), full.begin() + 1);
                double w = 0.0;
                State s = State::empty(d);
                for (int v : full) {
                    w += cache.action_reward(v, s.members);
                    s = apply_action(s, v);
                }
                std::uint64_t mask = 0;
                for (int k = 0; k < d; ++k) {
                    state_acc[mask].add(w);
                    pair_acc[mask * d + full[k]].add(w);
                    mask |= std::uint64_t{1} << full[k];
                }
                state_acc[mask].add(w);
            } while (std::next_permutation(rest.begin(), rest.end()));
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    oracle.state_mass_.resize(num_states);
    oracle.pair_mass_.resize(num_states * d);
    for (std::size_t i = 0; i < num_states; ++i) {
        LogSumAccumulator acc;
        for (int c = 0; c < d; ++c) acc.merge(chunk_state[c][i]);
        oracle.state_mass_[i] = acc.value();
    }
    for (std::size_t i = 0; i < num_states * d; ++i) {
        LogSumAccumulator acc;
        for (int c = 0; c < d; ++c) acc.merge(chunk_pair[c][i]);
        oracle.pair_mass_[i] = acc.value();
    }
    return oracle;
}

EnumerationOracle EnumerationOracle::build(const LocalScoreCache& cache,
                                           const OracleLimits& limits) {
    return build_impl(cache, limits, true);
}

EnumerationOracle EnumerationOracle::build_serial(const LocalScoreCache& cache,
                                                  const OracleLimits& limits) {
    return build_impl(cache, limits, false);
}

double EnumerationOracle::log_state_mass(const State& s) const {
    if (s.num_vars != num_vars_)
        throw DimensionMismatch("EnumerationOracle: state size mismatch");
    return state_mass_[s.members];
}

double EnumerationOracle::log_pair_mass(const State& s, int action) const {
    if (s.num_vars != num_vars_)
        throw DimensionMismatch("EnumerationOracle: state size mismatch");
    if (action < 0 || action >= num_vars_ || s.contains(action))
        throw InfeasibleAction("EnumerationOracle: infeasible action");
    return pair_mass_[static_cast<std::size_t>(s.members) * num_vars_ + action];
}

double EnumerationOracle::transition_prob(const State& s, int action) const {
    if (layer(s) >= num_vars_)
        throw TerminalState("transition_prob: full state has no actions");
    return std::exp(log_pair_mass(s, action) - log_state_mass(s));
}

double exact_transition_enum(const LocalScoreCache& cache, const State& s, int action,
                             const OracleLimits& limits) {
    return EnumerationOracle::build(cache, limits).transition_prob(s, action);
}

double OrderingPosterior::prob_of(const Ordering& ordering) const {
    const auto it = std::lower_bound(orderings.begin(), orderings.end(), ordering);
    if (it == orderings.end() || *it != ordering)
        throw DimensionMismatch("OrderingPosterior: unknown ordering");
    return probabilities[static_cast<std::size_t>(it - orderings.begin())];
}

OrderingPosterior exact_ordering_posterior(const LocalScoreCache& cache,
                                           const OracleLimits& limits) {
    const int d = cache.num_vars();
    check_enum_limit(d, limits);

    OrderingPosterior post;
    post.orderings = enumerate_orderings(d, limits.enum_max_vars);
    const std::size_t count = post.orderings.size();
    std::vector<double> log_rewards(count);

    std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(count); ++i) {
        try {
            log_rewards[i] = ordering_log_reward(post.orderings[i], cache);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    post.log_normalizer = log_sum_exp(log_rewards);
    post.probabilities.resize(count);
    for (std::size_t i = 0; i < count; ++i)
        post.probabilities[i] = std::exp(log_rewards[i] - post.log_normalizer);
    return post;
}

DetailedBalanceReport check_detailed_balance(const LocalScoreCache& cache,
                                             const OracleLimits& limits) {
    const int d = cache.num_vars();
    check_enum_limit(d, limits);
    const ExactQTable table = exact_q_dp(cache, limits);
    const EnumerationOracle oracle = EnumerationOracle::build(cache, limits);

    DetailedBalanceReport report;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << d); ++m) {
        const State s(m, d);
        if (layer(s) == d) continue;
        for (int a = 0; a < d; ++a) {
            if (s.contains(a)) continue;
            // log P(s'|s) + log R(s) vs log R(s'), with R(s') restricted to
            // orderings through both s and s' and P(s|s') = 1.
            const double lhs = table.log_transition(s, a) + oracle.log_state_mass(s);
            const double rhs = oracle.log_pair_mass(s, a);
            const double violation = std::abs(lhs - rhs);
            ++report.pairs_checked;
            if (violation > report.max_violation) {
                report.max_violation = violation;
                report.worst_state = s;
                report.worst_action = a;
            }
        }
    }
    return report;
}

}  // namespace causalq
