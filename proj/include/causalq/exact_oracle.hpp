#pragma once

#include <string>
#include <vector>

#include "causalq/order_graph.hpp"
#include "causalq/scoring.hpp"

namespace causalq {

struct OracleLimits {
    int dp_max_vars = 15;    // 2^d DP table must fit comfortably
    int enum_max_vars = 9;   // d! enumeration must stay desk-scale
};

/// Exact log Q(s, a) for every feasible (state, action) pair, computed by
/// backward induction over the order graph:
///   log Q(s, a) = log R(a) + logsumexp_{a' in A(s')} log Q(s', a')
/// with log Q = log R(a) at the second-to-last layer.
class ExactQTable {
public:
    explicit ExactQTable(int num_vars);

    int num_vars() const { return num_vars_; }
    double log_q(const State& s, int action) const;
    void set_log_q(const State& s, int action, double value);

    /// P(s'|s) = Q(s,a) / sum_{a'} Q(s,a'), computed stably in log space.
    /// Throws TerminalState at the full state.
    TransitionDistribution transition(const State& s) const;
    double log_transition(const State& s, int action) const;

    /// JSON export keyed "<state bits>/<action>", bit i first.
    std::string to_json() const;
    static ExactQTable from_json(const std::string& text);

private:
    std::size_t index(const State& s, int action) const;

    int num_vars_;
    std::vector<double> table_;
};

ExactQTable exact_q_dp(const LocalScoreCache& cache, const OracleLimits& limits = {});
/// Single-threaded reference; the parallel version must match it bit for bit.
ExactQTable exact_q_dp_serial(const LocalScoreCache& cache, const OracleLimits& limits = {});

TransitionDistribution exact_transition_dp(const ExactQTable& table, const State& s);

/// Full-enumeration oracle: accumulates, over all d! orderings, the log
/// mass of orderings whose prefix path passes through each state (and each
/// state/action pair). The transition probability is the pair/state mass
/// ratio; the prefix parts cancel against the DP's completion-sum ratio,
/// which is what the oracle-equivalence tests pin down.
class EnumerationOracle {
public:
    static EnumerationOracle build(const LocalScoreCache& cache, const OracleLimits& limits = {});
    static EnumerationOracle build_serial(const LocalScoreCache& cache,
                                          const OracleLimits& limits = {});

    int num_vars() const { return num_vars_; }
    double transition_prob(const State& s, int action) const;
    double log_state_mass(const State& s) const;
    double log_pair_mass(const State& s, int action) const;

private:
    static EnumerationOracle build_impl(const LocalScoreCache& cache, const OracleLimits& limits,
                                        bool parallel);

    int num_vars_ = 0;
    std::vector<double> state_mass_;
    std::vector<double> pair_mass_;
};

double exact_transition_enum(const LocalScoreCache& cache, const State& s, int action,
                             const OracleLimits& limits = {});

/// Normalized posterior over all d! orderings, lexicographically ordered.
struct OrderingPosterior {
    std::vector<Ordering> orderings;
    std::vector<double> probabilities;
    double log_normalizer = 0.0;

    double prob_of(const Ordering& ordering) const;
    std::size_t size() const { return orderings.size(); }
};

OrderingPosterior exact_ordering_posterior(const LocalScoreCache& cache,
                                           const OracleLimits& limits = {});

/// Checks P(s'|s) R(s) = P(s|s') R(s') with P(s|s') = 1 in log space for
/// every feasible pair: the DP transition against the enumeration masses.
struct DetailedBalanceReport {
    double max_violation = 0.0;
    int pairs_checked = 0;
    State worst_state;
    int worst_action = -1;
};

DetailedBalanceReport check_detailed_balance(const LocalScoreCache& cache,
                                             const OracleLimits& limits = {});

}  // namespace causalq
