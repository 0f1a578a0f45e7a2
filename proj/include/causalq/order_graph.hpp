#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <vector>

#include "causalq/errors.hpp"

namespace causalq {

/// A node of the order graph: the set of variables already placed in the
/// ordering, stored as a bit pattern over [0, num_vars). Canonical bit
/// patterns make set equality integer equality, so states hash and compare
/// trivially -- the subset DP tables key directly on `members`.
struct State {
    std::uint64_t members = 0;
    int num_vars = 0;

    State() = default;
    State(std::uint64_t members_, int num_vars_) : members(members_), num_vars(num_vars_) {
        if (num_vars_ < 0 || num_vars_ > 63)
            throw DimensionMismatch("State: num_vars must be in [0, 63]");
        if (num_vars_ < 63 && (members_ >> num_vars_) != 0)
            throw DimensionMismatch("State: members has bits above num_vars");
    }

    static State empty(int num_vars) { return State(0, num_vars); }
    static State full(int num_vars) {
        return State(num_vars == 0 ? 0 : (~std::uint64_t{0} >> (64 - num_vars)), num_vars);
    }

    bool contains(int var) const { return (members >> var) & 1u; }
    bool is_full() const { return *this == full(num_vars); }

    friend bool operator==(const State&, const State&) = default;
};

/// Population count of the member set; identifies the order-graph layer.
inline int layer(const State& s) { return std::popcount(s.members); }

/// An ordering is a permutation of the variable indices: a root-to-sink
/// path in the order graph.
using Ordering = std::vector<int>;

/// Replay record of one order-graph step.
struct Transition {
    State state;
    int action = 0;
    State next_state;
    double log_reward = 0.0;
};

/// Probability over the feasible actions of a state. probs has one entry
/// per variable; infeasible entries are exactly 0.
struct TransitionDistribution {
    State state;
    std::vector<double> probs;
};

/// Variables not yet in s, in ascending order. Ascending order is relied
/// on for deterministic tie-breaking everywhere downstream.
std::vector<int> feasible_actions(const State& s);

/// Adds a variable to the ordered set. Throws InfeasibleAction if it is
/// already a member.
State apply_action(const State& s, int action);

/// Binary vector of length d: entry i is 1 iff variable i is in s.
std::vector<double> state_vector(const State& s);

/// All d! permutations, lexicographic. Throws LimitExceeded above `limit`.
std::vector<Ordering> enumerate_orderings(int num_vars, int limit = 9);

/// Visits all d! permutations in lexicographic order without materializing
/// them. Throws LimitExceeded above `limit`.
void for_each_ordering(int num_vars, const std::function<void(const Ordering&)>& fn, int limit = 9);

/// The d+1 nested states s_0 c ... c s_d traced by an ordering.
std::vector<State> ordering_prefix_states(const Ordering& ordering);

bool is_valid_ordering(const Ordering& ordering, int num_vars);

}  // namespace causalq
