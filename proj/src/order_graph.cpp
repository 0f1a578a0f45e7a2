#include "causalq/order_graph.hpp"

#include <algorithm>
#include <numeric>

namespace causalq {

std::vector<int> feasible_actions(const State& s) {
    std::vector<int> actions;
    actions.reserve(s.num_vars - layer(s));
    for (int v = 0; v < s.num_vars; ++v)
        if (!s.contains(v)) actions.push_back(v);
    return actions;
}

State apply_action(const State& s, int action) {
    if (action < 0 || action >= s.num_vars)
        throw InfeasibleAction("apply_action: variable index out of range");
    if (s.contains(action))
        throw InfeasibleAction("apply_action: variable " + std::to_string(action) +
                               " already ordered");
    return State(s.members | (std::uint64_t{1} << action), s.num_vars);
}

std::vector<double> state_vector(const State& s) {
    std::vector<double> v(s.num_vars, 0.0);
    for (int i = 0; i < s.num_vars; ++i)
        if (s.contains(i)) v[i] = 1.0;
    return v;
}

static void check_enum_limit(int num_vars, int limit) {
    if (num_vars > limit)
        throw LimitExceeded("ordering enumeration requires d <= " + std::to_string(limit) +
                            ", got d = " + std::to_string(num_vars));
}

std::vector<Ordering> enumerate_orderings(int num_vars, int limit) {
    check_enum_limit(num_vars, limit);
    std::vector<Ordering> all;
    for_each_ordering(num_vars, [&](const Ordering& o) { all.push_back(o); }, limit);
    return all;
}

void for_each_ordering(int num_vars, const std::function<void(const Ordering&)>& fn, int limit) {
    check_enum_limit(num_vars, limit);
    Ordering perm(num_vars);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        fn(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
}

std::vector<State> ordering_prefix_states(const Ordering& ordering) {
    const int d = static_cast<int>(ordering.size());
    std::vector<State> path;
    path.reserve(d + 1);
    State s = State::empty(d);
    path.push_back(s);
    for (int v : ordering) {
        s = apply_action(s, v);
        path.push_back(s);
    }
    return path;
}

bool is_valid_ordering(const Ordering& ordering, int num_vars) {
    if (static_cast<int>(ordering.size()) != num_vars) return false;
    std::uint64_t seen = 0;
    for (int v : ordering) {
        if (v < 0 || v >= num_vars) return false;
        if ((seen >> v) & 1u) return false;
        seen |= std::uint64_t{1} << v;
    }
    return true;
}

}  // namespace causalq
