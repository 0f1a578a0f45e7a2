#include <doctest.h>

#include <cmath>

#include "causalq/exact_oracle.hpp"
#include "causalq/numeric.hpp"
#include "fixtures.hpp"

using namespace causalq;
using namespace causalq::test;

TEST_CASE("d=2 DP values unroll by hand") {
    const Dataset data = chain_data(2, 100, 1);
    LocalScoreCache cache(data);
    const ExactQTable table = exact_q_dp(cache);

    for (int a = 0; a < 2; ++a) {
        const int other = 1 - a;
        const State mid(std::uint64_t{1} << a, 2);
        // base case: second-to-last layer stores the raw action reward
        CHECK(table.log_q(mid, other) == action_log_reward(mid, other, cache));
        // one-step recursion with a singleton logsumexp
        const double expected =
            action_log_reward(State::empty(2), a, cache) + action_log_reward(mid, other, cache);
        CHECK(table.log_q(State::empty(2), a) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("DP and enumeration oracles agree everywhere") {
    const Dataset data = chain_data(5, 200, 21);
    LocalScoreCache cache(data);
    const ExactQTable table = exact_q_dp(cache);
    const EnumerationOracle oracle = EnumerationOracle::build(cache);

    double max_gap = 0.0;
    for (std::uint64_t m = 0; m < (1u << 5); ++m) {
        const State s(m, 5);
        if (layer(s) == 5) continue;
        const auto dp = exact_transition_dp(table, s);
        for (int a : feasible_actions(s))
            max_gap = std::max(max_gap, std::abs(dp.probs[a] - oracle.transition_prob(s, a)));
    }
    CHECK(max_gap <= 1e-9);
}

TEST_CASE("parallel kernels match the serial reference") {
    const Dataset data = er_instance(6, 150, 77).data;
    SUBCASE("DP is bit-identical") {
        LocalScoreCache c1(data), c2(data);
        const ExactQTable par = exact_q_dp(c1);
        const ExactQTable ser = exact_q_dp_serial(c2);
        for (std::uint64_t m = 0; m < (1u << 6); ++m) {
            const State s(m, 6);
            for (int a : feasible_actions(s)) CHECK(par.log_q(s, a) == ser.log_q(s, a));
        }
    }
    SUBCASE("enumeration masses agree to fp noise") {
        LocalScoreCache cache(data);
        const EnumerationOracle par = EnumerationOracle::build(cache);
        const EnumerationOracle ser = EnumerationOracle::build_serial(cache);
        for (std::uint64_t m = 1; m < (1u << 6); ++m) {
            const State s(m, 6);
            CHECK(par.log_state_mass(s) ==
                  doctest::Approx(ser.log_state_mass(s)).epsilon(1e-12));
        }
    }
}

TEST_CASE("transition distributions") {
    const Dataset data = chain_data(5, 200, 2);
    LocalScoreCache cache(data);
    const ExactQTable table = exact_q_dp(cache);

    SUBCASE("single feasible action gets probability one") {
        const State s(0b11110, 5);
        const auto dist = table.transition(s);
        CHECK(dist.probs[0] == 1.0);
    }
    SUBCASE("equal values give the uniform distribution") {
        ExactQTable flat(3);
        for (std::uint64_t m = 0; m < 8; ++m) {
            const State s(m, 3);
            for (int a : feasible_actions(s)) flat.set_log_q(s, a, -5.0);
        }
        const auto dist = flat.transition(State::empty(3));
        for (int a = 0; a < 3; ++a) CHECK(dist.probs[a] == doctest::Approx(1.0 / 3).epsilon(1e-12));
    }
    SUBCASE("every state normalizes to one") {
        for (std::uint64_t m = 0; m < (1u << 5); ++m) {
            const State s(m, 5);
            if (layer(s) == 5) continue;
            const auto dist = table.transition(s);
            double total = 0.0;
            for (double p : dist.probs) total += p;
            CHECK(std::abs(total - 1.0) <= 1e-12);
        }
    }
    SUBCASE("terminal state is refused") {
        CHECK_THROWS_AS(table.transition(State::full(5)), TerminalState);
    }
}

TEST_CASE("enumeration oracle identities") {
    SUBCASE("the two d=2 transitions partition the mass") {
        const Dataset data = chain_data(2, 120, 3);
        LocalScoreCache cache(data);
        const EnumerationOracle oracle = EnumerationOracle::build(cache);
        const State s0 = State::empty(2);
        CHECK(oracle.transition_prob(s0, 0) + oracle.transition_prob(s0, 1) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("exchangeable columns split a transition evenly") {
        // Append the column-swapped copy of every row: the empirical
        // distribution is then exactly invariant under swapping X1 and X2.
        const Dataset base = er_instance(3, 100, 5).data;
        Dataset sym;
        sym.names = base.names;
        sym.columns.assign(3, {});
        for (int t = 0; t < base.num_samples(); ++t) {
            sym.columns[0].push_back(base.columns[0][t]);
            sym.columns[1].push_back(base.columns[1][t]);
            sym.columns[2].push_back(base.columns[2][t]);
            sym.columns[0].push_back(base.columns[0][t]);
            sym.columns[1].push_back(base.columns[2][t]);
            sym.columns[2].push_back(base.columns[1][t]);
        }
        LocalScoreCache cache(sym);
        const EnumerationOracle oracle = EnumerationOracle::build(cache);
        CHECK(oracle.transition_prob(State(0b001, 3), 1) == doctest::Approx(0.5).epsilon(1e-9));
    }
}

TEST_CASE("exact posterior") {
    SUBCASE("single variable") {
        const Dataset data = chain_data(1, 50, 4);
        LocalScoreCache cache(data);
        const auto post = exact_ordering_posterior(cache);
        REQUIRE(post.size() == 1);
        CHECK(post.probabilities[0] == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("normalizes to one") {
        const Dataset data = er_instance(5, 200, 6).data;
        LocalScoreCache cache(data);
        const auto post = exact_ordering_posterior(cache);
        double total = 0.0;
        for (double p : post.probabilities) total += p;
        CHECK(std::abs(total - 1.0) <= 1e-9);
    }
    SUBCASE("iid noise gives a flat posterior") {
        const Dataset data = iid_noise_data(4, 10000, 8);
        LocalScoreCache cache(data);
        const auto post = exact_ordering_posterior(cache);
        double lo = 1.0, hi = 0.0;
        for (double p : post.probabilities) {
            lo = std::min(lo, p);
            hi = std::max(hi, p);
        }
        CHECK(hi / lo <= 1.2);
    }
    SUBCASE("chain rule: path transitions multiply to the posterior") {
        const Dataset data = chain_data(5, 200, 9);
        LocalScoreCache cache(data);
        const ExactQTable table = exact_q_dp(cache);
        const auto post = exact_ordering_posterior(cache);
        for (std::size_t i = 0; i < post.size(); ++i) {
            double log_p = 0.0;
            State s = State::empty(5);
            for (int v : post.orderings[i]) {
                log_p += table.log_transition(s, v);
                s = apply_action(s, v);
            }
            CHECK(std::exp(log_p) == doctest::Approx(post.probabilities[i]).epsilon(1e-9));
        }
        CHECK(post.prob_of({0, 1, 2, 3, 4}) == post.probabilities[0]);
    }
}

TEST_CASE("posterior mass concentrates on the identifiable orderings") {
    // 0 -> 2 <- 1 with 2 -> 3 <- 0: the v-structures pin every edge, so
    // exactly the orderings {0,1|2|3} are compatible with the truth.
    // Wrong orderings pay the BIC penalty of at least one extra parameter
    // (~1/sqrt(n) each), so the compatible mass grows with n.
    WeightedDag g(4);
    g.set_weight(0, 2, 1.5);
    g.set_weight(1, 2, 1.5);
    g.set_weight(2, 3, 1.5);
    g.set_weight(0, 3, 1.5);
    auto mass_at = [&](int n) {
        Rng rng(derive_seed(10, "collider"));
        const Dataset data = linear_gaussian_sample(g, n, 1.0, rng);
        LocalScoreCache cache(data);
        const auto post = exact_ordering_posterior(cache);
        return post.prob_of({0, 1, 2, 3}) + post.prob_of({1, 0, 2, 3});
    };
    CHECK(mass_at(5000) >= 0.55);
    CHECK(mass_at(20000) >= 0.9);
}

TEST_CASE("detailed balance holds between the two oracles") {
    SUBCASE("single variable graph balances exactly") {
        const Dataset data = chain_data(1, 50, 11);
        LocalScoreCache cache(data);
        const auto report = check_detailed_balance(cache);
        CHECK(report.pairs_checked == 1);
        CHECK(report.max_violation == 0.0);
    }
    SUBCASE("d=2") {
        const Dataset data = chain_data(2, 150, 12);
        LocalScoreCache cache(data);
        CHECK(check_detailed_balance(cache).max_violation <= 1e-9);
    }
    SUBCASE("d=5 sweeps all 80 feasible pairs") {
        const Dataset data = er_instance(5, 200, 13).data;
        LocalScoreCache cache(data);
        const auto report = check_detailed_balance(cache);
        CHECK(report.pairs_checked == 80);
        CHECK(report.max_violation <= 1e-9);
    }
}

TEST_CASE("q table JSON round trip is exact") {
    const Dataset data = chain_data(3, 100, 14);
    LocalScoreCache cache(data);
    const ExactQTable table = exact_q_dp(cache);
    const ExactQTable loaded = ExactQTable::from_json(table.to_json());
    for (std::uint64_t m = 0; m < 8; ++m) {
        const State s(m, 3);
        for (int a : feasible_actions(s)) CHECK(loaded.log_q(s, a) == table.log_q(s, a));
    }
}

TEST_CASE("size limits") {
    const Dataset data = er_instance(10, 100, 15).data;
    LocalScoreCache cache(data);
    OracleLimits limits;
    CHECK_THROWS_AS(EnumerationOracle::build(cache, limits), LimitExceeded);
    CHECK_THROWS_AS(exact_ordering_posterior(cache, limits), LimitExceeded);
    limits.dp_max_vars = 9;
    CHECK_THROWS_AS(exact_q_dp(cache, limits), LimitExceeded);
}
