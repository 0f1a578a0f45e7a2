#include <doctest.h>

#include <cmath>
#include <set>

#include "causalq/exact_oracle.hpp"
#include "causalq/trainer.hpp"
#include "fixtures.hpp"

using namespace causalq;
using namespace causalq::test;

namespace {

/// Tabular layered models preloaded with the exact DP values.
LayeredQModels exact_tabular_models(const ExactQTable& table) {
    const int d = table.num_vars();
    LayeredQModels models = LayeredQModels::make_tabular(d);
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << d); ++m) {
        const State s(m, d);
        for (int a : feasible_actions(s)) {
            auto& tab = dynamic_cast<TabularQModel&>(models.layer_model(layer(s)));
            tab.set_value(s, a, table.log_q(s, a));
        }
    }
    return models;
}

}  // namespace

TEST_CASE("epsilon_greedy_pick") {
    TransitionDistribution dist{State::empty(2), {0.999, 0.001}};
    SUBCASE("epsilon 1 follows the model distribution") {
        Rng rng(1);
        int zero = 0;
        for (int i = 0; i < 10000; ++i)
            if (epsilon_greedy_pick(dist, 1.0, rng) == 0) ++zero;
        CHECK(zero >= 9900);
    }
    SUBCASE("epsilon 0 is uniform") {
        Rng rng(2);
        int zero = 0;
        for (int i = 0; i < 10000; ++i)
            if (epsilon_greedy_pick(dist, 0.0, rng) == 0) ++zero;
        CHECK(std::abs(zero / 10000.0 - 0.5) <= 0.03);
    }
    SUBCASE("single feasible action always wins") {
        TransitionDistribution last{State(0b01, 2), {0.0, 1.0}};
        Rng rng(3);
        for (int i = 0; i < 100; ++i) CHECK(epsilon_greedy_pick(last, 0.3, rng) == 1);
    }
}

TEST_CASE("rollout walks the whole graph") {
    SUBCASE("single variable") {
        const Dataset data = chain_data(1, 50, 31);
        LocalScoreCache cache(data);
        LayeredQModels models = LayeredQModels::make_tabular(1);
        ReplayBuffer buffer(1, 100);
        Rng rng(4);
        CHECK(rollout(models, cache, buffer, 0.5, rng) == Ordering{0});
        CHECK(buffer.size() == 1);
    }
    SUBCASE("buffer grows by d per rollout") {
        const Dataset data = chain_data(3, 100, 32);
        LocalScoreCache cache(data);
        LayeredQModels models = LayeredQModels::make_tabular(3);
        ReplayBuffer buffer(3, 100);
        Rng rng(5);
        rollout(models, cache, buffer, 0.5, rng);
        CHECK(buffer.size() == 3);
        rollout(models, cache, buffer, 0.5, rng);
        CHECK(buffer.size() == 6);
    }
    SUBCASE("seeded rollouts repeat") {
        const Dataset data = chain_data(4, 100, 33);
        LocalScoreCache cache(data);
        LayeredQModels models = LayeredQModels::make_tabular(4);
        auto run = [&] {
            ReplayBuffer buffer(4, 100);
            Rng rng(6);
            std::vector<Ordering> orderings;
            for (int i = 0; i < 5; ++i)
                orderings.push_back(rollout(models, cache, buffer, 0.0, rng));
            return orderings;
        };
        CHECK(run() == run());
    }
}

TEST_CASE("target_value") {
    const Dataset data = chain_data(3, 120, 34);
    LocalScoreCache cache(data);
    const ExactQTable table = exact_q_dp(cache);
    LayeredQModels models = exact_tabular_models(table);

    SUBCASE("terminal transitions return the raw reward") {
        const State s(0b011, 3);
        const Transition t{s, 2, State::full(3), action_log_reward(s, 2, cache)};
        CHECK(target_value(t, nullptr) == t.log_reward);
    }
    SUBCASE("singleton next layer adds the single Q value") {
        const State s(0b001, 3);
        const State next(0b011, 3);
        const Transition t{s, 1, next, action_log_reward(s, 1, cache)};
        const double y = target_value(t, &models.layer_model(2));
        CHECK(y == doctest::Approx(t.log_reward + table.log_q(next, 2)).epsilon(1e-12));
    }
    SUBCASE("with exact tabular models every target is the exact Q value") {
        for (std::uint64_t m = 0; m < 8; ++m) {
            const State s(m, 3);
            if (layer(s) == 3) continue;
            for (int a : feasible_actions(s)) {
                const State next = apply_action(s, a);
                const Transition t{s, a, next, action_log_reward(s, a, cache)};
                const QModel* next_model =
                    next.is_full() ? nullptr : &models.layer_model(layer(next));
                CHECK(std::abs(target_value(t, next_model) - table.log_q(s, a)) <= 1e-9);
            }
        }
    }
}

TEST_CASE("exact values are a fixed point of fitting") {
    const Dataset data = chain_data(4, 150, 35);
    LocalScoreCache cache(data);
    const ExactQTable table = exact_q_dp(cache);
    LayeredQModels models = exact_tabular_models(table);

    ReplayBuffer buffer(4, 1000);
    Rng rng(7);
    for (int i = 0; i < 25; ++i) rollout(models, cache, buffer, 0.5, rng);
    for (int k = 0; k < 4; ++k) {
        const auto batch = buffer_sample(buffer, k, 64, rng);
        std::vector<State> states;
        std::vector<int> actions;
        std::vector<double> targets;
        for (const Transition& t : batch) {
            states.push_back(t.state);
            actions.push_back(t.action);
            const QModel* next_model =
                t.next_state.is_full() ? nullptr : &models.layer_model(layer(t.next_state));
            targets.push_back(target_value(t, next_model));
        }
        const double loss = models.layer_model(k).fit_batch(states, actions, targets, 1.0);
        CHECK(loss <= 1e-9);
    }
}

TEST_CASE("replay buffer") {
    const Dataset data = chain_data(2, 60, 36);
    LocalScoreCache cache(data);
    auto transition_at = [&](int var) {
        const State s = State::empty(2);
        return Transition{s, var, apply_action(s, var), action_log_reward(s, var, cache)};
    };

    SUBCASE("FIFO eviction keeps the capacity bound") {
        ReplayBuffer buffer(2, 3);
        for (int i = 0; i < 5; ++i) {
            buffer.push(transition_at(i % 2));
            CHECK(buffer.size() <= 3);
        }
        CHECK(buffer.size() == 3);
        // pushes were 0,1,0,1,0 -> survivors are 0,1,0 (oldest two evicted)
        CHECK(buffer.layer_count(0) == 3);
        CHECK(buffer.at_layer(0, 0).action == 0);
        CHECK(buffer.at_layer(0, 1).action == 1);
        CHECK(buffer.at_layer(0, 2).action == 0);
    }
    SUBCASE("degenerate sampling repeats the lone record") {
        ReplayBuffer buffer(2, 10);
        buffer.push(transition_at(1));
        Rng rng(8);
        const auto batch = buffer_sample(buffer, 0, 4, rng);
        REQUIRE(batch.size() == 4);
        for (const auto& t : batch) CHECK(t.action == 1);
    }
    SUBCASE("sampling never crosses layers") {
        ReplayBuffer buffer(2, 100);
        Rng roll_rng(9);
        LayeredQModels models = LayeredQModels::make_tabular(2);
        for (int i = 0; i < 20; ++i) rollout(models, cache, buffer, 0.5, roll_rng);
        Rng rng(10);
        for (int i = 0; i < 1000; ++i) {
            const auto batch = buffer_sample(buffer, 1, 1, rng);
            CHECK(layer(batch[0].state) == 1);
        }
    }
    SUBCASE("sampling is uniform over stored records") {
        ReplayBuffer buffer(1, 100);
        const Dataset tiny = chain_data(1, 50, 37);
        LocalScoreCache tiny_cache(tiny);
        // ten distinguishable records at the same layer
        for (int i = 0; i < 10; ++i) {
            Transition t{State::empty(1), 0, State::full(1), static_cast<double>(i)};
            buffer.push(t);
        }
        Rng rng(11);
        std::vector<int> hits(10, 0);
        for (int i = 0; i < 100000; ++i)
            ++hits[static_cast<int>(buffer_sample(buffer, 0, 1, rng)[0].log_reward)];
        for (int h : hits) {
            CHECK(h >= 8000);
            CHECK(h <= 12000);
        }
    }
    SUBCASE("empty layer is an error") {
        ReplayBuffer buffer(2, 10);
        Rng rng(12);
        CHECK_THROWS_AS(buffer_sample(buffer, 0, 1, rng), EmptyLayer);
    }
}

TEST_CASE("training on d=2 tabular models reaches the exact transition") {
    const Dataset data = chain_data(2, 200, 38);
    LocalScoreCache cache(data);

    TrainConfig config;
    config.tabular = true;
    config.episodes = 200;
    config.learning_rate = 0.5;
    config.epsilon = 0.5;
    config.updates_per_episode = 1;
    config.seed = 5;
    const TrainResult result = train(cache, config);

    const ExactQTable table = exact_q_dp(cache);
    const auto exact = table.transition(State::empty(2));
    const auto learned = transition_distribution(
        forward_masked(result.models.layer_model(0), State::empty(2)));
    for (int a = 0; a < 2; ++a) CHECK(std::abs(learned.probs[a] - exact.probs[a]) <= 0.02);
}

TEST_CASE("zero episodes return the initialization") {
    const Dataset data = chain_data(3, 100, 39);
    TrainConfig config;
    config.episodes = 0;
    config.seed = 21;
    config.hidden = {8};
    const TrainResult result = train(data, config);
    const LayeredQModels fresh =
        LayeredQModels::make_mlp(3, MlpOptions{{8}, config.clip_norm, 0, true}, 21);
    for (int k = 0; k < 3; ++k)
        CHECK(result.models.layer_model(k).parameters() == fresh.layer_model(k).parameters());
}

TEST_CASE("training is reproducible bit for bit") {
    const Dataset data = chain_data(3, 100, 40);
    TrainConfig config;
    config.episodes = 50;
    config.hidden = {16};
    config.seed = 77;
    const TrainResult a = train(data, config);
    const TrainResult b = train(data, config);
    for (int k = 0; k < 3; ++k)
        CHECK(a.models.layer_model(k).parameters() == b.models.layer_model(k).parameters());
    REQUIRE(a.log.size() == b.log.size());
    CHECK(a.log.back().layer_loss == b.log.back().layer_loss);
}

TEST_CASE("models are evaluated only on their own layer") {
    const Dataset data = chain_data(3, 100, 41);
    LocalScoreCache cache(data);
    LayeredQModels models = LayeredQModels::make_tabular(3);
    models.set_instrument(true);
    ReplayBuffer buffer(3, 100);
    Rng rng(13);
    for (int i = 0; i < 10; ++i) rollout(models, cache, buffer, 0.5, rng);
    CHECK_FALSE(models.instrument_log().empty());
    for (const auto& [model_index, state_layer] : models.instrument_log())
        CHECK(model_index == state_layer);
    models.set_instrument(false);
}

TEST_CASE("runaway learning rate raises Diverged") {
    const Dataset data = chain_data(2, 200, 42);
    TrainConfig config;
    config.tabular = true;
    config.learning_rate = 2.1;  // error grows by 1.1x per visit
    config.batch_size = 1;
    config.updates_per_episode = 1;
    config.episodes = 4000;
    config.divergence_threshold = 1e6;
    config.seed = 3;
    CHECK_THROWS_AS(train(data, config), Diverged);
}

TEST_CASE("checkpoint round trip for layered models") {
    const Dataset data = chain_data(3, 100, 43);
    TrainConfig config;
    config.episodes = 5;
    config.hidden = {8};
    config.seed = 9;
    const TrainResult result = train(data, config);
    const LayeredQModels restored = layered_models_from_json(layered_models_to_json(result.models));
    for (int k = 0; k < 3; ++k)
        CHECK(restored.layer_model(k).parameters() == result.models.layer_model(k).parameters());
}
