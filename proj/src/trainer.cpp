#include "causalq/trainer.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "causalq/numeric.hpp"

namespace causalq {

void TrainConfig::validate() const {
    if (epsilon < 0.0 || epsilon > 1.0) throw ConfigError("TrainConfig: epsilon must be in [0, 1]");
    if (episodes < 0) throw ConfigError("TrainConfig: episodes must be >= 0");
    if (batch_size <= 0) throw ConfigError("TrainConfig: batch size must be positive");
    if (learning_rate <= 0.0) throw ConfigError("TrainConfig: learning rate must be positive");
    if (buffer_capacity == 0) throw ConfigError("TrainConfig: buffer capacity must be positive");
    if (updates_per_episode <= 0)
        throw ConfigError("TrainConfig: updates per episode must be positive");
    if (divergence_threshold <= 0.0)
        throw ConfigError("TrainConfig: divergence threshold must be positive");
}

// ---------------------------------------------------------------------------
// ReplayBuffer

ReplayBuffer::ReplayBuffer(int num_vars, std::size_t capacity)
    : num_vars_(num_vars), capacity_(capacity), layer_seqs_(num_vars) {
    if (num_vars < 1) throw DimensionMismatch("ReplayBuffer: need at least one variable");
    if (capacity == 0) throw ConfigError("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::push(const Transition& t) {
    if (t.state.num_vars != num_vars_)
        throw DimensionMismatch("ReplayBuffer: transition width mismatch");
    if (storage_.size() == capacity_) {
        const int evicted_layer = layer(storage_.front().state);
        layer_seqs_[evicted_layer].pop_front();  // global FIFO implies per-layer FIFO
        storage_.pop_front();
        ++first_seq_;
    }
    const std::uint64_t seq = first_seq_ + storage_.size();
    layer_seqs_[layer(t.state)].push_back(seq);
    storage_.push_back(t);
}

std::size_t ReplayBuffer::layer_count(int state_layer) const {
    if (state_layer < 0 || state_layer >= num_vars_)
        throw DimensionMismatch("ReplayBuffer: layer out of range");
    return layer_seqs_[state_layer].size();
}

const Transition& ReplayBuffer::at_layer(int state_layer, std::size_t i) const {
    const auto& seqs = layer_seqs_[state_layer];
    if (i >= seqs.size()) throw DimensionMismatch("ReplayBuffer: index out of range");
    return storage_[static_cast<std::size_t>(seqs[i] - first_seq_)];
}

std::vector<Transition> buffer_sample(const ReplayBuffer& buffer, int state_layer, int count,
                                      Rng& rng) {
    const std::size_t available = buffer.layer_count(state_layer);
    if (available == 0)
        throw EmptyLayer("buffer_sample: no transitions at layer " + std::to_string(state_layer));
    std::uniform_int_distribution<std::size_t> pick(0, available - 1);
    std::vector<Transition> batch;
    batch.reserve(count);
    for (int i = 0; i < count; ++i) batch.push_back(buffer.at_layer(state_layer, pick(rng)));
    return batch;
}

// ---------------------------------------------------------------------------
// LayeredQModels

LayeredQModels::LayeredQModels(const LayeredQModels& other) : num_vars_(other.num_vars_) {
    models_.reserve(other.models_.size());
    for (const auto& m : other.models_) models_.push_back(m->clone());
}

LayeredQModels& LayeredQModels::operator=(const LayeredQModels& other) {
    if (this == &other) return *this;
    num_vars_ = other.num_vars_;
    models_.clear();
    models_.reserve(other.models_.size());
    for (const auto& m : other.models_) models_.push_back(m->clone());
    return *this;
}

LayeredQModels LayeredQModels::make_mlp(int num_vars, const MlpOptions& base, std::uint64_t seed) {
    LayeredQModels out;
    out.num_vars_ = num_vars;
    for (int k = 0; k < num_vars; ++k) {
        MlpOptions opts = base;
        opts.seed = derive_seed(seed, "model", static_cast<std::uint64_t>(k));
        out.models_.push_back(std::make_unique<MlpQModel>(num_vars, opts));
    }
    return out;
}

LayeredQModels LayeredQModels::make_tabular(int num_vars) {
    LayeredQModels out;
    out.num_vars_ = num_vars;
    for (int k = 0; k < num_vars; ++k)
        out.models_.push_back(std::make_unique<TabularQModel>(num_vars));
    return out;
}

QModel& LayeredQModels::layer_model(int state_layer) {
    if (state_layer < 0 || state_layer >= static_cast<int>(models_.size()))
        throw DimensionMismatch("LayeredQModels: layer out of range");
    return *models_[state_layer];
}

const QModel& LayeredQModels::layer_model(int state_layer) const {
    if (state_layer < 0 || state_layer >= static_cast<int>(models_.size()))
        throw DimensionMismatch("LayeredQModels: layer out of range");
    return *models_[state_layer];
}

const QModel& LayeredQModels::eval_model(const State& s) const {
    const int k = layer(s);
    if (instrument_) evaluations_.emplace_back(k, k);
    return layer_model(k);
}

std::string layered_models_to_json(const LayeredQModels& models) {
    nlohmann::json j;
    j["version"] = 1;
    j["num_vars"] = models.num_vars();
    auto arr = nlohmann::json::array();
    for (int k = 0; k < models.num_vars(); ++k)
        arr.push_back(nlohmann::json::parse(qmodel_to_json(models.layer_model(k))));
    j["models"] = std::move(arr);
    return j.dump();
}

LayeredQModels layered_models_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("checkpoint JSON: ") + e.what());
    }
    const int d = j.at("num_vars").get<int>();
    const auto& arr = j.at("models");
    if (static_cast<int>(arr.size()) != d)
        throw ParseError("checkpoint JSON: expected one model per layer");
    // Reconstruct through the tabular/mlp factories, then overwrite params.
    LayeredQModels out;
    const std::string first_type = arr[0].at("architecture").at("type").get<std::string>();
    if (first_type == "tabular") out = LayeredQModels::make_tabular(d);
    else {
        MlpOptions opts;
        opts.hidden = arr[0].at("hidden").get<std::vector<int>>();
        opts.clip_norm = arr[0].value("clip_norm", opts.clip_norm);
        out = LayeredQModels::make_mlp(d, opts, 0);
    }
    for (int k = 0; k < d; ++k)
        out.layer_model(k).set_parameters(arr[k].at("params").get<std::vector<double>>());
    return out;
}

// ---------------------------------------------------------------------------
// Training

int epsilon_greedy_pick(const TransitionDistribution& dist, double epsilon, Rng& rng) {
    const auto feasible = feasible_actions(dist.state);
    if (feasible.empty()) throw NoFeasibleAction("epsilon_greedy_pick: terminal state");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < epsilon) {
        // Sample by the model's probabilities; the remainder after fp loss
        // lands on the last feasible action.
        const double u = unit(rng);
        double acc = 0.0;
        for (int a : feasible) {
            acc += dist.probs[a];
            if (u < acc) return a;
        }
        return feasible.back();
    }
    std::uniform_int_distribution<std::size_t> pick(0, feasible.size() - 1);
    return feasible[pick(rng)];
}

Ordering rollout(const LayeredQModels& models, const LocalScoreCache& cache, ReplayBuffer& buffer,
                 double epsilon, Rng& rng) {
    const int d = cache.num_vars();
    if (models.num_vars() != d) throw DimensionMismatch("rollout: model width mismatch");
    Ordering ordering;
    ordering.reserve(d);
    State s = State::empty(d);
    for (int k = 0; k < d; ++k) {
        const auto dist = transition_distribution(forward_masked(models.eval_model(s), s));
        const int a = epsilon_greedy_pick(dist, epsilon, rng);
        const double log_reward = action_log_reward(s, a, cache);
        const State next = apply_action(s, a);
        buffer.push({s, a, next, log_reward});
        ordering.push_back(a);
        s = next;
    }
    return ordering;
}

double target_value(const Transition& t, const QModel* next_model) {
    if (t.next_state.is_full()) return t.log_reward;
    if (next_model == nullptr)
        throw DimensionMismatch("target_value: non-terminal transition needs the next model");
    const MaskedQVector q = forward_masked(*next_model, t.next_state);
    std::vector<double> vals;
    vals.reserve(t.next_state.num_vars - layer(t.next_state));
    for (int a = 0; a < t.next_state.num_vars; ++a)
        if (!t.next_state.contains(a)) vals.push_back(q.values[a]);
    return t.log_reward + log_sum_exp(vals);
}

TrainResult train(const LocalScoreCache& cache, const TrainConfig& config) {
    config.validate();
    const int d = cache.num_vars();

    TrainResult result;
    result.models = config.tabular
                        ? LayeredQModels::make_tabular(d)
                        : LayeredQModels::make_mlp(
                              d, MlpOptions{config.hidden, config.clip_norm, 0, true}, config.seed);
    ReplayBuffer buffer(d, config.buffer_capacity);
    Rng rng(derive_seed(config.seed, "train"));

    double loss_ema = 0.0;
    bool ema_started = false;
    bool guard_armed = false;

    for (int ep = 0; ep < config.episodes; ++ep) {
        rollout(result.models, cache, buffer, config.epsilon, rng);

        EpisodeStats stats;
        stats.episode = ep;
        stats.epsilon = config.epsilon;
        stats.layer_loss.assign(d, 0.0);
        std::vector<int> update_counts(d, 0);

        for (int pass = 0; pass < config.updates_per_episode; ++pass) {
            for (int k = 0; k < d; ++k) {
                if (buffer.layer_count(k) == 0) continue;
                const auto batch = buffer_sample(buffer, k, config.batch_size, rng);
                const QModel* next_model = (k + 1 < d) ? &result.models.layer_model(k + 1) : nullptr;
                std::vector<State> states;
                std::vector<int> actions;
                std::vector<double> targets;
                states.reserve(batch.size());
                actions.reserve(batch.size());
                targets.reserve(batch.size());
                for (const Transition& t : batch) {
                    if (layer(t.state) != k)
                        throw DimensionMismatch("train: cross-layer transition in batch");
                    states.push_back(t.state);
                    actions.push_back(t.action);
                    targets.push_back(target_value(t, next_model));
                }
                const double loss = result.models.layer_model(k).fit_batch(
                    states, actions, targets, config.learning_rate);
                stats.layer_loss[k] += loss;
                ++update_counts[k];

                loss_ema = ema_started ? 0.99 * loss_ema + 0.01 * loss : loss;
                ema_started = true;
            }
        }
        for (int k = 0; k < d; ++k)
            if (update_counts[k] > 0) stats.layer_loss[k] /= update_counts[k];
        stats.buffer_size = buffer.size();
        result.log.push_back(std::move(stats));

        if (!guard_armed && loss_ema < config.divergence_threshold) guard_armed = true;
        if (guard_armed && loss_ema > config.divergence_threshold)
            throw Diverged("train: running mean loss " + std::to_string(loss_ema) +
                           " exceeded the divergence threshold");
    }
    return result;
}

TrainResult train(const Dataset& data, const TrainConfig& config) {
    LocalScoreCache cache(data);
    return train(cache, config);
}

}  // namespace causalq
