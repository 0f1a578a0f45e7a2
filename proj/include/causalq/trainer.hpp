#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <vector>

#include "causalq/qmodel.hpp"
#include "causalq/rng.hpp"
#include "causalq/scoring.hpp"

namespace causalq {

struct TrainConfig {
    /// Paper convention: sample from the model's softmax with probability
    /// epsilon, uniformly over feasible actions otherwise.
    double epsilon = 0.5;
    int episodes = 4000;
    int batch_size = 64;
    double learning_rate = 1e-3;
    std::size_t buffer_capacity = 100000;
    /// Gradient passes over every layer after each rollout.
    int updates_per_episode = 4;
    std::uint64_t seed = 0;

    std::vector<int> hidden{128, 128};
    double clip_norm = 1e3;
    bool tabular = false;

    /// Mean-loss ceiling. Armed once the running mean first drops below
    /// the ceiling; the very first updates start above it because the
    /// targets are BIC sums of magnitude ~n*d.
    double divergence_threshold = 1e6;

    void validate() const;
};

/// FIFO ring of transitions with per-layer index queues so layer-restricted
/// sampling stays O(1) per draw.
class ReplayBuffer {
public:
    ReplayBuffer(int num_vars, std::size_t capacity);

    void push(const Transition& t);
    std::size_t size() const { return storage_.size(); }
    std::size_t capacity() const { return capacity_; }
    int num_vars() const { return num_vars_; }

    std::size_t layer_count(int state_layer) const;
    /// i-th oldest stored transition whose state sits at `state_layer`.
    const Transition& at_layer(int state_layer, std::size_t i) const;

private:
    int num_vars_;
    std::size_t capacity_;
    std::uint64_t first_seq_ = 0;
    std::deque<Transition> storage_;
    std::vector<std::deque<std::uint64_t>> layer_seqs_;
};

/// Uniform draws with replacement, restricted to one layer.
std::vector<Transition> buffer_sample(const ReplayBuffer& buffer, int state_layer, int count,
                                      Rng& rng);

/// One Q-model per order-graph layer: model k serves states with
/// layer(s) = k (the paper's 1-based layer k+1).
class LayeredQModels {
public:
    LayeredQModels() = default;
    LayeredQModels(const LayeredQModels& other);
    LayeredQModels& operator=(const LayeredQModels& other);
    LayeredQModels(LayeredQModels&&) = default;
    LayeredQModels& operator=(LayeredQModels&&) = default;

    static LayeredQModels make_mlp(int num_vars, const MlpOptions& base, std::uint64_t seed);
    static LayeredQModels make_tabular(int num_vars);

    int num_vars() const { return num_vars_; }
    bool empty() const { return models_.empty(); }

    QModel& layer_model(int state_layer);
    const QModel& layer_model(int state_layer) const;

    /// Accessor used on the evaluation path; records (model, state layer)
    /// pairs when instrumented so the layer-separation invariant is
    /// checkable from tests.
    const QModel& eval_model(const State& s) const;

    void set_instrument(bool on) const { instrument_ = on; evaluations_.clear(); }
    const std::vector<std::pair<int, int>>& instrument_log() const { return evaluations_; }

private:
    int num_vars_ = 0;
    std::vector<std::unique_ptr<QModel>> models_;
    mutable bool instrument_ = false;
    mutable std::vector<std::pair<int, int>> evaluations_;
};

std::string layered_models_to_json(const LayeredQModels& models);
LayeredQModels layered_models_from_json(const std::string& text);

/// Picks an action from the softmax distribution with probability epsilon,
/// uniformly over the feasible actions otherwise.
int epsilon_greedy_pick(const TransitionDistribution& dist, double epsilon, Rng& rng);

/// One s_0 -> s_d walk; every transition (with its cached log reward) goes
/// into the buffer. Returns the ordering traced.
Ordering rollout(const LayeredQModels& models, const LocalScoreCache& cache, ReplayBuffer& buffer,
                 double epsilon, Rng& rng);

/// Bootstrapped regression target: log R(a) at the terminal step, else
/// log R(a) + logsumexp of the next layer's masked outputs.
double target_value(const Transition& t, const QModel* next_model);

struct EpisodeStats {
    int episode = 0;
    std::vector<double> layer_loss;  // mean loss per layer over this episode's updates
    double epsilon = 0.0;
    std::size_t buffer_size = 0;
};

struct TrainResult {
    LayeredQModels models;
    std::vector<EpisodeStats> log;
};

TrainResult train(const LocalScoreCache& cache, const TrainConfig& config);
TrainResult train(const Dataset& data, const TrainConfig& config);

}  // namespace causalq
