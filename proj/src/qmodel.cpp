#include "causalq/qmodel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <omp.h>
#include <json.hpp>

namespace causalq {

MaskedQVector forward_masked(const QModel& model, const State& s) {
    if (model.num_vars() != s.num_vars)
        throw DimensionMismatch("forward_masked: model width " + std::to_string(model.num_vars()) +
                                " does not match state width " + std::to_string(s.num_vars));
    MaskedQVector q{s, model.forward(s)};
    for (int a = 0; a < s.num_vars; ++a)
        if (s.contains(a)) q.values[a] = kActionMask;
    return q;
}

TransitionDistribution transition_distribution(const MaskedQVector& q) {
    const State& s = q.state;
    if (layer(s) >= s.num_vars)
        throw NoFeasibleAction("transition_distribution: every action is masked");
    double max_v = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < s.num_vars; ++a)
        if (!s.contains(a)) max_v = std::max(max_v, q.values[a]);
    double sum = 0.0;
    for (int a = 0; a < s.num_vars; ++a) sum += std::exp(q.values[a] - max_v);
    TransitionDistribution dist{s, std::vector<double>(s.num_vars, 0.0)};
    for (int a = 0; a < s.num_vars; ++a) dist.probs[a] = std::exp(q.values[a] - max_v) / sum;
    return dist;
}

// ---------------------------------------------------------------------------
// MlpQModel

MlpQModel::MlpQModel(int num_vars, MlpOptions opts) : num_vars_(num_vars), opts_(std::move(opts)) {
    if (num_vars < 1) throw DimensionMismatch("MlpQModel: need at least one variable");
    std::vector<int> widths;
    widths.push_back(num_vars);
    for (int h : opts_.hidden) {
        if (h < 1) throw ConfigError("MlpQModel: hidden width must be positive");
        widths.push_back(h);
    }
    widths.push_back(num_vars);

    std::mt19937_64 rng(opts_.seed);
    std::uniform_real_distribution<double> init(-0.1, 0.1);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        Layer layer;
        layer.in = widths[l];
        layer.out = widths[l + 1];
        layer.weights.resize(static_cast<std::size_t>(layer.in) * layer.out);
        for (double& w : layer.weights) w = init(rng);
        const bool output_layer = (l + 2 == widths.size());
        layer.biases.assign(layer.out, 0.0);
        if (!output_layer)
            for (double& b : layer.biases) b = init(rng);
        layers_.push_back(std::move(layer));
    }
}

void MlpQModel::forward_layers(const std::vector<double>& input,
                               std::vector<std::vector<double>>& activations) const {
    activations.resize(layers_.size() + 1);
    activations[0] = input;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const Layer& layer = layers_[l];
        const auto& h = activations[l];
        auto& out = activations[l + 1];
        out.assign(layer.out, 0.0);
        const bool last = (l + 1 == layers_.size());
        for (int i = 0; i < layer.out; ++i) {
            double z = layer.biases[i];
            const double* row = layer.weights.data() + static_cast<std::size_t>(i) * layer.in;
            for (int j = 0; j < layer.in; ++j) z += row[j] * h[j];
            out[i] = last ? z : std::tanh(z);
        }
    }
}

std::vector<double> MlpQModel::forward(const State& s) const {
    if (s.num_vars != num_vars_) throw DimensionMismatch("MlpQModel::forward: state width mismatch");
    return forward_input(state_vector(s));
}

std::vector<double> MlpQModel::forward_input(const std::vector<double>& input) const {
    if (static_cast<int>(input.size()) != num_vars_)
        throw DimensionMismatch("MlpQModel::forward: input width mismatch");
    std::vector<std::vector<double>> activations;
    forward_layers(input, activations);
    return activations.back();
}

void MlpQModel::accumulate_gradient(const State& state, int action, double target, double inv_m,
                                    std::vector<Layer>& grad, double& loss_acc) const {
    std::vector<std::vector<double>> acts;
    forward_layers(state_vector(state), acts);
    const double out = acts.back()[action];
    const double err = target - out;
    loss_acc += inv_m * err * err;

    // Output delta touches only the selected action's entry.
    std::vector<double> delta(layers_.back().out, 0.0);
    delta[action] = -2.0 * inv_m * err;

    for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
        const Layer& layer = layers_[l];
        Layer& g = grad[l];
        const auto& h = acts[l];
        for (int i = 0; i < layer.out; ++i) {
            const double di = delta[i];
            if (di == 0.0) continue;
            double* grow = g.weights.data() + static_cast<std::size_t>(i) * layer.in;
            for (int j = 0; j < layer.in; ++j) grow[j] += di * h[j];
            g.biases[i] += di;
        }
        if (l == 0) break;
        std::vector<double> prev(layer.in, 0.0);
        for (int i = 0; i < layer.out; ++i) {
            const double di = delta[i];
            if (di == 0.0) continue;
            const double* row = layer.weights.data() + static_cast<std::size_t>(i) * layer.in;
            for (int j = 0; j < layer.in; ++j) prev[j] += di * row[j];
        }
        // tanh'(z) expressed through the activation itself
        for (int j = 0; j < layer.in; ++j) prev[j] *= 1.0 - acts[l][j] * acts[l][j];
        delta = std::move(prev);
    }
}

std::vector<double> MlpQModel::loss_gradient(const std::vector<State>& states,
                                             const std::vector<int>& actions,
                                             const std::vector<double>& targets) const {
    const std::size_t m = states.size();
    std::vector<Layer> grad = layers_;
    for (auto& g : grad) {
        std::fill(g.weights.begin(), g.weights.end(), 0.0);
        std::fill(g.biases.begin(), g.biases.end(), 0.0);
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        accumulate_gradient(states[i], actions[i], targets[i], 1.0 / static_cast<double>(m), grad,
                            loss);
    std::vector<double> flat;
    for (const auto& g : grad) {
        flat.insert(flat.end(), g.weights.begin(), g.weights.end());
        flat.insert(flat.end(), g.biases.begin(), g.biases.end());
    }
    return flat;
}

double MlpQModel::loss(const std::vector<State>& states, const std::vector<int>& actions,
                       const std::vector<double>& targets) const {
    const std::size_t m = states.size();
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double out = forward(states[i])[actions[i]];
        const double err = targets[i] - out;
        total += err * err;
    }
    return total / static_cast<double>(m);
}

double MlpQModel::fit_batch(const std::vector<State>& states, const std::vector<int>& actions,
                            const std::vector<double>& targets, double learning_rate) {
    const std::size_t m = states.size();
    if (m == 0) throw EmptyList("fit_batch: empty batch");
    if (actions.size() != m || targets.size() != m)
        throw DimensionMismatch("fit_batch: batch arrays disagree in length");
    for (double t : targets)
        if (!std::isfinite(t)) throw NonFiniteValue("fit_batch: non-finite target");
    for (std::size_t i = 0; i < m; ++i) {
        if (states[i].num_vars != num_vars_)
            throw DimensionMismatch("fit_batch: state width mismatch");
        if (actions[i] < 0 || actions[i] >= num_vars_)
            throw DimensionMismatch("fit_batch: action index out of range");
    }
    const double inv_m = 1.0 / static_cast<double>(m);

    // Fixed chunk partition with an ordered merge: the result is identical
    // whether the chunks run on one thread or many.
    const int chunks = static_cast<int>(std::min<std::size_t>(8, m));
    std::vector<std::vector<Layer>> chunk_grad(chunks);
    std::vector<double> chunk_loss(chunks, 0.0);

#pragma omp parallel for schedule(static) if (opts_.parallel && chunks > 1)
    for (int c = 0; c < chunks; ++c) {
        auto& grad = chunk_grad[c];
        grad = layers_;
        for (auto& g : grad) {
            std::fill(g.weights.begin(), g.weights.end(), 0.0);
            std::fill(g.biases.begin(), g.biases.end(), 0.0);
        }
        const std::size_t lo = m * c / chunks;
        const std::size_t hi = m * (c + 1) / chunks;
        for (std::size_t i = lo; i < hi; ++i)
            accumulate_gradient(states[i], actions[i], targets[i], inv_m, grad, chunk_loss[c]);
    }

    std::vector<Layer>& grad = chunk_grad[0];
    double loss = chunk_loss[0];
    for (int c = 1; c < chunks; ++c) {
        loss += chunk_loss[c];
        for (std::size_t l = 0; l < grad.size(); ++l) {
            for (std::size_t k = 0; k < grad[l].weights.size(); ++k)
                grad[l].weights[k] += chunk_grad[c][l].weights[k];
            for (std::size_t k = 0; k < grad[l].biases.size(); ++k)
                grad[l].biases[k] += chunk_grad[c][l].biases[k];
        }
    }

    double sq_norm = 0.0;
    for (const auto& g : grad) {
        for (double w : g.weights) sq_norm += w * w;
        for (double b : g.biases) sq_norm += b * b;
    }
    if (!std::isfinite(sq_norm))
        throw NonFiniteGradient("fit_batch: gradient diverged; reduce the learning rate");
    const double norm = std::sqrt(sq_norm);
    const double scale =
        (opts_.clip_norm > 0.0 && norm > opts_.clip_norm) ? opts_.clip_norm / norm : 1.0;

    for (std::size_t l = 0; l < layers_.size(); ++l) {
        for (std::size_t k = 0; k < layers_[l].weights.size(); ++k)
            layers_[l].weights[k] -= learning_rate * scale * grad[l].weights[k];
        for (std::size_t k = 0; k < layers_[l].biases.size(); ++k)
            layers_[l].biases[k] -= learning_rate * scale * grad[l].biases[k];
    }
    return loss;
}

std::vector<double> MlpQModel::parameters() const {
    std::vector<double> flat;
    for (const auto& layer : layers_) {
        flat.insert(flat.end(), layer.weights.begin(), layer.weights.end());
        flat.insert(flat.end(), layer.biases.begin(), layer.biases.end());
    }
    return flat;
}

void MlpQModel::set_parameters(const std::vector<double>& params) {
    std::size_t pos = 0;
    for (auto& layer : layers_) {
        if (pos + layer.weights.size() + layer.biases.size() > params.size())
            throw DimensionMismatch("set_parameters: wrong parameter count");
        std::copy_n(params.begin() + pos, layer.weights.size(), layer.weights.begin());
        pos += layer.weights.size();
        std::copy_n(params.begin() + pos, layer.biases.size(), layer.biases.begin());
        pos += layer.biases.size();
    }
    if (pos != params.size()) throw DimensionMismatch("set_parameters: wrong parameter count");
}

std::string MlpQModel::architecture() const {
    nlohmann::json j;
    j["type"] = "mlp";
    std::vector<int> widths{num_vars_};
    widths.insert(widths.end(), opts_.hidden.begin(), opts_.hidden.end());
    widths.push_back(num_vars_);
    j["widths"] = widths;
    j["activation"] = "tanh";
    return j.dump();
}

std::unique_ptr<QModel> MlpQModel::clone() const { return std::make_unique<MlpQModel>(*this); }

// ---------------------------------------------------------------------------
// TabularQModel

TabularQModel::TabularQModel(int num_vars) : num_vars_(num_vars) {
    if (num_vars < 1 || num_vars > 20)
        throw LimitExceeded("TabularQModel: 2^d table only supported up to d = 20");
    table_.assign(static_cast<std::size_t>(num_vars) << num_vars, 0.0);
}

std::vector<double> TabularQModel::forward(const State& s) const {
    if (s.num_vars != num_vars_)
        throw DimensionMismatch("TabularQModel::forward: state width mismatch");
    const double* row = table_.data() + static_cast<std::size_t>(s.members) * num_vars_;
    return std::vector<double>(row, row + num_vars_);
}

double TabularQModel::value(const State& s, int action) const {
    if (s.num_vars != num_vars_) throw DimensionMismatch("TabularQModel: state width mismatch");
    return table_[static_cast<std::size_t>(s.members) * num_vars_ + action];
}

void TabularQModel::set_value(const State& s, int action, double v) {
    if (s.num_vars != num_vars_) throw DimensionMismatch("TabularQModel: state width mismatch");
    table_[static_cast<std::size_t>(s.members) * num_vars_ + action] = v;
}

double TabularQModel::fit_batch(const std::vector<State>& states, const std::vector<int>& actions,
                                const std::vector<double>& targets, double learning_rate) {
    const std::size_t m = states.size();
    if (m == 0) throw EmptyList("fit_batch: empty batch");
    if (actions.size() != m || targets.size() != m)
        throw DimensionMismatch("fit_batch: batch arrays disagree in length");
    double loss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double err = targets[i] - value(states[i], actions[i]);
        loss += err * err;
    }
    loss /= static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!std::isfinite(targets[i])) throw NonFiniteValue("fit_batch: non-finite target");
        const double q = value(states[i], actions[i]);
        set_value(states[i], actions[i], q + learning_rate * (targets[i] - q));
    }
    return loss;
}

std::vector<double> TabularQModel::parameters() const { return table_; }

void TabularQModel::set_parameters(const std::vector<double>& params) {
    if (params.size() != table_.size())
        throw DimensionMismatch("set_parameters: wrong parameter count");
    table_ = params;
}

std::string TabularQModel::architecture() const {
    nlohmann::json j;
    j["type"] = "tabular";
    return j.dump();
}

std::unique_ptr<QModel> TabularQModel::clone() const {
    return std::make_unique<TabularQModel>(*this);
}

// ---------------------------------------------------------------------------
// Checkpoints

std::string qmodel_to_json(const QModel& model) {
    nlohmann::json j;
    j["version"] = 1;
    j["num_vars"] = model.num_vars();
    j["architecture"] = nlohmann::json::parse(model.architecture());
    if (const auto* mlp = dynamic_cast<const MlpQModel*>(&model)) {
        j["hidden"] = mlp->options().hidden;
        j["clip_norm"] = mlp->options().clip_norm;
    }
    j["params"] = model.parameters();
    return j.dump();
}

std::unique_ptr<QModel> qmodel_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model JSON: ") + e.what());
    }
    const int d = j.at("num_vars").get<int>();
    const std::string type = j.at("architecture").at("type").get<std::string>();
    std::unique_ptr<QModel> model;
    if (type == "mlp") {
        MlpOptions opts;
        opts.hidden = j.at("hidden").get<std::vector<int>>();
        opts.clip_norm = j.value("clip_norm", opts.clip_norm);
        model = std::make_unique<MlpQModel>(d, opts);
    } else if (type == "tabular") {
        model = std::make_unique<TabularQModel>(d);
    } else {
        throw ParseError("model JSON: unknown architecture '" + type + "'");
    }
    model->set_parameters(j.at("params").get<std::vector<double>>());
    return model;
}

}  // namespace causalq
