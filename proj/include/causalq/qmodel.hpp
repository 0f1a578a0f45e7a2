#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "causalq/order_graph.hpp"

namespace causalq {

/// Exact mask value for infeasible actions.
inline constexpr double kActionMask = -9e15;

/// Parametric approximator of log Q(s, .): d-length state vector in, one
/// log value per candidate action out. Forward is deterministic given the
/// parameters; fitting takes one gradient step toward scalar targets on
/// the selected-action outputs.
class QModel {
public:
    virtual ~QModel() = default;

    virtual int num_vars() const = 0;

    /// Raw (unmasked) outputs for a state.
    virtual std::vector<double> forward(const State& s) const = 0;

    /// One gradient step on (1/m) sum (target - output[action])^2.
    /// Returns the pre-step loss.
    virtual double fit_batch(const std::vector<State>& states, const std::vector<int>& actions,
                             const std::vector<double>& targets, double learning_rate) = 0;

    virtual std::vector<double> parameters() const = 0;
    virtual void set_parameters(const std::vector<double>& params) = 0;

    virtual std::string architecture() const = 0;  // descriptor, JSON text
    virtual std::unique_ptr<QModel> clone() const = 0;
};

struct MaskedQVector {
    State state;
    std::vector<double> values;  // d entries; infeasible ones are kActionMask
};

/// Model outputs with infeasible actions masked to exactly kActionMask.
MaskedQVector forward_masked(const QModel& model, const State& s);

/// Softmax with max-subtraction; masked entries underflow to probability 0.
/// Throws NoFeasibleAction when every entry is masked.
TransitionDistribution transition_distribution(const MaskedQVector& q);

struct MlpOptions {
    std::vector<int> hidden{128, 128};
    /// Gradient L2-norm clip. BIC-scale targets need roomy clipping; see
    /// fit_batch.
    double clip_norm = 1e3;
    std::uint64_t seed = 0;
    /// Run the fixed gradient chunks across threads. The chunk partition
    /// and merge order never change, so this is purely a speed knob.
    bool parallel = true;
};

/// Fully connected network: widths [d, hidden..., d], tanh on hidden
/// layers, linear output. Hand-written backpropagation, plain gradient
/// descent with gradient-norm clipping. Weights start uniform in
/// [-0.1, 0.1]; output biases start at zero.
class MlpQModel : public QModel {
public:
    MlpQModel(int num_vars, MlpOptions opts = {});

    int num_vars() const override { return num_vars_; }
    std::vector<double> forward(const State& s) const override;
    std::vector<double> forward_input(const std::vector<double>& input) const;
    double fit_batch(const std::vector<State>& states, const std::vector<int>& actions,
                     const std::vector<double>& targets, double learning_rate) override;
    std::vector<double> parameters() const override;
    void set_parameters(const std::vector<double>& params) override;
    std::string architecture() const override;
    std::unique_ptr<QModel> clone() const override;

    const MlpOptions& options() const { return opts_; }
    void set_parallel(bool on) { opts_.parallel = on; }

    /// Gradient of the batch loss at the current parameters, flattened in
    /// parameter order. Used by the finite-difference checks.
    std::vector<double> loss_gradient(const std::vector<State>& states,
                                      const std::vector<int>& actions,
                                      const std::vector<double>& targets) const;
    double loss(const std::vector<State>& states, const std::vector<int>& actions,
                const std::vector<double>& targets) const;

private:
    struct Layer {
        std::vector<double> weights;  // out x in, row-major
        std::vector<double> biases;
        int in = 0, out = 0;
    };

    void forward_layers(const std::vector<double>& input,
                        std::vector<std::vector<double>>& activations) const;
    void accumulate_gradient(const State& state, int action, double target, double inv_m,
                             std::vector<Layer>& grad, double& loss_acc) const;

    int num_vars_;
    MlpOptions opts_;
    std::vector<Layer> layers_;
};

/// One stored value per (state, action); exactness harness for small d.
/// fit_batch applies q += lr * (target - q) per sample in batch order, so
/// lr = 1 writes the target through exactly.
class TabularQModel : public QModel {
public:
    explicit TabularQModel(int num_vars);

    int num_vars() const override { return num_vars_; }
    std::vector<double> forward(const State& s) const override;
    double fit_batch(const std::vector<State>& states, const std::vector<int>& actions,
                     const std::vector<double>& targets, double learning_rate) override;
    std::vector<double> parameters() const override;
    void set_parameters(const std::vector<double>& params) override;
    std::string architecture() const override;
    std::unique_ptr<QModel> clone() const override;

    double value(const State& s, int action) const;
    void set_value(const State& s, int action, double v);

private:
    int num_vars_;
    std::vector<double> table_;  // (1 << d) * d
};

/// Checkpoint I/O. The JSON round trip reproduces forward outputs exactly
/// (doubles are serialized shortest-round-trip).
std::string qmodel_to_json(const QModel& model);
std::unique_ptr<QModel> qmodel_from_json(const std::string& text);

}  // namespace causalq
