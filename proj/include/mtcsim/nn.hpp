#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mtcsim/rng.hpp"

namespace mtcsim {

// Fully connected network, ReLU on hidden layers, linear output. Parameters
// live in one flat vector (per layer: row-major weights, then biases) so the
// optimizer and checkpoints can treat the whole network as a single array.
class Mlp {
public:
    Mlp() = default;
    explicit Mlp(std::vector<int> dims);  // zero-initialized

    static Mlp fan_in_init(std::vector<int> dims, Rng& rng);

    const std::vector<int>& dims() const { return dims_; }
    int input_size() const { return dims_.front(); }
    int output_size() const { return dims_.back(); }
    int layer_count() const { return static_cast<int>(dims_.size()) - 1; }
    std::size_t parameter_count() const { return params_.size(); }

    std::span<double> parameters() { return params_; }
    std::span<const double> parameters() const { return params_; }
    std::span<double> weight(int layer);
    std::span<const double> weight(int layer) const;
    std::span<double> bias(int layer);
    std::span<const double> bias(int layer) const;

    void forward(std::span<const double> input, std::span<double> output) const;
    std::vector<double> forward(std::span<const double> input) const;

    // Scratch for forward/backward over a batch: every layer's
    // pre-activations and activations, laid out per sample.
    struct Workspace {
        std::vector<double> pre;   // concatenated per layer
        std::vector<double> act;   // likewise, including the input copy
    };

private:
    std::vector<int> dims_;
    std::vector<double> params_;
    std::vector<std::size_t> weight_offsets_;
    std::vector<std::size_t> bias_offsets_;

    friend double mse_backward(const Mlp&, std::span<const double>, int,
                               std::span<const int>, std::span<const double>,
                               std::span<double>, Mlp::Workspace&);
};

// Batch gradient of L = (1/M) * sum_i (targets[i] - Q(states_i)[actions[i]])^2
// with respect to every parameter. Output heads not selected by actions[i]
// receive no error signal. Returns the loss. `states` is batch-major with
// net.input_size() values per sample; `grad` must hold parameter_count()
// values and is overwritten.
double mse_backward(const Mlp& net, std::span<const double> states, int batch,
                    std::span<const int> actions, std::span<const double> targets,
                    std::span<double> grad, Mlp::Workspace& ws);

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

class AdamOptimizer {
public:
    AdamOptimizer(AdamConfig cfg, std::size_t parameter_count);

    // One update. Throws std::runtime_error if the gradient or the updated
    // parameters contain a non-finite value.
    void step(Mlp& net, std::span<const double> grad);

    std::uint64_t step_count() const { return steps_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::uint64_t steps_ = 0;
};

// Binary checkpoint: magic, layer dims, raw little-endian doubles.
void save_checkpoint(const Mlp& net, const std::string& path);
Mlp load_checkpoint(const std::string& path);

}  // namespace mtcsim
