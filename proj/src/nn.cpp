#include "mtcsim/nn.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "mtcsim/ioutil.hpp"
#include "mtcsim/kernels.hpp"

namespace mtcsim {

namespace {

void check_dims(const std::vector<int>& dims) {
    if (dims.size() < 2)
        throw std::invalid_argument("network needs an input and an output layer");
    for (int d : dims)
        if (d <= 0) throw std::invalid_argument("layer sizes must be positive");
}

}  // namespace

Mlp::Mlp(std::vector<int> dims) : dims_(std::move(dims)) {
    check_dims(dims_);
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        weight_offsets_.push_back(total);
        total += static_cast<std::size_t>(dims_[l]) * static_cast<std::size_t>(dims_[l + 1]);
        bias_offsets_.push_back(total);
        total += static_cast<std::size_t>(dims_[l + 1]);
    }
    params_.assign(total, 0.0);
}

Mlp Mlp::fan_in_init(std::vector<int> dims, Rng& rng) {
    Mlp net(std::move(dims));
    for (int l = 0; l < net.layer_count(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(net.dims_[static_cast<std::size_t>(l)]));
        for (double& w : net.weight(l)) w = rng.uniform(-bound, bound);
        // biases stay zero
    }
    return net;
}

std::span<double> Mlp::weight(int layer) {
    const auto l = static_cast<std::size_t>(layer);
    const auto n = static_cast<std::size_t>(dims_[l]) * static_cast<std::size_t>(dims_[l + 1]);
    return {params_.data() + weight_offsets_[l], n};
}

std::span<const double> Mlp::weight(int layer) const {
    const auto l = static_cast<std::size_t>(layer);
    const auto n = static_cast<std::size_t>(dims_[l]) * static_cast<std::size_t>(dims_[l + 1]);
    return {params_.data() + weight_offsets_[l], n};
}

std::span<double> Mlp::bias(int layer) {
    const auto l = static_cast<std::size_t>(layer);
    return {params_.data() + bias_offsets_[l], static_cast<std::size_t>(dims_[l + 1])};
}

std::span<const double> Mlp::bias(int layer) const {
    const auto l = static_cast<std::size_t>(layer);
    return {params_.data() + bias_offsets_[l], static_cast<std::size_t>(dims_[l + 1])};
}

void Mlp::forward(std::span<const double> input, std::span<double> output) const {
    if (input.size() != static_cast<std::size_t>(input_size()))
        throw std::invalid_argument("forward: input size mismatch");
    if (output.size() != static_cast<std::size_t>(output_size()))
        throw std::invalid_argument("forward: output size mismatch");
    std::vector<double> cur(input.begin(), input.end());
    std::vector<double> next;
    for (int l = 0; l < layer_count(); ++l) {
        const auto rows = static_cast<std::size_t>(dims_[static_cast<std::size_t>(l) + 1]);
        const auto cols = static_cast<std::size_t>(dims_[static_cast<std::size_t>(l)]);
        next.resize(rows);
        kernels::matvec(weight(l).data(), rows, cols, cur.data(), bias(l).data(),
                        next.data());
        if (l + 1 < layer_count()) kernels::relu(next.data(), rows);
        cur.swap(next);
    }
    std::copy(cur.begin(), cur.end(), output.begin());
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
    std::vector<double> out(static_cast<std::size_t>(output_size()));
    forward(input, out);
    return out;
}

double mse_backward(const Mlp& net, std::span<const double> states, int batch,
                    std::span<const int> actions, std::span<const double> targets,
                    std::span<double> grad, Mlp::Workspace& ws) {
    const auto& dims = net.dims_;
    const int layers = net.layer_count();
    const auto m = static_cast<std::size_t>(batch);
    if (batch <= 0) throw std::invalid_argument("mse_backward: empty batch");
    if (states.size() != m * static_cast<std::size_t>(net.input_size()))
        throw std::invalid_argument("mse_backward: states size mismatch");
    if (actions.size() != m || targets.size() != m)
        throw std::invalid_argument("mse_backward: actions/targets size mismatch");
    if (grad.size() != net.parameter_count())
        throw std::invalid_argument("mse_backward: gradient size mismatch");

    // Per-layer offsets into the workspace, batch-major inside each layer.
    std::vector<std::size_t> pre_off(static_cast<std::size_t>(layers) + 1, 0);
    std::vector<std::size_t> act_off(static_cast<std::size_t>(layers) + 2, 0);
    act_off[1] = m * static_cast<std::size_t>(dims[0]);
    for (int l = 0; l < layers; ++l) {
        const auto width = m * static_cast<std::size_t>(dims[static_cast<std::size_t>(l) + 1]);
        pre_off[static_cast<std::size_t>(l) + 1] = pre_off[static_cast<std::size_t>(l)] + width;
        act_off[static_cast<std::size_t>(l) + 2] = act_off[static_cast<std::size_t>(l) + 1] + width;
    }
    ws.pre.resize(pre_off.back());
    ws.act.resize(act_off.back());
    std::copy(states.begin(), states.end(), ws.act.begin());

    // Forward, keeping every layer's pre-activations.
    for (int l = 0; l < layers; ++l) {
        const auto rows = static_cast<std::size_t>(dims[static_cast<std::size_t>(l) + 1]);
        const auto cols = static_cast<std::size_t>(dims[static_cast<std::size_t>(l)]);
        for (std::size_t i = 0; i < m; ++i) {
            const double* in = ws.act.data() + act_off[static_cast<std::size_t>(l)] + i * cols;
            double* z = ws.pre.data() + pre_off[static_cast<std::size_t>(l)] + i * rows;
            double* a = ws.act.data() + act_off[static_cast<std::size_t>(l) + 1] + i * rows;
            kernels::matvec(net.weight(l).data(), rows, cols, in, net.bias(l).data(), z);
            std::copy(z, z + rows, a);
            if (l + 1 < layers) kernels::relu(a, rows);
        }
    }

    std::fill(grad.begin(), grad.end(), 0.0);
    const auto out_dim = static_cast<std::size_t>(net.output_size());
    double loss = 0.0;
    // delta = dL/dz for the current layer, per sample.
    std::vector<double> delta(m * out_dim, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const auto a = static_cast<std::size_t>(actions[i]);
        if (a >= out_dim)
            throw std::invalid_argument("mse_backward: action index out of range");
        const double q =
            ws.act[act_off[static_cast<std::size_t>(layers)] + i * out_dim + a];
        const double err = targets[i] - q;
        loss += err * err;
        delta[i * out_dim + a] = -2.0 * err / static_cast<double>(batch);
    }
    loss /= static_cast<double>(batch);

    std::vector<double> prev_delta;
    for (int l = layers - 1; l >= 0; --l) {
        const auto rows = static_cast<std::size_t>(dims[static_cast<std::size_t>(l) + 1]);
        const auto cols = static_cast<std::size_t>(dims[static_cast<std::size_t>(l)]);
        const auto woff = net.weight_offsets_[static_cast<std::size_t>(l)];
        const auto boff = net.bias_offsets_[static_cast<std::size_t>(l)];
        if (l > 0) prev_delta.assign(m * cols, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double* d = delta.data() + i * rows;
            const double* a_in = ws.act.data() + act_off[static_cast<std::size_t>(l)] + i * cols;
            for (std::size_t r = 0; r < rows; ++r) {
                if (d[r] == 0.0) continue;  // untouched output head, common case
                kernels::axpy(d[r], a_in, grad.data() + woff + r * cols, cols);
                grad[boff + r] += d[r];
                if (l > 0)
                    kernels::axpy(d[r], net.weight(l).data() + r * cols,
                                  prev_delta.data() + i * cols, cols);
            }
            if (l > 0) {
                const double* z_in =
                    ws.pre.data() + pre_off[static_cast<std::size_t>(l) - 1] + i * cols;
                kernels::relu_backward(z_in, prev_delta.data() + i * cols, cols);
            }
        }
        delta.swap(prev_delta);
    }
    return loss;
}

AdamOptimizer::AdamOptimizer(AdamConfig cfg, std::size_t parameter_count)
    : cfg_(cfg), m_(parameter_count, 0.0), v_(parameter_count, 0.0) {
    if (!(cfg.learning_rate > 0.0))
        throw std::invalid_argument("learning_rate must be positive");
}

void AdamOptimizer::step(Mlp& net, std::span<const double> grad) {
    if (grad.size() != m_.size())
        throw std::invalid_argument("adam step: gradient size mismatch");
    if (!kernels::all_finite(grad.data(), grad.size()))
        throw std::runtime_error("adam step: non-finite gradient");
    ++steps_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
    auto params = net.parameters();
    kernels::adam_step(params.data(), m_.data(), v_.data(), grad.data(), params.size(),
                       cfg_.learning_rate, cfg_.beta1, cfg_.beta2, cfg_.epsilon, bc1, bc2);
    if (!kernels::all_finite(params.data(), params.size()))
        throw std::runtime_error("adam step: parameters diverged");
}

namespace {

constexpr char kMagic[8] = {'M', 'T', 'C', 'Q', 'N', 'E', 'T', '1'};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
    if (pos + 4 > in.size()) throw std::runtime_error("checkpoint truncated");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + static_cast<std::size_t>(i)])) << (8 * i);
    pos += 4;
    return v;
}

}  // namespace

void save_checkpoint(const Mlp& net, const std::string& path) {
    std::string out;
    out.append(kMagic, sizeof kMagic);
    put_u32(out, static_cast<std::uint32_t>(net.dims().size()));
    for (int d : net.dims()) put_u32(out, static_cast<std::uint32_t>(d));
    for (double p : net.parameters()) {
        auto bits = std::bit_cast<std::uint64_t>(p);
        for (int i = 0; i < 8; ++i)
            out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
    }
    atomic_write_file(path, out);
}

Mlp load_checkpoint(const std::string& path) {
    const std::string in = read_file(path);
    if (in.size() < sizeof kMagic || std::memcmp(in.data(), kMagic, sizeof kMagic) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    std::size_t pos = sizeof kMagic;
    const auto n_dims = get_u32(in, pos);
    if (n_dims < 2 || n_dims > 64) throw std::runtime_error("checkpoint dims corrupt");
    std::vector<int> dims(n_dims);
    for (auto& d : dims) {
        const auto v = get_u32(in, pos);
        if (v == 0 || v > (1u << 20)) throw std::runtime_error("checkpoint dims corrupt");
        d = static_cast<int>(v);
    }
    Mlp net(dims);
    const std::size_t need = net.parameter_count() * 8;
    if (in.size() - pos != need) throw std::runtime_error("checkpoint payload size mismatch");
    auto params = net.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i * 8 + static_cast<std::size_t>(b)])) << (8 * b);
        params[i] = std::bit_cast<double>(bits);
    }
    return net;
}

}  // namespace mtcsim
