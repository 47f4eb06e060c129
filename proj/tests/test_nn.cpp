#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <unistd.h>
#include <vector>

#include "mtcsim/ioutil.hpp"
#include "mtcsim/nn.hpp"
#include "mtcsim/rng.hpp"

using namespace mtcsim;

namespace {

// Reference forward pass written independently of the production kernels.
std::vector<double> naive_forward(const Mlp& net, std::vector<double> x) {
    for (int layer = 0; layer < net.layer_count(); ++layer) {
        const int in = net.dims()[static_cast<std::size_t>(layer)];
        const int out = net.dims()[static_cast<std::size_t>(layer) + 1];
        const auto w = net.weight(layer);
        const auto b = net.bias(layer);
        std::vector<double> y(static_cast<std::size_t>(out));
        for (int r = 0; r < out; ++r) {
            double acc = b[static_cast<std::size_t>(r)];
            for (int c = 0; c < in; ++c)
                acc += w[static_cast<std::size_t>(r * in + c)] *
                       x[static_cast<std::size_t>(c)];
            y[static_cast<std::size_t>(r)] = acc;
        }
        if (layer + 1 < net.layer_count())
            for (auto& v : y) v = v > 0.0 ? v : 0.0;
        x = std::move(y);
    }
    return x;
}

double batch_loss(const Mlp& net, std::span<const double> states, int batch,
                  std::span<const int> actions, std::span<const double> targets) {
    const auto in = static_cast<std::size_t>(net.input_size());
    double loss = 0.0;
    for (int i = 0; i < batch; ++i) {
        const std::vector<double> s(states.begin() + static_cast<std::ptrdiff_t>(i * in),
                                    states.begin() + static_cast<std::ptrdiff_t>((i + 1) * in));
        const auto q = net.forward(s);
        const double err = targets[static_cast<std::size_t>(i)] -
                           q[static_cast<std::size_t>(actions[static_cast<std::size_t>(i)])];
        loss += err * err;
    }
    return loss / batch;
}

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() /
           (std::string("mtcsim_nn_") + name + "_" + std::to_string(::getpid()));
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("zero network outputs zeros") {
    Mlp net({4, 6, 2});
    Rng rng(73);
    for (int i = 0; i < 10; ++i) {
        std::vector<double> x(4);
        for (auto& v : x) v = rng.uniform(-3.0, 3.0);
        for (double q : net.forward(x)) CHECK(q == 0.0);
    }
}

TEST_CASE("forward matches an independent reference") {
    Rng rng(79);
    for (auto dims : {std::vector<int>{3, 4, 2}, std::vector<int>{11, 150, 100, 2}}) {
        auto net = Mlp::fan_in_init(dims, rng);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> x(static_cast<std::size_t>(dims.front()));
            for (auto& v : x) v = rng.uniform(-1.5, 1.5);
            const auto got = net.forward(x);
            const auto expect = naive_forward(net, x);
            REQUIRE(got.size() == expect.size());
            for (std::size_t i = 0; i < got.size(); ++i)
                CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("initialization scales with fan-in and zeroes biases") {
    Rng rng(83);
    const std::vector<int> dims = {11, 150, 100, 2};
    auto net = Mlp::fan_in_init(dims, rng);
    for (int layer = 0; layer < net.layer_count(); ++layer) {
        const double bound = 1.0 / std::sqrt(dims[static_cast<std::size_t>(layer)]);
        for (double w : net.weight(layer)) {
            CHECK(std::abs(w) <= bound);
        }
        for (double b : net.bias(layer)) CHECK(b == 0.0);
    }
    // not degenerate
    double max_abs = 0.0;
    for (double w : net.weight(0)) max_abs = std::max(max_abs, std::abs(w));
    CHECK(max_abs > 0.0);

    Rng r1(99), r2(99);
    auto a = Mlp::fan_in_init({3, 5, 2}, r1);
    auto b = Mlp::fan_in_init({3, 5, 2}, r2);
    CHECK(std::memcmp(a.parameters().data(), b.parameters().data(),
                      a.parameter_count() * sizeof(double)) == 0);
}

TEST_CASE("gradient is zero when predictions hit their targets") {
    Rng rng(89);
    auto net = Mlp::fan_in_init({3, 5, 2}, rng);
    const int batch = 4;
    std::vector<double> states(3 * batch);
    for (auto& s : states) s = rng.uniform(-1.0, 1.0);
    std::vector<int> actions = {0, 1, 0, 1};
    std::vector<double> targets(batch);
    for (int i = 0; i < batch; ++i) {
        const std::vector<double> s(states.begin() + i * 3, states.begin() + (i + 1) * 3);
        targets[static_cast<std::size_t>(i)] =
            net.forward(s)[static_cast<std::size_t>(actions[static_cast<std::size_t>(i)])];
    }
    std::vector<double> grad(net.parameter_count(), 1.0);
    Mlp::Workspace ws;
    const double loss = mse_backward(net, states, batch, actions, targets, grad, ws);
    CHECK(loss == doctest::Approx(0.0).epsilon(1e-18));
    for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("batch gradient averages the per-sample gradients") {
    Rng rng(97);
    auto net = Mlp::fan_in_init({3, 4, 2}, rng);
    std::vector<double> states(6);
    for (auto& s : states) s = rng.uniform(-1.0, 1.0);
    const std::vector<int> actions = {1, 0};
    const std::vector<double> targets = {0.7, -0.3};

    Mlp::Workspace ws;
    std::vector<double> g_batch(net.parameter_count());
    mse_backward(net, states, 2, actions, targets, g_batch, ws);

    std::vector<double> g0(net.parameter_count()), g1(net.parameter_count());
    mse_backward(net, std::span<const double>(states).first(3), 1,
                 std::span<const int>(actions).first(1),
                 std::span<const double>(targets).first(1), g0, ws);
    mse_backward(net, std::span<const double>(states).last(3), 1,
                 std::span<const int>(actions).last(1),
                 std::span<const double>(targets).last(1), g1, ws);

    for (std::size_t i = 0; i < g_batch.size(); ++i)
        CHECK(g_batch[i] == doctest::Approx(0.5 * (g0[i] + g1[i])).epsilon(1e-12));
}

TEST_CASE("unselected output heads receive no error signal") {
    Rng rng(101);
    auto net = Mlp::fan_in_init({3, 4, 2}, rng);
    std::vector<double> state = {0.3, -0.8, 0.5};
    const std::vector<int> actions = {0};
    const std::vector<double> targets = {1.0};
    std::vector<double> grad(net.parameter_count());
    Mlp::Workspace ws;
    mse_backward(net, state, 1, actions, targets, grad, ws);

    // the last layer's row for the untouched head sits after head 0's row
    const int last = net.layer_count() - 1;
    const int in = net.dims()[static_cast<std::size_t>(last)];
    const auto w_span = net.weight(last);
    const auto grad_w_offset = static_cast<std::size_t>(
        w_span.data() - net.parameters().data());
    for (int c = 0; c < in; ++c)
        CHECK(grad[grad_w_offset + static_cast<std::size_t>(in + c)] == 0.0);
}

TEST_CASE("gradient matches central finite differences") {
    Rng rng(103);
    auto net = Mlp::fan_in_init({3, 5, 2}, rng);
    const int batch = 5;
    std::vector<double> states(3 * batch);
    for (auto& s : states) s = rng.uniform(-1.0, 1.0);
    std::vector<int> actions(batch);
    std::vector<double> targets(batch);
    for (int i = 0; i < batch; ++i) {
        actions[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(2));
        targets[static_cast<std::size_t>(i)] = rng.uniform(-1.0, 1.0);
    }

    std::vector<double> grad(net.parameter_count());
    Mlp::Workspace ws;
    mse_backward(net, states, batch, actions, targets, grad, ws);

    const double h = 1e-5;
    auto params = net.parameters();
    for (std::size_t p = 0; p < net.parameter_count(); ++p) {
        const double saved = params[p];
        params[p] = saved + h;
        const double up = batch_loss(net, states, batch, actions, targets);
        params[p] = saved - h;
        const double down = batch_loss(net, states, batch, actions, targets);
        params[p] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(fd), std::abs(grad[p]), 1e-4});
        CHECK(std::abs(fd - grad[p]) / denom < 1e-4);
    }
}

TEST_CASE("zero gradient leaves parameters untouched") {
    Rng rng(107);
    auto net = Mlp::fan_in_init({3, 4, 2}, rng);
    const std::vector<double> before(net.parameters().begin(), net.parameters().end());
    AdamOptimizer opt(AdamConfig{}, net.parameter_count());
    const std::vector<double> zeros(net.parameter_count(), 0.0);
    opt.step(net, zeros);
    opt.step(net, zeros);
    CHECK(opt.step_count() == 2);
    for (std::size_t i = 0; i < before.size(); ++i)
        CHECK(net.parameters()[i] == before[i]);
}

TEST_CASE("optimizer drives a quadratic to its minimum") {
    // grad wrt the single weight is 2w; the bias entry gets no gradient
    Mlp net({1, 1});
    net.parameters()[0] = 1.0;
    AdamConfig cfg;
    cfg.learning_rate = 5e-3;
    AdamOptimizer opt(cfg, net.parameter_count());
    std::vector<double> grad(2, 0.0);
    int steps = 0;
    for (; steps < 2000; ++steps) {
        if (std::abs(net.parameters()[0]) < 1e-2) break;
        grad[0] = 2.0 * net.parameters()[0];
        opt.step(net, grad);
    }
    CHECK(std::abs(net.parameters()[0]) < 1e-2);
    CHECK(steps < 2000);
}

TEST_CASE("optimizer trajectories are reproducible") {
    auto run = []() {
        Rng rng(113);
        auto net = Mlp::fan_in_init({2, 3, 1}, rng);
        AdamOptimizer opt(AdamConfig{}, net.parameter_count());
        std::vector<double> grad(net.parameter_count());
        for (int i = 0; i < 50; ++i) {
            for (std::size_t j = 0; j < grad.size(); ++j)
                grad[j] = 0.01 * static_cast<double>(j % 5) - 0.02;
            opt.step(net, grad);
        }
        return std::vector<double>(net.parameters().begin(), net.parameters().end());
    };
    CHECK(run() == run());
}

TEST_CASE("non-finite gradients are rejected") {
    Mlp net({2, 2});
    AdamOptimizer opt(AdamConfig{}, net.parameter_count());
    std::vector<double> grad(net.parameter_count(), 0.0);
    grad[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(opt.step(net, grad), std::runtime_error);
}

TEST_CASE("a parameter copy is a frozen snapshot") {
    Rng rng(127);
    auto net = Mlp::fan_in_init({3, 4, 2}, rng);
    Mlp frozen = net;

    std::vector<double> x = {0.2, -0.4, 0.9};
    CHECK(net.forward(x) == frozen.forward(x));

    AdamOptimizer opt(AdamConfig{.learning_rate = 0.1}, net.parameter_count());
    std::vector<double> grad(net.parameter_count(), 0.5);
    const auto frozen_before = frozen.forward(x);
    opt.step(net, grad);
    CHECK(net.forward(x) != frozen_before);
    CHECK(frozen.forward(x) == frozen_before);
}

TEST_CASE("checkpoints round-trip bit for bit") {
    Rng rng(131);
    auto net = Mlp::fan_in_init({11, 150, 100, 2}, rng);
    const auto path = temp_file("roundtrip").string();
    save_checkpoint(net, path);
    const auto loaded = load_checkpoint(path);
    CHECK(loaded.dims() == net.dims());
    REQUIRE(loaded.parameter_count() == net.parameter_count());
    CHECK(std::memcmp(loaded.parameters().data(), net.parameters().data(),
                      net.parameter_count() * sizeof(double)) == 0);
    std::filesystem::remove(path);
}

TEST_CASE("corrupt checkpoints are rejected") {
    const auto path = temp_file("corrupt").string();

    atomic_write_file(path, "definitely not a checkpoint");
    CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);

    // valid header, truncated payload
    Mlp net({2, 2});
    save_checkpoint(net, path);
    const auto full = read_file(path);
    atomic_write_file(path, full.substr(0, full.size() - 3));
    CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);

    CHECK_THROWS_AS(load_checkpoint(path + ".does_not_exist"), std::runtime_error);
    std::filesystem::remove(path);
}

}  // TEST_SUITE
