#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "mtcsim/kernels.hpp"
#include "mtcsim/rng.hpp"

namespace k = mtcsim::kernels;
using mtcsim::Rng;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-2.0, 2.0);
    return v;
}

// Restores whatever backend was active when the test started.
struct BackendGuard {
    k::Backend saved = k::active_backend();
    ~BackendGuard() { k::set_backend(saved); }
};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar reference matches naive loops") {
    BackendGuard guard;
    REQUIRE(k::set_backend(k::Backend::Scalar));
    Rng rng(101);
    for (std::size_t n : {std::size_t{1}, std::size_t{3}, std::size_t{17}, std::size_t{64}}) {
        const auto a = random_vec(rng, n);
        const auto b = random_vec(rng, n);
        double expect = 0.0;
        for (std::size_t i = 0; i < n; ++i) expect += a[i] * b[i];
        CHECK(k::dot(a.data(), b.data(), n) == doctest::Approx(expect).epsilon(1e-14));

        auto y = random_vec(rng, n);
        auto y2 = y;
        k::axpy(0.7, a.data(), y.data(), n);
        for (std::size_t i = 0; i < n; ++i) y2[i] += 0.7 * a[i];
        for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == doctest::Approx(y2[i]));
    }

    const std::size_t rows = 3, cols = 5;
    const auto w = random_vec(rng, rows * cols);
    const auto x = random_vec(rng, cols);
    const auto bias = random_vec(rng, rows);
    std::vector<double> y(rows);
    k::matvec(w.data(), rows, cols, x.data(), bias.data(), y.data());
    for (std::size_t r = 0; r < rows; ++r) {
        double expect = bias[r];
        for (std::size_t c = 0; c < cols; ++c) expect += w[r * cols + c] * x[c];
        CHECK(y[r] == doctest::Approx(expect).epsilon(1e-14));
    }
}

TEST_CASE("relu and its backward mask") {
    BackendGuard guard;
    REQUIRE(k::set_backend(k::Backend::Scalar));
    std::vector<double> x = {-1.5, 0.0, 2.5, -0.001, 7.0};
    k::relu(x.data(), x.size());
    CHECK(x == std::vector<double>{0.0, 0.0, 2.5, 0.0, 7.0});

    const std::vector<double> pre = {-1.0, 0.5, 0.0, 3.0};
    std::vector<double> grad = {10.0, 10.0, 10.0, 10.0};
    k::relu_backward(pre.data(), grad.data(), grad.size());
    CHECK(grad == std::vector<double>{0.0, 10.0, 0.0, 10.0});
}

TEST_CASE("every supported backend agrees with the scalar reference") {
    BackendGuard guard;
    Rng rng(202);
    // sizes chosen to exercise vector bodies and scalar tails
    const std::vector<std::size_t> sizes = {1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 100};

    for (auto backend : k::supported_backends()) {
        CAPTURE(k::backend_name(backend));
        for (auto n : sizes) {
            const auto a = random_vec(rng, n);
            const auto b = random_vec(rng, n);

            REQUIRE(k::set_backend(k::Backend::Scalar));
            const double dot_ref = k::dot(a.data(), b.data(), n);
            auto y_ref = b;
            k::axpy(1.3, a.data(), y_ref.data(), n);
            auto r_ref = a;
            k::relu(r_ref.data(), n);
            auto g_ref = b;
            k::relu_backward(a.data(), g_ref.data(), n);

            REQUIRE(k::set_backend(backend));
            CHECK(k::dot(a.data(), b.data(), n) ==
                  doctest::Approx(dot_ref).epsilon(1e-12));
            auto y = b;
            k::axpy(1.3, a.data(), y.data(), n);
            for (std::size_t i = 0; i < n; ++i)
                CHECK(y[i] == doctest::Approx(y_ref[i]).epsilon(1e-12));
            auto r = a;
            k::relu(r.data(), n);
            CHECK(r == r_ref);
            auto g = b;
            k::relu_backward(a.data(), g.data(), n);
            CHECK(g == g_ref);
        }

        // matvec with a non-multiple-of-lane width
        const std::size_t rows = 7, cols = 13;
        const auto w = random_vec(rng, rows * cols);
        const auto x = random_vec(rng, cols);
        const auto bias = random_vec(rng, rows);
        std::vector<double> y_ref(rows), y(rows);
        REQUIRE(k::set_backend(k::Backend::Scalar));
        k::matvec(w.data(), rows, cols, x.data(), bias.data(), y_ref.data());
        REQUIRE(k::set_backend(backend));
        k::matvec(w.data(), rows, cols, x.data(), bias.data(), y.data());
        for (std::size_t r = 0; r < rows; ++r)
            CHECK(y[r] == doctest::Approx(y_ref[r]).epsilon(1e-12));
    }
}

TEST_CASE("adam_step agrees across backends") {
    BackendGuard guard;
    Rng rng(303);
    for (auto backend : k::supported_backends()) {
        CAPTURE(k::backend_name(backend));
        const std::size_t n = 37;
        const auto grad = random_vec(rng, n);
        auto p_ref = random_vec(rng, n);
        auto m_ref = random_vec(rng, n);
        auto v_ref = random_vec(rng, n);
        for (auto& x : v_ref) x = std::abs(x);
        auto p = p_ref, m = m_ref, v = v_ref;

        REQUIRE(k::set_backend(k::Backend::Scalar));
        k::adam_step(p_ref.data(), m_ref.data(), v_ref.data(), grad.data(), n, 1e-3,
                     0.9, 0.999, 1e-8, 0.1, 0.001999);
        REQUIRE(k::set_backend(backend));
        k::adam_step(p.data(), m.data(), v.data(), grad.data(), n, 1e-3, 0.9, 0.999,
                     1e-8, 0.1, 0.001999);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(p[i] == doctest::Approx(p_ref[i]).epsilon(1e-12));
            CHECK(m[i] == doctest::Approx(m_ref[i]).epsilon(1e-12));
            CHECK(v[i] == doctest::Approx(v_ref[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("all_finite flags every non-finite position") {
    BackendGuard guard;
    for (auto backend : k::supported_backends()) {
        CAPTURE(k::backend_name(backend));
        REQUIRE(k::set_backend(backend));
        std::vector<double> x(21, 1.0);
        CHECK(k::all_finite(x.data(), x.size()));
        for (std::size_t pos : {std::size_t{0}, std::size_t{10}, std::size_t{20}}) {
            auto bad = x;
            bad[pos] = std::numeric_limits<double>::quiet_NaN();
            CHECK_FALSE(k::all_finite(bad.data(), bad.size()));
            bad[pos] = std::numeric_limits<double>::infinity();
            CHECK_FALSE(k::all_finite(bad.data(), bad.size()));
            bad[pos] = -std::numeric_limits<double>::infinity();
            CHECK_FALSE(k::all_finite(bad.data(), bad.size()));
        }
    }
}

TEST_CASE("backend switching reports support honestly") {
    BackendGuard guard;
    CHECK(k::backend_supported(k::Backend::Scalar));
    for (auto backend : k::supported_backends()) {
        CHECK(k::backend_supported(backend));
        CHECK(k::set_backend(backend));
        CHECK(k::active_backend() == backend);
    }
}

}  // TEST_SUITE
