#include "mtcsim/kernels.hpp"

#include <cmath>

#include "kernels_impl.hpp"

namespace mtcsim::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += a[i] * b[i];
    }
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

void matvec_scalar(const double* w, std::size_t rows, std::size_t cols, const double* x,
                   const double* bias, double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        y[r] = dot_scalar(w + r * cols, x, cols) + bias[r];
    }
}

void relu_scalar(double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = x[i] > 0.0 ? x[i] : 0.0;
    }
}

void relu_backward_scalar(const double* pre, double* grad, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!(pre[i] > 0.0)) {
            grad[i] = 0.0;
        }
    }
}

void adam_step_scalar(double* param, double* m, double* v, const double* grad, std::size_t n,
                      double lr, double beta1, double beta2, double eps, double bias_corr1,
                      double bias_corr2) {
    for (std::size_t i = 0; i < n; ++i) {
        const double g = grad[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * (g * g);
        const double m_hat = m[i] / bias_corr1;
        const double v_hat = v[i] / bias_corr2;
        param[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
}

bool all_finite_scalar(const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i])) {
            return false;
        }
    }
    return true;
}

#if defined(MTCSIM_KERNELS_AVX2) && (defined(__x86_64__) || defined(_M_X64))
bool cpu_has_avx2() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

struct Dispatch {
    const detail::Ops* ops = nullptr;
    Backend backend = Backend::Scalar;

    Dispatch() {
        ops = &detail::scalar_ops();
#if defined(MTCSIM_KERNELS_AVX2) && (defined(__x86_64__) || defined(_M_X64))
        if (cpu_has_avx2()) {
            ops = &detail::avx2_ops();
            backend = Backend::Avx2;
        }
#endif
#if defined(MTCSIM_KERNELS_NEON)
        ops = &detail::neon_ops();
        backend = Backend::Neon;
#endif
    }
};

Dispatch& dispatch() {
    static Dispatch d;
    return d;
}

}  // namespace

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
        case Backend::Neon: return "neon";
    }
    return "unknown";
}

bool backend_supported(Backend b) {
    switch (b) {
        case Backend::Scalar:
            return true;
        case Backend::Avx2:
#if defined(MTCSIM_KERNELS_AVX2) && (defined(__x86_64__) || defined(_M_X64))
            return cpu_has_avx2();
#else
            return false;
#endif
        case Backend::Neon:
#if defined(MTCSIM_KERNELS_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

std::vector<Backend> supported_backends() {
    std::vector<Backend> out;
    for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon}) {
        if (backend_supported(b)) {
            out.push_back(b);
        }
    }
    return out;
}

Backend active_backend() { return dispatch().backend; }

bool set_backend(Backend b) {
    if (!backend_supported(b)) {
        return false;
    }
    switch (b) {
        case Backend::Scalar:
            dispatch().ops = &detail::scalar_ops();
            break;
        case Backend::Avx2:
#if defined(MTCSIM_KERNELS_AVX2)
            dispatch().ops = &detail::avx2_ops();
#endif
            break;
        case Backend::Neon:
#if defined(MTCSIM_KERNELS_NEON)
            dispatch().ops = &detail::neon_ops();
#endif
            break;
    }
    dispatch().backend = b;
    return true;
}

double dot(const double* a, const double* b, std::size_t n) {
    return dispatch().ops->dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    dispatch().ops->axpy(alpha, x, y, n);
}

void matvec(const double* w, std::size_t rows, std::size_t cols, const double* x,
            const double* bias, double* y) {
    dispatch().ops->matvec(w, rows, cols, x, bias, y);
}

void relu(double* x, std::size_t n) { dispatch().ops->relu(x, n); }

void relu_backward(const double* pre, double* grad, std::size_t n) {
    dispatch().ops->relu_backward(pre, grad, n);
}

void adam_step(double* param, double* m, double* v, const double* grad, std::size_t n, double lr,
               double beta1, double beta2, double eps, double bias_corr1, double bias_corr2) {
    dispatch().ops->adam_step(param, m, v, grad, n, lr, beta1, beta2, eps, bias_corr1,
                              bias_corr2);
}

bool all_finite(const double* x, std::size_t n) { return dispatch().ops->all_finite(x, n); }

namespace detail {

const Ops& scalar_ops() {
    static const Ops ops = {
        dot_scalar,       axpy_scalar,      matvec_scalar,    relu_scalar,
        relu_backward_scalar, adam_step_scalar, all_finite_scalar,
    };
    return ops;
}

}  // namespace detail

}  // namespace mtcsim::kernels
