// NEON variants (aarch64, 2-lane f64). Same loop structure as the AVX2 file.

#if defined(MTCSIM_KERNELS_NEON)

#include <arm_neon.h>

#include <cmath>

#include "kernels_impl.hpp"

namespace mtcsim::kernels::detail {

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    for (; i + 2 <= n; i += 2) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    }
    double s = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) {
        s += a[i] * b[i];
    }
    return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    }
    for (; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

void matvec_neon(const double* w, std::size_t rows, std::size_t cols, const double* x,
                 const double* bias, double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        y[r] = dot_neon(w + r * cols, x, cols) + bias[r];
    }
}

void relu_neon(double* x, std::size_t n) {
    const float64x2_t zero = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(x + i, vmaxq_f64(vld1q_f64(x + i), zero));
    }
    for (; i < n; ++i) {
        x[i] = x[i] > 0.0 ? x[i] : 0.0;
    }
}

void relu_backward_neon(const double* pre, double* grad, std::size_t n) {
    const float64x2_t zero = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const uint64x2_t mask = vcgtq_f64(vld1q_f64(pre + i), zero);
        const uint64x2_t g = vreinterpretq_u64_f64(vld1q_f64(grad + i));
        vst1q_f64(grad + i, vreinterpretq_f64_u64(vandq_u64(g, mask)));
    }
    for (; i < n; ++i) {
        if (!(pre[i] > 0.0)) {
            grad[i] = 0.0;
        }
    }
}

void adam_step_neon(double* param, double* m, double* v, const double* grad, std::size_t n,
                    double lr, double beta1, double beta2, double eps, double bias_corr1,
                    double bias_corr2) {
    const float64x2_t vb1 = vdupq_n_f64(beta1);
    const float64x2_t vb1c = vdupq_n_f64(1.0 - beta1);
    const float64x2_t vb2 = vdupq_n_f64(beta2);
    const float64x2_t vb2c = vdupq_n_f64(1.0 - beta2);
    const float64x2_t vc1 = vdupq_n_f64(bias_corr1);
    const float64x2_t vc2 = vdupq_n_f64(bias_corr2);
    const float64x2_t vlr = vdupq_n_f64(lr);
    const float64x2_t veps = vdupq_n_f64(eps);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t g = vld1q_f64(grad + i);
        float64x2_t vm = vld1q_f64(m + i);
        float64x2_t vv = vld1q_f64(v + i);
        vm = vfmaq_f64(vmulq_f64(vb1c, g), vb1, vm);
        vv = vfmaq_f64(vmulq_f64(vb2c, vmulq_f64(g, g)), vb2, vv);
        vst1q_f64(m + i, vm);
        vst1q_f64(v + i, vv);
        const float64x2_t m_hat = vdivq_f64(vm, vc1);
        const float64x2_t v_hat = vdivq_f64(vv, vc2);
        const float64x2_t denom = vaddq_f64(vsqrtq_f64(v_hat), veps);
        const float64x2_t step = vdivq_f64(vmulq_f64(vlr, m_hat), denom);
        vst1q_f64(param + i, vsubq_f64(vld1q_f64(param + i), step));
    }
    for (; i < n; ++i) {
        const double g = grad[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * (g * g);
        const double m_hat = m[i] / bias_corr1;
        const double v_hat = v[i] / bias_corr2;
        param[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
}

bool all_finite_neon(const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i])) {
            return false;
        }
    }
    return true;
}

}  // namespace

const Ops& neon_ops() {
    static const Ops ops = {
        dot_neon,       axpy_neon,      matvec_neon,    relu_neon,
        relu_backward_neon, adam_step_neon, all_finite_neon,
    };
    return ops;
}

}  // namespace mtcsim::kernels::detail

#endif  // MTCSIM_KERNELS_NEON
