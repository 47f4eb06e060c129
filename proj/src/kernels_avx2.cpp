// AVX2/FMA variants of the dense-math kernels. This file is compiled with
// -mavx2 -mfma; callers must gate on cpu support before installing the table.

#if defined(MTCSIM_KERNELS_AVX2)

#include <immintrin.h>

#include <cmath>
#include <cstdint>
#include <limits>

#include "kernels_impl.hpp"

namespace mtcsim::kernels::detail {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
        acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
        acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    acc0 = _mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3));
    double s = hsum(acc0);
    for (; i < n; ++i) {
        s += a[i] * b[i];
    }
    return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

void matvec_avx2(const double* w, std::size_t rows, std::size_t cols, const double* x,
                 const double* bias, double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        y[r] = dot_avx2(w + r * cols, x, cols) + bias[r];
    }
}

void relu_avx2(double* x, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
    }
    for (; i < n; ++i) {
        x[i] = x[i] > 0.0 ? x[i] : 0.0;
    }
}

void relu_backward_avx2(const double* pre, double* grad, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(pre + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(grad + i, _mm256_and_pd(_mm256_loadu_pd(grad + i), mask));
    }
    for (; i < n; ++i) {
        if (!(pre[i] > 0.0)) {
            grad[i] = 0.0;
        }
    }
}

void adam_step_avx2(double* param, double* m, double* v, const double* grad, std::size_t n,
                    double lr, double beta1, double beta2, double eps, double bias_corr1,
                    double bias_corr2) {
    const __m256d vb1 = _mm256_set1_pd(beta1);
    const __m256d vb1c = _mm256_set1_pd(1.0 - beta1);
    const __m256d vb2 = _mm256_set1_pd(beta2);
    const __m256d vb2c = _mm256_set1_pd(1.0 - beta2);
    const __m256d vc1 = _mm256_set1_pd(bias_corr1);
    const __m256d vc2 = _mm256_set1_pd(bias_corr2);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d veps = _mm256_set1_pd(eps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d g = _mm256_loadu_pd(grad + i);
        __m256d vm = _mm256_loadu_pd(m + i);
        __m256d vv = _mm256_loadu_pd(v + i);
        vm = _mm256_fmadd_pd(vb1, vm, _mm256_mul_pd(vb1c, g));
        vv = _mm256_fmadd_pd(vb2, vv, _mm256_mul_pd(vb2c, _mm256_mul_pd(g, g)));
        _mm256_storeu_pd(m + i, vm);
        _mm256_storeu_pd(v + i, vv);
        const __m256d m_hat = _mm256_div_pd(vm, vc1);
        const __m256d v_hat = _mm256_div_pd(vv, vc2);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(v_hat), veps);
        const __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, m_hat), denom);
        _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
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

bool all_finite_avx2(const double* x, std::size_t n) {
    const __m256d abs_mask =
        _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_and_pd(_mm256_loadu_pd(x + i), abs_mask);
        // NLT_UQ: true for |x| >= inf and for NaN (unordered).
        const __m256d bad = _mm256_cmp_pd(v, inf, _CMP_NLT_UQ);
        if (_mm256_movemask_pd(bad) != 0) {
            return false;
        }
    }
    for (; i < n; ++i) {
        if (!std::isfinite(x[i])) {
            return false;
        }
    }
    return true;
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops ops = {
        dot_avx2,       axpy_avx2,      matvec_avx2,    relu_avx2,
        relu_backward_avx2, adam_step_avx2, all_finite_avx2,
    };
    return ops;
}

}  // namespace mtcsim::kernels::detail

#endif  // MTCSIM_KERNELS_AVX2
