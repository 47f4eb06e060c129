#pragma once

#include <cstddef>
#include <vector>

namespace mtcsim::kernels {

// Dense-math primitives behind the neural network. The scalar path is the
// reference implementation; SIMD variants are selected at runtime and must
// agree with it up to floating-point reassociation (see the equivalence
// tests). Dispatch is process-global: pick once, use everywhere.
enum class Backend { Scalar, Avx2, Neon };

const char* backend_name(Backend b);
bool backend_supported(Backend b);
std::vector<Backend> supported_backends();
Backend active_backend();
// Switches the active backend; returns false (and changes nothing) when the
// requested backend is not compiled in or not supported by this CPU.
bool set_backend(Backend b);

double dot(const double* a, const double* b, std::size_t n);

// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

// y = W x + bias, W row-major (rows x cols)
void matvec(const double* w, std::size_t rows, std::size_t cols, const double* x,
            const double* bias, double* y);

void relu(double* x, std::size_t n);

// grad[i] = pre[i] > 0 ? grad[i] : 0
void relu_backward(const double* pre, double* grad, std::size_t n);

// One Adam update over n parameters. bias_corr1/2 are the 1 - beta^t terms.
void adam_step(double* param, double* m, double* v, const double* grad, std::size_t n,
               double lr, double beta1, double beta2, double eps, double bias_corr1,
               double bias_corr2);

bool all_finite(const double* x, std::size_t n);

}  // namespace mtcsim::kernels
