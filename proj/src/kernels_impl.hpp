#pragma once

#include <cstddef>

// Internal dispatch table shared between the per-ISA translation units.

namespace mtcsim::kernels::detail {

struct Ops {
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*matvec)(const double*, std::size_t, std::size_t, const double*, const double*,
                   double*);
    void (*relu)(double*, std::size_t);
    void (*relu_backward)(const double*, double*, std::size_t);
    void (*adam_step)(double*, double*, double*, const double*, std::size_t, double, double,
                      double, double, double, double);
    bool (*all_finite)(const double*, std::size_t);
};

const Ops& scalar_ops();

#if defined(MTCSIM_KERNELS_AVX2)
const Ops& avx2_ops();
#endif

#if defined(MTCSIM_KERNELS_NEON)
const Ops& neon_ops();
#endif

}  // namespace mtcsim::kernels::detail
