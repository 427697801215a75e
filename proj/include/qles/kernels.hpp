#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// on x86-64, an AVX2+FMA version; the active table is chosen once at startup
// from CPUID and can be forced with QLES_SIMD=scalar|avx2.

#include <cstddef>
#include <string_view>

namespace qles::simd {

struct KernelTable {
    std::string_view name;

    /// sum_i x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    /// sum_i w[i] * x[i] * y[i]
    double (*wdot)(const double* w, const double* x, const double* y, std::size_t n);
    /// y += a * x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    /// y = x + a * y
    void (*xpay)(const double* x, double a, double* y, std::size_t n);

    /// One interior row of the 5-point edge-coefficient operator:
    ///   y[i] = cl[i](x[i]-x[i-1]) + cl[i+1](x[i]-x[i+1])
    ///        + cd[i](x[i]-xd[i]) + cu[i](x[i]-xu[i])
    /// for i in [0, count). `x`, `xd`, `xu` point at the first unknown of the
    /// centre, lower and upper rows; `cl` points at the coefficient of the edge
    /// to the left of that unknown.
    void (*stencil5_row)(const double* x, const double* xd, const double* xu,
                         const double* cl, const double* cd, const double* cu,
                         double* y, std::size_t count);

    /// 1D analogue: y[i] = c[i](x[i]-x[i-1]) + c[i+1](x[i]-x[i+1]).
    void (*stencil3)(const double* x, const double* c, double* y, std::size_t count);
};

const KernelTable& scalar_kernels();

/// Null when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

/// The table selected for this process.
const KernelTable& kernels();

}  // namespace qles::simd
