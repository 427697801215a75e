// Compiled with -mavx2 -mfma; only reached after a CPUID check in dispatch.cpp.

#include <immintrin.h>

#include "qles/kernels.hpp"

namespace qles::simd {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d hi64 = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, hi64));
}

double dot(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

double wdot(const double* w, const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d a0 = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i));
        __m256d a1 = _mm256_mul_pd(_mm256_loadu_pd(w + i + 4), _mm256_loadu_pd(x + i + 4));
        acc0 = _mm256_fmadd_pd(a0, _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(a1, _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        __m256d a0 = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i));
        acc0 = _mm256_fmadd_pd(a0, _mm256_loadu_pd(y + i), acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += w[i] * x[i] * y[i];
    return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void xpay(const double* x, double a, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] = x[i] + a * y[i];
}

void stencil5_row(const double* x, const double* xd, const double* xu, const double* cl,
                  const double* cd, const double* cu, double* y, std::size_t count) {
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        const __m256d xc = _mm256_loadu_pd(x + i);
        __m256d r = _mm256_mul_pd(_mm256_loadu_pd(cl + i), _mm256_sub_pd(xc, _mm256_loadu_pd(x + i - 1)));
        r = _mm256_fmadd_pd(_mm256_loadu_pd(cl + i + 1), _mm256_sub_pd(xc, _mm256_loadu_pd(x + i + 1)), r);
        r = _mm256_fmadd_pd(_mm256_loadu_pd(cd + i), _mm256_sub_pd(xc, _mm256_loadu_pd(xd + i)), r);
        r = _mm256_fmadd_pd(_mm256_loadu_pd(cu + i), _mm256_sub_pd(xc, _mm256_loadu_pd(xu + i)), r);
        _mm256_storeu_pd(y + i, r);
    }
    for (; i < count; ++i) {
        const double c = x[i];
        y[i] = cl[i] * (c - x[i - 1]) + cl[i + 1] * (c - x[i + 1]) + cd[i] * (c - xd[i]) +
               cu[i] * (c - xu[i]);
    }
}

void stencil3(const double* x, const double* c, double* y, std::size_t count) {
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        const __m256d xc = _mm256_loadu_pd(x + i);
        __m256d r = _mm256_mul_pd(_mm256_loadu_pd(c + i), _mm256_sub_pd(xc, _mm256_loadu_pd(x + i - 1)));
        r = _mm256_fmadd_pd(_mm256_loadu_pd(c + i + 1), _mm256_sub_pd(xc, _mm256_loadu_pd(x + i + 1)), r);
        _mm256_storeu_pd(y + i, r);
    }
    for (; i < count; ++i) {
        const double xc = x[i];
        y[i] = c[i] * (xc - x[i - 1]) + c[i + 1] * (xc - x[i + 1]);
    }
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable table{"avx2", dot, wdot, axpy, xpay, stencil5_row, stencil3};
    return table;
}

}  // namespace qles::simd
