#include "qles/kernels.hpp"

namespace qles::simd {
namespace {

double dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

double wdot(const double* w, const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i] * y[i];
    return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void xpay(const double* x, double a, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + a * y[i];
}

void stencil5_row(const double* x, const double* xd, const double* xu, const double* cl,
                  const double* cd, const double* cu, double* y, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
        const double xc = x[i];
        y[i] = cl[i] * (xc - x[i - 1]) + cl[i + 1] * (xc - x[i + 1]) + cd[i] * (xc - xd[i]) +
               cu[i] * (xc - xu[i]);
    }
}

void stencil3(const double* x, const double* c, double* y, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
        const double xc = x[i];
        y[i] = c[i] * (xc - x[i - 1]) + c[i + 1] * (xc - x[i + 1]);
    }
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{"scalar", dot, wdot, axpy, xpay, stencil5_row, stencil3};
    return table;
}

}  // namespace qles::simd
