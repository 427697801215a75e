#include "qles/linsolve.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include "qles/kernels.hpp"

namespace qles {

namespace {

// FFTW planning is not thread-safe; execution of an existing plan is.
std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

EdgeOperator::EdgeOperator(MeshPtr mesh) : mesh_(std::move(mesh)) {
    const auto& nn = mesh_->node_counts();
    if (mesh_->dim() == 1) {
        cx_.assign(static_cast<std::size_t>(nn[0] - 1), 0.0);
    } else {
        cx_.assign(static_cast<std::size_t>(nn[0] - 1) * nn[1], 0.0);
        cy_.assign(static_cast<std::size_t>(nn[0]) * (nn[1] - 1), 0.0);
    }
}

void EdgeOperator::assemble(std::span<const double> a) {
    const Mesh& m = *mesh_;
    if (a.size() != m.num_elements()) throw InputError("diffusivity size does not match element count");
    const auto& h = m.spacing();
    if (m.dim() == 1) {
        const double s = 1.0 / h[0];
        for (std::size_t e = 0; e < cx_.size(); ++e) cx_[e] = s * a[e];
        return;
    }
    const int nx = m.node_counts()[0], ny = m.node_counts()[1];
    const int ccx = nx - 1, ccy = ny - 1;
    const std::size_t ncell = static_cast<std::size_t>(ccx) * ccy;
    const double sx = 0.5 * h[1] / h[0], sy = 0.5 * h[0] / h[1];
    auto ll = [&](int i, int j) { return a[static_cast<std::size_t>(j) * ccx + i]; };
    auto ur = [&](int i, int j) { return a[ncell + static_cast<std::size_t>(j) * ccx + i]; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < ccx; ++i) {
            double s = 0.0;
            if (j < ccy) s += ll(i, j);
            if (j > 0) s += ur(i, j - 1);
            cx_[static_cast<std::size_t>(j) * ccx + i] = sx * s;
        }
    }
    for (int j = 0; j < ccy; ++j) {
        for (int i = 0; i < nx; ++i) {
            double s = 0.0;
            if (i < ccx) s += ll(i, j);
            if (i > 0) s += ur(i - 1, j);
            cy_[static_cast<std::size_t>(j) * nx + i] = sy * s;
        }
    }
}

void EdgeOperator::set_constant(double a) {
    std::vector<double> coeff(mesh_->num_elements(), a);
    assemble(coeff);
}

void EdgeOperator::apply(std::span<const double> x, std::span<double> y) const {
    const Mesh& m = *mesh_;
    const auto& k = simd::kernels();
    const int nx = m.node_counts()[0];
    if (m.dim() == 1) {
        y[0] = 0.0;
        y[nx - 1] = 0.0;
        k.stencil3(x.data() + 1, cx_.data(), y.data() + 1, static_cast<std::size_t>(nx - 2));
        return;
    }
    const int ny = m.node_counts()[1];
    const auto row = static_cast<std::size_t>(nx);
    std::fill(y.begin(), y.begin() + nx, 0.0);
    std::fill(y.end() - nx, y.end(), 0.0);
    for (int j = 1; j < ny - 1; ++j) {
        const std::size_t base = j * row;
        y[base] = 0.0;
        y[base + nx - 1] = 0.0;
        k.stencil5_row(x.data() + base + 1, x.data() + base - row + 1, x.data() + base + row + 1,
                       cx_.data() + static_cast<std::size_t>(j) * (nx - 1), cy_.data() + (j - 1) * row + 1,
                       cy_.data() + j * row + 1, y.data() + base + 1, static_cast<std::size_t>(nx - 2));
    }
}

double EdgeOperator::diagonal(std::size_t node) const {
    const Mesh& m = *mesh_;
    const int nx = m.node_counts()[0];
    if (m.dim() == 1) return cx_[node - 1] + cx_[node];
    const int i = static_cast<int>(node % nx), j = static_cast<int>(node / nx);
    const std::size_t ex = static_cast<std::size_t>(j) * (nx - 1) + i;
    return cx_[ex - 1] + cx_[ex] + cy_[static_cast<std::size_t>(j - 1) * nx + i] +
           cy_[static_cast<std::size_t>(j) * nx + i];
}

struct PoissonSolver::Plan {
    fftw_plan plan = nullptr;
};

PoissonSolver::PoissonSolver(const Mesh& mesh) : plan_(std::make_unique<Plan>()) {
    if (mesh.dim() != 2) throw InputError("sine-transform solver is two-dimensional");
    mx_ = mesh.interior_counts()[0];
    my_ = mesh.interior_counts()[1];
    nx_ = mesh.node_counts()[0];
    const double hx = mesh.spacing()[0], hy = mesh.spacing()[1];
    const double pi = std::numbers::pi;
    inv_eig_.resize(static_cast<std::size_t>(mx_) * my_);
    const double norm = 4.0 * (mx_ + 1) * (my_ + 1);
    for (int l = 0; l < my_; ++l) {
        const double sy = std::sin(0.5 * pi * (l + 1) / (my_ + 1));
        for (int k = 0; k < mx_; ++k) {
            const double sx = std::sin(0.5 * pi * (k + 1) / (mx_ + 1));
            const double lam = 4.0 * (hy / hx) * sx * sx + 4.0 * (hx / hy) * sy * sy;
            inv_eig_[static_cast<std::size_t>(l) * mx_ + k] = 1.0 / (lam * norm);
        }
    }
    std::vector<double> buf(inv_eig_.size());
    std::lock_guard lock(fftw_mutex());
    plan_->plan = fftw_plan_r2r_2d(my_, mx_, buf.data(), buf.data(), FFTW_RODFT00, FFTW_RODFT00,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan_->plan) throw std::runtime_error("FFTW plan creation failed");
}

PoissonSolver::~PoissonSolver() {
    if (plan_ && plan_->plan) {
        std::lock_guard lock(fftw_mutex());
        fftw_destroy_plan(plan_->plan);
    }
}

void PoissonSolver::apply(std::span<const double> r, std::span<double> x) const {
    std::vector<double> buf(inv_eig_.size());
    for (int j = 0; j < my_; ++j)
        for (int i = 0; i < mx_; ++i)
            buf[static_cast<std::size_t>(j) * mx_ + i] = r[static_cast<std::size_t>(j + 1) * nx_ + i + 1];
    fftw_execute_r2r(plan_->plan, buf.data(), buf.data());
    for (std::size_t k = 0; k < buf.size(); ++k) buf[k] *= inv_eig_[k];
    fftw_execute_r2r(plan_->plan, buf.data(), buf.data());
    std::fill(x.begin(), x.end(), 0.0);
    for (int j = 0; j < my_; ++j)
        for (int i = 0; i < mx_; ++i)
            x[static_cast<std::size_t>(j + 1) * nx_ + i + 1] = buf[static_cast<std::size_t>(j) * mx_ + i];
}

std::shared_ptr<const PoissonSolver> poisson_solver_for(const Mesh& mesh) {
    using Key = std::tuple<int, int, double, double>;
    static std::mutex cache_mutex;
    static std::map<Key, std::shared_ptr<const PoissonSolver>> cache;
    const Key key{mesh.interior_counts()[0], mesh.interior_counts()[1], mesh.spacing()[0], mesh.spacing()[1]};
    std::lock_guard lock(cache_mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto solver = std::make_shared<const PoissonSolver>(mesh);
    cache.emplace(key, solver);
    return solver;
}

namespace {

LinearSolveInfo thomas(const EdgeOperator& K, std::span<const double> rhs, std::span<double> x) {
    const auto& c = K.cx();
    const std::size_t nn = x.size();
    const std::size_t m = nn - 2;
    std::vector<double> cp(m), dp(m);
    // Row r is node r+1: -c[r] x_r + (c[r]+c[r+1]) x_{r+1} - c[r+1] x_{r+2}.
    for (std::size_t r = 0; r < m; ++r) {
        const double lower = r > 0 ? -c[r] : 0.0;
        const double diag = c[r] + c[r + 1];
        const double upper = -c[r + 1];
        const double denom = diag - (r > 0 ? lower * cp[r - 1] : 0.0);
        if (!(std::abs(denom) > 0.0) || !std::isfinite(denom))
            throw std::runtime_error("singular tridiagonal system");
        cp[r] = upper / denom;
        dp[r] = (rhs[r + 1] - (r > 0 ? lower * dp[r - 1] : 0.0)) / denom;
    }
    x[0] = 0.0;
    x[nn - 1] = 0.0;
    x[m] = dp[m - 1];
    for (std::size_t r = m - 1; r-- > 0;) x[r + 1] = dp[r] - cp[r] * x[r + 2];
    return {};
}

LinearSolveInfo pcg(const EdgeOperator& K, std::span<const double> rhs, std::span<double> x,
                    const LinearSolveOptions& opt) {
    const Mesh& m = *K.mesh();
    const auto& kern = simd::kernels();
    const std::size_t n = x.size();
    const auto L = poisson_solver_for(m);

    // Diagonal scaling s = sqrt(diag(L) / diag(K)) so that s L^{-1} s absorbs
    // smooth variations of the diffusivity.
    EdgeOperator unit(K.mesh());
    unit.set_constant(1.0);
    std::vector<double> s(n, 0.0);
    for (std::size_t k : m.interior_nodes()) {
        const double dk = K.diagonal(k);
        if (!(dk > 0.0)) throw std::runtime_error("operator diagonal is not positive");
        s[k] = std::sqrt(unit.diagonal(k) / dk);
    }
    auto precond = [&](const std::vector<double>& r, std::vector<double>& z) {
        std::vector<double> t(n);
        for (std::size_t k = 0; k < n; ++k) t[k] = s[k] * r[k];
        L->apply(t, z);
        for (std::size_t k = 0; k < n; ++k) z[k] *= s[k];
    };

    for (std::size_t k = 0; k < n; ++k)
        if (m.on_boundary(k)) x[k] = 0.0;
    std::vector<double> r(n), z(n), p(n), q(n);
    K.apply(x, q);
    for (std::size_t k = 0; k < n; ++k) r[k] = m.on_boundary(k) ? 0.0 : rhs[k] - q[k];
    const double bnorm = std::sqrt(kern.dot(rhs.data(), rhs.data(), n));
    LinearSolveInfo info;
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return info;
    }
    double rnorm = std::sqrt(kern.dot(r.data(), r.data(), n));
    info.rel_residual = rnorm / bnorm;
    if (info.rel_residual <= opt.rtol) return info;
    precond(r, z);
    p = z;
    double rz = kern.dot(r.data(), z.data(), n);
    for (int it = 1; it <= opt.max_iter; ++it) {
        K.apply(p, q);
        const double pq = kern.dot(p.data(), q.data(), n);
        if (!(pq > 0.0)) break;
        const double alpha = rz / pq;
        kern.axpy(alpha, p.data(), x.data(), n);
        kern.axpy(-alpha, q.data(), r.data(), n);
        rnorm = std::sqrt(kern.dot(r.data(), r.data(), n));
        info.iterations = it;
        info.rel_residual = rnorm / bnorm;
        if (info.rel_residual <= opt.rtol) return info;
        precond(r, z);
        const double rz_new = kern.dot(r.data(), z.data(), n);
        kern.xpay(z.data(), rz_new / rz, p.data(), n);
        rz = rz_new;
    }
    info.converged = info.rel_residual <= opt.rtol;
    return info;
}

}  // namespace

LinearSolveInfo solve_dirichlet(const EdgeOperator& K, std::span<const double> rhs, std::span<double> x,
                                const LinearSolveOptions& opt) {
    if (rhs.size() != K.mesh()->size() || x.size() != K.mesh()->size())
        throw InputError("linear solve size mismatch");
    if (K.mesh()->dim() == 1) return thomas(K, rhs, x);
    return pcg(K, rhs, x, opt);
}

}  // namespace qles
