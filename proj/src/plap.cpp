#include "qles/plap.hpp"

#include <algorithm>
#include <cmath>

#include "qles/kernels.hpp"

namespace qles {

namespace {

void check_exponent(double p) {
    if (!(p > 1.0) || !std::isfinite(p)) throw InputError("p-Laplacian exponent must satisfy p > 1");
}

void check_pair(const Field& z, const Field& h) {
    if (!z.mesh || z.mesh != h.mesh) throw InputError("z and h must share one mesh");
}

// E(z + t d) - E(z), computed termwise so that small decreases are not lost
// to cancellation against the total energy.
double energy_change(const ElementGradients& g, const ElementGradients& gd, double t, double p, double eps,
                     double area, double hd) {
    const bool two_d = !g.gy.empty();
    const double half_p = 0.5 * p;
    double s = 0.0;
    for (std::size_t e = 0; e < g.gx.size(); ++e) {
        const double dx = gd.gx[e], dy = two_d ? gd.gy[e] : 0.0;
        const double cross = g.gx[e] * dx + (two_d ? g.gy[e] * dy : 0.0);
        const double delta = t * (2.0 * cross + t * (dx * dx + dy * dy));
        const double b = g.sq(e) + eps;
        if (b > 0.0)
            s += std::pow(b, half_p) * std::expm1(half_p * std::log1p(delta / b));
        else
            s += std::pow(delta, half_p);
    }
    return area * s / p - t * hd;
}

// Energy change from lowering eps at fixed z; never positive.
double stage_change(const ElementGradients& g, double p, double eps_old, double eps_new, double area) {
    const double half_p = 0.5 * p;
    double s = 0.0;
    for (std::size_t e = 0; e < g.gx.size(); ++e) {
        const double b = g.sq(e) + eps_old;
        s += std::pow(b, half_p) * std::expm1(half_p * std::log1p((eps_new - eps_old) / b));
    }
    return area * s / p;
}

// Frozen diffusivity for the descent step. For p > 2 the lagged value
// B^{(p-2)/2} underestimates the curvature along the gradient and stalls near
// critical points; use the larger directional second derivative instead,
// B^{(p-4)/2}((p-1)|g|^2 + eps), which is exact Newton in 1D.
std::vector<double> step_diffusivity(const ElementGradients& g, double p, double eps, double eps_floor) {
    if (p <= 2.0) return diffusivity(g, p, eps, eps_floor);
    std::vector<double> a(g.gx.size());
    for (std::size_t e = 0; e < a.size(); ++e) {
        const double sq = g.sq(e);
        const double b = std::max(sq + eps, eps_floor);
        a[e] = std::pow(b, 0.5 * (p - 4.0)) * ((p - 1.0) * sq + eps);
    }
    return a;
}

double regularized_integral(const ElementGradients& g, double p, double eps, double area) {
    double s = 0.0;
    for (std::size_t e = 0; e < g.gx.size(); ++e) {
        const double b = g.sq(e) + eps;
        if (b > 0.0) s += std::pow(b, 0.5 * p);
    }
    return area * s;
}

}  // namespace

void PlapConfig::validate() const {
    if (!(eps_start > 0.0) || !(eps_min > 0.0)) throw InputError("eps_start and eps_min must be positive");
    if (!(eps_min <= eps_start)) throw InputError("eps_min must not exceed eps_start");
    if (!(eps_factor > 0.0 && eps_factor < 1.0)) throw InputError("eps_factor must lie in (0,1)");
    if (!(tol_grad > 0.0)) throw InputError("tol_grad must be positive");
    if (max_iter < 1) throw InputError("max_iter must be at least 1");
    if (!(line_search.shrink > 0.0 && line_search.shrink < 1.0))
        throw InputError("line-search shrink factor must lie in (0,1)");
    if (!(line_search.c1 > 0.0 && line_search.c1 < 0.5))
        throw InputError("sufficient-decrease constant must lie in (0,1/2)");
    if (!(linear_rtol > 0.0 && linear_rtol < 1.0)) throw InputError("linear_rtol must lie in (0,1)");
}

double energy_eps(const Field& z, const Field& h, double p, double eps) {
    check_exponent(p);
    check_pair(z, h);
    if (!(eps >= 0.0)) throw InputError("eps must be nonnegative");
    const auto g = element_gradients(z);
    const double phi = regularized_integral(g, p, eps, z.mesh->element_measure());
    const double hz = simd::kernels().wdot(z.mesh->quad_weights().data(), h.values.data(), z.values.data(),
                                           z.size());
    return phi / p - hz;
}

std::vector<double> diffusivity(const ElementGradients& g, double p, double eps, double eps_floor,
                                bool* degenerate) {
    if (!(eps >= 0.0)) throw InputError("eps must be nonnegative");
    const double expo = 0.5 * (p - 2.0);
    std::vector<double> a(g.gx.size());
    for (std::size_t e = 0; e < a.size(); ++e) {
        double b = g.sq(e) + eps;
        if (b == 0.0) {
            if (p < 2.0) {
                b = eps_floor;
                if (degenerate) *degenerate = true;
            } else if (p > 2.0) {
                a[e] = 0.0;
                continue;
            }
        }
        a[e] = p == 2.0 ? 1.0 : std::pow(b, expo);
    }
    return a;
}

Field residual_eps(const Field& z, const Field& h, double p, double eps, double eps_floor, bool* degenerate) {
    check_exponent(p);
    check_pair(z, h);
    if (!(eps >= 0.0)) throw InputError("eps must be nonnegative");
    const Mesh& m = *z.mesh;
    EdgeOperator K(z.mesh);
    K.assemble(diffusivity(element_gradients(z), p, eps, eps_floor, degenerate));
    Field r(z.mesh);
    K.apply(z.values, r.values);
    const auto& w = m.quad_weights();
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = m.on_boundary(k) ? 0.0 : r[k] / w[k] - h[k];
    return r;
}

double residual_norm(const Field& r) {
    const Mesh& m = *r.mesh;
    const auto& w = m.quad_weights();
    double s = 0.0;
    for (std::size_t k : m.interior_nodes()) s += w[k] * r[k] * r[k];
    return std::sqrt(s);
}

PlapResult solve_plap(const Field& h, double p, const PlapConfig& cfg, const std::optional<Field>& initial) {
    check_exponent(p);
    cfg.validate();
    const MeshPtr& mesh = h.mesh;
    if (!mesh) throw InputError("right side without mesh");
    for (double v : h.values)
        if (!std::isfinite(v)) throw InputError("right side must be finite");
    const Mesh& m = *mesh;
    const auto& w = m.quad_weights();
    const auto& kern = simd::kernels();
    const std::size_t n = m.size();
    const double area = m.element_measure();

    PlapResult out{Field(mesh), {}};
    Field& z = out.z;
    if (initial) {
        if (initial->mesh != mesh) throw InputError("initial guess lives on a different mesh");
        z = *initial;
        z.zero_boundary();
    }
    SolveTrace& trace = out.trace;

    std::vector<double> ladder;
    if (initial && cfg.skip_ladder_when_warm) {
        ladder.push_back(cfg.eps_min);
    } else {
        for (double e = cfg.eps_start; e > cfg.eps_min * (1.0 + 1e-12); e *= cfg.eps_factor) ladder.push_back(e);
        ladder.push_back(cfg.eps_min);
    }

    EdgeOperator K(mesh);
    std::vector<double> grad(n), rhs(n), d(n), Kz(n);
    std::vector<double> mh(n);
    for (std::size_t k = 0; k < n; ++k) mh[k] = m.on_boundary(k) ? 0.0 : w[k] * h[k];
    LinearSolveOptions lopt;
    lopt.rtol = cfg.linear_rtol;

    double energy = energy_eps(z, h, p, ladder.front());
    if (!std::isfinite(energy)) throw NumericalError("non-finite energy at the initial guess");

    for (std::size_t s = 0; s < ladder.size(); ++s) {
        const double eps = ladder[s];
        if (s > 0) energy += stage_change(element_gradients(z), p, ladder[s - 1], eps, area);
        StageSummary stage;
        stage.eps = eps;
        double step = 0.0;
        double rnorm = 0.0;
        for (int it = 0;; ++it) {
            const auto g = element_gradients(z);
            K.assemble(diffusivity(g, p, eps, cfg.eps_min));
            K.apply(z.values, Kz);
            double r2 = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                grad[k] = m.on_boundary(k) ? 0.0 : Kz[k] - mh[k];
                if (grad[k] != 0.0) r2 += grad[k] * grad[k] / w[k];
            }
            rnorm = std::sqrt(r2);
            trace.rows.push_back({eps, it, energy, rnorm, step});
            stage.iterations = it;
            if (rnorm <= cfg.tol_grad) {
                stage.converged = true;
                break;
            }
            if (it >= cfg.max_iter) {
                trace.diagnostic = "iteration limit reached at eps=" + std::to_string(eps);
                break;
            }
            for (std::size_t k = 0; k < n; ++k) rhs[k] = -grad[k];
            std::fill(d.begin(), d.end(), 0.0);
            if (p > 2.0) K.assemble(step_diffusivity(g, p, eps, cfg.eps_min));
            solve_dirichlet(K, rhs, d, lopt);
            const double slope = kern.dot(grad.data(), d.data(), n);
            if (!(slope < 0.0)) {
                trace.diagnostic = "no descent direction at eps=" + std::to_string(eps);
                break;
            }
            const auto gd = element_gradients(Field(mesh, d));
            const double hd = kern.dot(mh.data(), d.data(), n);
            double t = 1.0;
            double dE = 0.0;
            bool accepted = false;
            for (int b = 0; b <= cfg.line_search.max_backtracks; ++b) {
                dE = energy_change(g, gd, t, p, eps, area, hd);
                if (!std::isfinite(dE)) throw NumericalError("non-finite energy during line search");
                if (dE <= cfg.line_search.c1 * t * slope) {
                    accepted = true;
                    break;
                }
                t *= cfg.line_search.shrink;
            }
            if (!accepted) {
                trace.diagnostic = "line search stalled at eps=" + std::to_string(eps);
                break;
            }
            kern.axpy(t, d.data(), z.values.data(), n);
            energy += dE;
            step = t;
            ++trace.total_iterations;
        }
        stage.residual_norm = rnorm;
        stage.energy = energy;
        const auto g = element_gradients(z);
        stage.eps_gap = regularized_integral(g, p, eps, area) - dirichlet_integral(g, m, p);
        trace.stages.push_back(stage);
        trace.final_residual = rnorm;
        trace.converged = stage.converged;
    }
    return out;
}

}  // namespace qles
