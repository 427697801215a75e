#include "qles/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <random>

#include "qles/kernels.hpp"
#include "qles/linsolve.hpp"
#include "qles/plap.hpp"
#include "qles/problems.hpp"

namespace qles {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 40;

void project(Field& z, QuotientSpec::Projection proj) {
    switch (proj) {
        case QuotientSpec::Projection::absolute:
            for (double& v : z.values) v = std::abs(v);
            break;
        case QuotientSpec::Projection::positive_part:
            for (double& v : z.values) v = std::max(v, 0.0);
            break;
        case QuotientSpec::Projection::none:
            break;
    }
}

// Frozen p-Laplacian operator at z, floored relative to the mean squared
// gradient so the preconditioner scales with z.
EdgeOperator frozen_operator(const Field& z, double p) {
    const auto g = element_gradients(z);
    double mean = 0.0;
    for (std::size_t e = 0; e < g.gx.size(); ++e) mean += g.sq(e);
    mean /= static_cast<double>(std::max<std::size_t>(1, g.gx.size()));
    const double floor = mean > 0.0 ? 1e-6 * mean : 1.0;
    EdgeOperator P(z.mesh);
    P.assemble(diffusivity(g, p, floor));
    return P;
}

std::vector<double> precondition(const EdgeOperator& P, const Field& rhs) {
    std::vector<double> x(rhs.size(), 0.0);
    LinearSolveOptions opt;
    opt.rtol = 1e-10;
    solve_dirichlet(P, rhs.values, x, opt);
    return x;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return simd::kernels().dot(a.data(), b.data(), a.size());
}

struct Eval {
    double num = 0.0, den = 0.0, q = 0.0;
    Field gnum, gden;
};

Eval evaluate(const QuotientSpec& spec, const Field& z, bool with_grad) {
    Eval e;
    if (with_grad) {
        e.gnum = Field(z.mesh);
        e.gden = Field(z.mesh);
    }
    e.num = spec.num(z, with_grad ? &e.gnum : nullptr);
    e.den = spec.den(z, with_grad ? &e.gden : nullptr);
    e.q = e.den > 0.0 ? e.num * std::pow(e.den, -spec.num_degree / spec.den_degree)
                      : std::numeric_limits<double>::infinity();
    return e;
}

void normalize(const QuotientSpec& spec, Field& z, const Eval& e) {
    const double c = spec.normalize_numerator ? std::pow(e.num, -1.0 / spec.num_degree)
                                              : std::pow(e.den, -1.0 / spec.den_degree);
    if (!std::isfinite(c) || !(c > 0.0)) return;
    for (double& v : z.values) v *= c;
}

}  // namespace

Field sine_bump(const MeshPtr& mesh) {
    const double pi = std::numbers::pi;
    const auto& lo = mesh->lo();
    const auto& hi = mesh->hi();
    Field f = Field::sample(mesh, [&](double x, double y) {
        double v = std::sin(pi * (x - lo[0]) / (hi[0] - lo[0]));
        if (mesh->dim() == 2) v *= std::sin(pi * (y - lo[1]) / (hi[1] - lo[1]));
        return v;
    });
    return f.zero_boundary();
}

Field perturbed_bump(const MeshPtr& mesh, int restart, std::uint64_t seed, double amplitude) {
    Field f = sine_bump(mesh);
    if (restart == 0) return f;
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(restart));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : f.values) v *= 1.0 + amplitude * u(rng);
    return f;
}

double p_dirichlet(const Field& z, double p, Field* grad) {
    const auto g = element_gradients(z);
    const double val = dirichlet_integral(g, *z.mesh, p);
    if (grad) {
        EdgeOperator K(z.mesh);
        K.assemble(diffusivity(g, p, 0.0, 1.0));
        *grad = Field(z.mesh);
        K.apply(z.values, grad->values);
        for (double& v : grad->values) v *= p;
    }
    return val;
}

double weighted_power(const Field& z, double r, const Field* b, Field* grad) {
    const Mesh& m = *z.mesh;
    const auto& w = m.quad_weights();
    double s = 0.0;
    if (grad) *grad = Field(z.mesh);
    for (std::size_t k = 0; k < z.size(); ++k) {
        const double a = std::abs(z[k]);
        if (a == 0.0) continue;
        const double bk = b ? (*b)[k] : 1.0;
        const double ar = std::pow(a, r);
        s += w[k] * bk * ar;
        if (grad && !m.on_boundary(k)) (*grad)[k] = r * w[k] * bk * ar / z[k];
    }
    return s;
}

QuotientRun minimize_quotient(const QuotientSpec& spec, Field z, const QuotientOptions& opt) {
    const double p = spec.num_degree;
    const double ratio = spec.num_degree / spec.den_degree;
    const Mesh& m = *z.mesh;
    const std::size_t n = z.size();
    z.zero_boundary();
    project(z, spec.projection);
    Eval cur = evaluate(spec, z, false);
    if (!(cur.den > 0.0)) throw InputError("quotient denominator is not positive at the starting field");
    normalize(spec, z, cur);
    cur = evaluate(spec, z, true);

    QuotientRun run;
    run.history.push_back(cur.q);
    std::vector<double> prev_z, prev_grad;
    int stall = 0;
    for (int it = 0; it < opt.max_iter; ++it) {
        const double scale = std::pow(cur.den, -ratio);
        std::vector<double> grad(n, 0.0);
        for (std::size_t k = 0; k < n; ++k)
            if (!m.on_boundary(k))
                grad[k] = scale * (cur.gnum[k] - ratio * (cur.num / cur.den) * cur.gden[k]);
        const EdgeOperator P = frozen_operator(z, p);
        Field rhs(z.mesh);
        for (std::size_t k = 0; k < n; ++k) rhs[k] = -grad[k];
        const std::vector<double> dir = precondition(P, rhs);
        const double slope = dot(grad, dir);
        if (!(slope < 0.0)) {
            run.converged = true;
            break;
        }

        double t = std::pow(cur.den, ratio) / p;
        if (!prev_z.empty()) {
            std::vector<double> s(n), y(n), Ps(n);
            for (std::size_t k = 0; k < n; ++k) {
                s[k] = z[k] - prev_z[k];
                y[k] = grad[k] - prev_grad[k];
            }
            P.apply(s, Ps);
            const double sy = dot(s, y);
            if (sy > 0.0) {
                const double bb = dot(s, Ps) / sy;
                if (bb >= 0.1 * t && bb <= 10.0 * t) t = bb;
            }
        }

        Field trial(z.mesh);
        Eval next;
        bool accepted = false;
        for (int b = 0; b < kMaxHalvings; ++b) {
            for (std::size_t k = 0; k < n; ++k) trial[k] = z[k] + t * dir[k];
            project(trial, spec.projection);
            next = evaluate(spec, trial, false);
            if (next.q <= cur.q + kArmijo * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // No representable decrease left along the preconditioned direction.
            run.converged = true;
            break;
        }
        prev_z = z.values;
        prev_grad = grad;
        normalize(spec, trial, next);
        z = std::move(trial);
        const double old_q = cur.q;
        cur = evaluate(spec, z, true);
        // The accepted value; rescaling changes Q only at rounding level.
        run.history.push_back(next.q);
        run.iters = it + 1;
        if (old_q - next.q <= opt.rel_tol * std::abs(next.q)) {
            if (++stall >= opt.stall_window) {
                run.converged = true;
                break;
            }
        } else {
            stall = 0;
        }
    }
    run.value = cur.q;
    run.z = std::move(z);
    return run;
}

namespace {

template <class Fn>
auto run_restarts(const QuotientOptions& opt, Fn&& one) {
    using Run = decltype(one(0));
    const int R = std::max(1, opt.restarts);
    std::vector<Run> runs(static_cast<std::size_t>(R));
    if (opt.concurrent && R > 1) {
        std::vector<std::future<Run>> fut;
        for (int r = 0; r < R; ++r) fut.push_back(std::async(std::launch::async, one, r));
        for (int r = 0; r < R; ++r) runs[r] = fut[r].get();
    } else {
        for (int r = 0; r < R; ++r) runs[r] = one(r);
    }
    return runs;
}

std::size_t best_of(const std::vector<double>& values, double& spread) {
    std::size_t best = 0;
    double lo = values[0], hi = values[0];
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] < values[best]) best = i;
        lo = std::min(lo, values[i]);
        hi = std::max(hi, values[i]);
    }
    spread = hi - lo;
    return best;
}

std::vector<double> run_values(const std::vector<QuotientRun>& runs) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(r.value);
    return v;
}

struct CoupledRun {
    QuotientRun u;
    Field v;
};

}  // namespace

double rayleigh_quotient(const Field& z, double p, const std::optional<Field>& weight) {
    const double den = weighted_power(z, p, weight ? &*weight : nullptr);
    return p_dirichlet(z, p) / den;
}

EigenResult first_eig_plap(double p, const MeshPtr& mesh, const std::optional<Field>& weight,
                           const QuotientOptions& opt) {
    if (!(p > 1.0)) throw InputError("eigenvalue problem requires p > 1");
    if (weight) {
        if (weight->mesh != mesh) throw InputError("weight lives on a different mesh");
        bool positive = false;
        for (std::size_t k : mesh->interior_nodes()) positive = positive || (*weight)[k] > 0.0;
        if (!positive) throw InputError("weight admits no positive denominator");
    }
    auto b = weight ? std::make_shared<const Field>(*weight) : nullptr;
    QuotientSpec spec;
    spec.num_degree = p;
    spec.den_degree = p;
    spec.num = [p](const Field& z, Field* g) { return p_dirichlet(z, p, g); };
    spec.den = [p, b](const Field& z, Field* g) { return weighted_power(z, p, b.get(), g); };
    spec.projection = QuotientSpec::Projection::absolute;

    auto runs = run_restarts(opt, [&](int r) {
        Field start = perturbed_bump(mesh, r, opt.seed, opt.perturbation);
        if (b) {
            // Start inside the region where the weight is positive.
            for (std::size_t k = 0; k < start.size(); ++k)
                if ((*b)[k] <= 0.0) start[k] *= 1e-3;
        }
        return minimize_quotient(spec, std::move(start), opt);
    });
    EigenResult res;
    const std::size_t best = best_of(run_values(runs), res.spread);
    res.eigenfield = std::move(runs[best].z);
    res.lambda = rayleigh_quotient(res.eigenfield, p, weight);
    res.quotient_history = std::move(runs[best].history);
    res.iters = runs[best].iters;
    res.restarts = static_cast<int>(runs.size());
    res.converged = runs[best].converged;
    return res;
}

double coupled_quotient(const Field& u, const Field& v, double p, double q, double alpha, double beta) {
    const auto& w = u.mesh->quad_weights();
    double d = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double a = std::max(u[k], 0.0), b = std::max(v[k], 0.0);
        if (a > 0.0 && b > 0.0) d += w[k] * std::pow(a, alpha + 1.0) * std::pow(b, beta + 1.0);
    }
    const double num = p_dirichlet(u, p) / p + p_dirichlet(v, q) / q;
    return d > 0.0 ? num / d : std::numeric_limits<double>::infinity();
}

EigenResult coupled_eig(double p, double q, double alpha, double beta, const MeshPtr& mesh,
                        const QuotientOptions& opt) {
    if (!(p > 1.0) || !(q > 1.0)) throw InputError("coupled eigenvalue requires p, q > 1");
    if (!(alpha > -1.0) || !(beta > -1.0)) throw InputError("coupled eigenvalue requires alpha, beta > -1");
    const double balance = (alpha + 1.0) / p + (beta + 1.0) / q;
    if (std::abs(balance - 1.0) > 1e-12)
        throw InputError("coupled eigenvalue requires (alpha+1)/p + (beta+1)/q = 1");
    const Mesh& m = *mesh;
    const auto& w = m.quad_weights();
    const std::size_t n = m.size();

    auto denom = [&](const Field& u, const Field& v) {
        double d = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            if (u[k] > 0.0 && v[k] > 0.0) d += w[k] * std::pow(u[k], alpha + 1.0) * std::pow(v[k], beta + 1.0);
        return d;
    };
    // The pair scaling (t^{1/p} u, t^{1/q} v) leaves the quotient unchanged.
    auto renormalize = [&](Field& u, Field& v) {
        const double d = denom(u, v);
        if (!(d > 0.0)) return;
        const double su = std::pow(d, -1.0 / p), sv = std::pow(d, -1.0 / q);
        for (double& x : u.values) x *= su;
        for (double& x : v.values) x *= sv;
    };

    struct Block {
        std::vector<double> prev_z, prev_grad;
    };

    auto one = [&](int r) {
        Field u = perturbed_bump(mesh, r, opt.seed, opt.perturbation);
        Field v = perturbed_bump(mesh, r, opt.seed + 7919, opt.perturbation);
        renormalize(u, v);
        QuotientRun run;
        double Q = coupled_quotient(u, v, p, q, alpha, beta);
        run.history.push_back(Q);
        Block blocks[2];
        int stall = 0;
        for (int it = 0; it < opt.max_iter; ++it) {
            const double q_start = Q;
            for (int blk = 0; blk < 2; ++blk) {
                Field& z = blk == 0 ? u : v;
                const Field& other = blk == 0 ? v : u;
                const double ez = blk == 0 ? p : q;
                const double az = blk == 0 ? alpha : beta;
                const double ao = blk == 0 ? beta : alpha;
                const double D = denom(u, v);
                Field gn(mesh);
                p_dirichlet(z, ez, &gn);
                std::vector<double> grad(n, 0.0);
                for (std::size_t k = 0; k < n; ++k) {
                    if (m.on_boundary(k)) continue;
                    double gd = 0.0;
                    if (z[k] > 0.0 && other[k] > 0.0)
                        gd = (az + 1.0) * w[k] * std::pow(z[k], az) * std::pow(other[k], ao + 1.0);
                    grad[k] = (gn[k] / ez - Q * gd) / D;
                }
                const EdgeOperator P = frozen_operator(z, ez);
                Field rhs(mesh);
                for (std::size_t k = 0; k < n; ++k) rhs[k] = -grad[k];
                const auto dir = precondition(P, rhs);
                const double slope = dot(grad, dir);
                if (!(slope < 0.0)) continue;
                double t = D;
                Block& bl = blocks[blk];
                if (!bl.prev_z.empty()) {
                    std::vector<double> s(n), y(n), Ps(n);
                    for (std::size_t k = 0; k < n; ++k) {
                        s[k] = z[k] - bl.prev_z[k];
                        y[k] = grad[k] - bl.prev_grad[k];
                    }
                    P.apply(s, Ps);
                    const double sy = dot(s, y);
                    if (sy > 0.0) {
                        const double bb = dot(s, Ps) / sy;
                        if (bb >= 0.1 * t && bb <= 10.0 * t) t = bb;
                    }
                }
                Field trial(mesh);
                double Qt = Q;
                bool accepted = false;
                for (int b = 0; b < kMaxHalvings; ++b) {
                    for (std::size_t k = 0; k < n; ++k) trial[k] = std::max(z[k] + t * dir[k], 0.0);
                    Qt = blk == 0 ? coupled_quotient(trial, v, p, q, alpha, beta)
                                  : coupled_quotient(u, trial, p, q, alpha, beta);
                    if (Qt <= Q + kArmijo * t * slope) {
                        accepted = true;
                        break;
                    }
                    t *= 0.5;
                }
                if (!accepted) continue;
                bl.prev_z = z.values;
                bl.prev_grad = grad;
                z = std::move(trial);
                renormalize(u, v);
                Q = Qt;
            }
            run.history.push_back(Q);
            run.iters = it + 1;
            if (q_start - Q <= opt.rel_tol * Q) {
                if (++stall >= opt.stall_window) {
                    run.converged = true;
                    break;
                }
            } else {
                stall = 0;
            }
        }
        run.value = coupled_quotient(u, v, p, q, alpha, beta);
        run.z = std::move(u);
        return CoupledRun{std::move(run), std::move(v)};
    };
    auto runs = run_restarts(opt, one);
    EigenResult res;
    std::vector<double> values;
    for (const auto& r : runs) values.push_back(r.u.value);
    const std::size_t best = best_of(values, res.spread);
    res.eigenfield = std::move(runs[best].u.z);
    res.eigenfield_v = std::move(runs[best].v);
    res.lambda = coupled_quotient(res.eigenfield, *res.eigenfield_v, p, q, alpha, beta);
    res.quotient_history = std::move(runs[best].u.history);
    res.iters = runs[best].u.iters;
    res.restarts = static_cast<int>(runs.size());
    res.converged = runs[best].u.converged;
    return res;
}

EmbeddingResult embedding_const(double p, double r, const MeshPtr& mesh, const QuotientOptions& opt) {
    if (!(p > 1.0)) throw InputError("embedding constant requires p > 1");
    if (!(r >= 1.0) || !std::isfinite(r)) throw InputError("embedding constant requires finite r >= 1");
    const double ps = critical_exponent(p, mesh->dim());
    if (p < mesh->dim() && !(r < ps))
        throw InputError("embedding exponent r must stay below the critical exponent p*; supremum not attained");
    QuotientSpec spec;
    spec.num_degree = p;
    spec.den_degree = r;
    spec.num = [p](const Field& z, Field* g) { return p_dirichlet(z, p, g); };
    spec.den = [r](const Field& z, Field* g) { return weighted_power(z, r, nullptr, g); };
    spec.projection = QuotientSpec::Projection::absolute;
    auto runs = run_restarts(opt, [&](int k) {
        return minimize_quotient(spec, perturbed_bump(mesh, k, opt.seed, opt.perturbation), opt);
    });
    EmbeddingResult res;
    double qspread = 0.0;
    const std::size_t best = best_of(run_values(runs), qspread);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& run : runs) {
        const double c = std::pow(run.value, -1.0 / p);
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    res.spread = hi - lo;
    res.maximizer = std::move(runs[best].z);
    res.constant = norm_Lr(res.maximizer, r) / norm_W1p(res.maximizer, p);
    for (double qv : runs[best].history) res.ratio_history.push_back(std::pow(qv, -1.0 / p));
    res.converged = runs[best].converged;
    return res;
}

}  // namespace qles
