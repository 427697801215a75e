#include "qles/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace qles {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// s|s|^{e-1}, extended by 0 at s = 0.
double signed_pow(double s, double e) {
    if (s == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(s), e), s);
}

double abs_pow(double s, double e) {
    if (s == 0.0) return e > 0.0 ? 0.0 : (e == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
    return std::pow(std::abs(s), e);
}

std::vector<double> axis_values(double lo, double hi, int points, int log_levels) {
    std::vector<double> v;
    if (points == 1) {
        v.push_back(lo);
    } else {
        for (int i = 0; i < points; ++i) v.push_back(lo + (hi - lo) * i / (points - 1));
    }
    for (int k = 1; k <= log_levels; ++k) {
        const double e = std::pow(10.0, -k);
        for (double c : {e, -e})
            if (c >= lo && c <= hi) v.push_back(c);
    }
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::vector<std::size_t> sample_nodes(const Mesh& mesh, const SampleSpec& spec) {
    if (!spec.nodes.empty()) {
        for (std::size_t k : spec.nodes)
            if (k >= mesh.size()) throw InputError("sample node index out of range");
        return spec.nodes;
    }
    const std::size_t n = mesh.size();
    const std::size_t want = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, spec.max_nodes)));
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < want; ++i) out.push_back(want == 1 ? 0 : i * (n - 1) / (want - 1));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct Sampler {
    const Mesh& mesh;
    std::vector<std::size_t> nodes;
    std::vector<double> s_axis;
    std::vector<double> t_axis;

    Sampler(const Mesh& m, const SampleSpec& spec)
        : mesh(m),
          nodes(sample_nodes(m, spec)),
          s_axis(axis_values(spec.s_lo, spec.s_hi, spec.points, spec.log_levels)),
          t_axis(axis_values(spec.t_lo, spec.t_hi, spec.points, spec.log_levels)) {
        if (spec.points < 1 || !(spec.s_hi >= spec.s_lo) || !(spec.t_hi >= spec.t_lo))
            throw InputError("invalid sample box");
    }

    SamplePoint point(std::size_t node, double s, double t, const char* slot) const {
        SamplePoint p;
        p.x = mesh.coord(node, 0);
        p.y = mesh.coord(node, 1);
        p.s = s;
        p.t = t;
        p.slot = slot;
        return p;
    }
};

void record(ViolationReport& r, double allowed, double actual, const SamplePoint& pt) {
    ++r.checked;
    const double margin = allowed - actual;
    // Equality cases (both sides 0) and rounding at the 1e-12 relative level pass.
    const double slack = 1e-12 * std::max(std::abs(allowed), std::abs(actual));
    if (std::isnan(margin) || margin < -slack) ++r.violations;
    if (std::isnan(margin) || margin < r.worst_margin) {
        r.worst_margin = std::isnan(margin) ? -std::numeric_limits<double>::infinity() : margin;
        r.worst_point = pt;
    }
}

}  // namespace

double critical_exponent(double p, int N) {
    if (p >= N) return std::numeric_limits<double>::infinity();
    return N * p / (N - p);
}

double HypothesisSet::k_sup() const {
    double m = 0.0;
    for (double v : k_pq.values) m = std::max(m, std::abs(v));
    return m;
}

double HypothesisSet::k_inf() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : k_pq.values) m = std::min(m, v);
    return m;
}

void HypothesisSet::validate_growth() const {
    if (!(p > 1.0) || !(q > 1.0)) throw InputError("exponents must satisfy p > 1 and q > 1");
    if (N_formal < 1) throw InputError("formal dimension must be positive");
    if (!(C > 1.0)) throw InputError("growth constant violates 1 < C < min{p*/p, q*/q}: C = " + fmt(C) +
                                     " is not above 1");
    const double cap = std::min(p_star() / p, q_star() / q);
    if (!(C < cap))
        throw InputError("growth constant violates 1 < C < min{p*/p, q*/q}: C = " + fmt(C) +
                         ", min{p*/p, q*/q} = " + fmt(cap));
    if (!(alpha > -1.0) || !(beta > -1.0)) throw InputError("exponents violate alpha > -1, beta > -1");
    const double balance = (alpha + 1.0) / p + (beta + 1.0) / q;
    if (std::abs(balance - 1.0) > 1e-12)
        throw InputError("exponents violate (alpha+1)/p + (beta+1)/q = 1: left side is " + fmt(balance));
    if (k_pq.mesh) {
        for (double v : k_pq.values)
            if (!(v > 0.0) || !std::isfinite(v)) throw InputError("k_pq must be positive and bounded");
    }
}

void HypothesisSet::validate_positivity() const {
    if (!alpha_hat || !beta_hat) throw InputError("positivity data requires alpha_hat and beta_hat");
    if (*alpha_hat + 1.0 == p) throw InputError("positivity exponents violate alpha_hat + 1 != p");
    if (*beta_hat + 1.0 == q) throw InputError("positivity exponents violate beta_hat + 1 != q");
    const double s = (*alpha_hat + 1.0) / p_star() + (*beta_hat + 1.0) / q_star();
    if (!(s < 1.0))
        throw InputError("positivity exponents violate (alpha_hat+1)/p* + (beta_hat+1)/q* < 1: left side is " +
                         fmt(s));
    if (!(delta_p > N_formal / p)) throw InputError("integrability violates delta_p > N/p");
    if (!(delta_q > N_formal / q)) throw InputError("integrability violates delta_q > N/q");
}

void HypothesisSet::validate() const {
    validate_growth();
    if (alpha_hat || beta_hat) validate_positivity();
}

NonlinearityPair example_pair(const Field& k_pq, double alpha, double beta) {
    if (!(alpha > -1.0 && alpha < 0.0) || !(beta > -1.0 && beta < 0.0))
        throw InputError("example exponents must satisfy -1 < alpha, beta < 0");
    if (!k_pq.mesh) throw InputError("example weight needs a mesh");
    auto k = std::make_shared<const std::vector<double>>(k_pq.values);
    // 1/(1+|s|^{-a}) + h(s), with h(s) = s^a for s > 1 and 1 otherwise. At s = 0
    // the first term is 1 because |0|^{-a} = 0 for a < 0.
    auto bracket = [](double s, double a) {
        const double first = 1.0 / (1.0 + std::pow(std::abs(s), -a));
        const double h = s > 1.0 ? std::pow(s, a) : 1.0;
        return first + h;
    };
    NonlinearityPair pair;
    pair.label = "example";
    pair.f = [k, alpha, beta, bracket](std::size_t node, double s, double t) {
        return 0.5 * (*k)[node] * bracket(s, alpha) * abs_pow(t, beta + 1.0);
    };
    pair.g = [k, alpha, beta, bracket](std::size_t node, double s, double t) {
        return 0.5 * (*k)[node] * abs_pow(s, alpha + 1.0) * bracket(t, beta);
    };
    return pair;
}

ProblemSpec example_problem(const MeshPtr& mesh, double p, double q, double alpha, double beta, double k,
                            double C) {
    ProblemSpec prob;
    prob.p = p;
    prob.q = q;
    prob.mesh = mesh;
    prob.label = "example";
    prob.hyp.p = p;
    prob.hyp.q = q;
    prob.hyp.C = C;
    prob.hyp.alpha = alpha;
    prob.hyp.beta = beta;
    prob.hyp.N_formal = mesh->dim();
    prob.hyp.k_pq = Field::constant(mesh, k);
    prob.hyp.validate_growth();
    prob.pair = example_pair(prob.hyp.k_pq, alpha, beta);
    return prob;
}

Field eval_f(const NonlinearityPair& pair, const Field& u, const Field& v) {
    if (u.mesh != v.mesh) throw InputError("u and v must share one mesh");
    Field out(u.mesh);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = pair.f(k, u[k], v[k]);
    return out;
}

Field eval_g(const NonlinearityPair& pair, const Field& u, const Field& v) {
    if (u.mesh != v.mesh) throw InputError("u and v must share one mesh");
    Field out(u.mesh);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = pair.g(k, u[k], v[k]);
    return out;
}

SampleSpec SampleSpec::positive_cone(double hi) {
    SampleSpec s;
    s.s_lo = 0.0;
    s.t_lo = 0.0;
    s.s_hi = hi;
    s.t_hi = hi;
    return s;
}

ViolationReport check_H2(const NonlinearityPair& pair, const HypothesisSet& hyp, const MeshPtr& mesh,
                         const SampleSpec& spec, LatticeReading reading) {
    Sampler smp(*mesh, spec);
    ViolationReport r;
    r.check = reading == LatticeReading::paper ? "H2" : "H2-standard";
    const double pc = hyp.p * hyp.C, qc = hyp.q * hyp.C;
    auto eval = [&](std::size_t node, double s, double t) {
        const double sf = std::abs(s * pair.f(node, s, t));
        const double tg = std::abs(t * pair.g(node, s, t));
        const double k = hyp.k_pq.mesh ? hyp.k_pq[node] : 1.0;
        const double mixed = abs_pow(s, hyp.alpha + 1.0) * abs_pow(t, hyp.beta + 1.0);
        const double power = std::pow(std::abs(s), pc) + std::pow(std::abs(t), qc);
        double lhs, cap;
        if (reading == LatticeReading::paper) {
            lhs = std::max(sf, tg);
            cap = std::min(mixed, power);
        } else {
            lhs = std::min(sf, tg);
            cap = std::max(mixed, power);
        }
        record(r, k * cap, lhs, smp.point(node, s, t, "fg"));
    };
    for (std::size_t node : smp.nodes)
        for (double s : smp.s_axis)
            for (double t : smp.t_axis) eval(node, s, t);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> ds(spec.s_lo, spec.s_hi), dt(spec.t_lo, spec.t_hi);
    std::uniform_int_distribution<std::size_t> dn(0, smp.nodes.size() - 1);
    for (int i = 0; i < spec.random_samples; ++i) {
        const std::size_t node = smp.nodes[dn(rng)];
        const double s = ds(rng);
        const double t = dt(rng);
        eval(node, s, t);
    }
    return r;
}

ViolationReport check_H3(const NonlinearityPair& pair, const MeshPtr& mesh, const SampleSpec& spec) {
    Sampler smp(*mesh, spec);
    ViolationReport r;
    r.check = "H3";
    // (f(s) - f(sb))(s - sb) <= 0; the arguments exclude zero.
    auto f_pair = [&](std::size_t node, double s, double sb, double t) {
        const double prod = (pair.f(node, s, t) - pair.f(node, sb, t)) * (s - sb);
        auto pt = smp.point(node, s, t, "f");
        pt.other = sb;
        record(r, 0.0, prod, pt);
    };
    auto g_pair = [&](std::size_t node, double s, double t, double tb) {
        const double prod = (pair.g(node, s, t) - pair.g(node, s, tb)) * (t - tb);
        auto pt = smp.point(node, s, t, "g");
        pt.other = tb;
        record(r, 0.0, prod, pt);
    };
    std::vector<double> s_nz, t_nz;
    for (double s : smp.s_axis)
        if (s != 0.0) s_nz.push_back(s);
    for (double t : smp.t_axis)
        if (t != 0.0) t_nz.push_back(t);
    // Consecutive pairs on the sorted axes, against every value of the other argument.
    for (std::size_t node : smp.nodes) {
        for (double t : smp.t_axis)
            for (std::size_t i = 0; i + 1 < s_nz.size(); ++i) f_pair(node, s_nz[i], s_nz[i + 1], t);
        for (double s : smp.s_axis)
            for (std::size_t i = 0; i + 1 < t_nz.size(); ++i) g_pair(node, s, t_nz[i], t_nz[i + 1]);
    }
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> ds(spec.s_lo, spec.s_hi), dt(spec.t_lo, spec.t_hi);
    std::uniform_int_distribution<std::size_t> dn(0, smp.nodes.size() - 1);
    for (int i = 0; i < spec.random_samples; ++i) {
        const std::size_t node = smp.nodes[dn(rng)];
        const double s = ds(rng), sb = ds(rng), t = dt(rng), tb = dt(rng);
        if (s != 0.0 && sb != 0.0) f_pair(node, s, sb, t);
        if (t != 0.0 && tb != 0.0) g_pair(node, s, t, tb);
    }
    return r;
}

ViolationReport check_H4(const NonlinearityPair& pair, const HypothesisSet& hyp, const MeshPtr& mesh,
                         const SampleSpec& spec) {
    if (!hyp.alpha_hat || !hyp.beta_hat) throw InputError("check_H4 requires alpha_hat and beta_hat");
    Sampler smp(*mesh, spec);
    const double ah = *hyp.alpha_hat, bh = *hyp.beta_hat;
    auto weight = [](const Field& w, std::size_t node) { return w.mesh ? w[node] : 0.0; };
    ViolationReport r;
    r.check = "H4";
    auto eval = [&](std::size_t node, double s, double t) {
        const double lf = weight(hyp.a_p, node) * signed_pow(s, ah) * abs_pow(t, bh + 1.0) +
                          weight(hyp.b_p, node) * signed_pow(s, hyp.p - 1.0);
        const double lg = weight(hyp.a_q, node) * abs_pow(s, ah + 1.0) * signed_pow(t, bh) +
                          weight(hyp.b_q, node) * signed_pow(t, hyp.q - 1.0);
        // Inequality f >= lower: allowed margin is f - lower.
        record(r, pair.f(node, s, t), lf, smp.point(node, s, t, "f"));
        record(r, pair.g(node, s, t), lg, smp.point(node, s, t, "g"));
    };
    for (std::size_t node : smp.nodes)
        for (double s : smp.s_axis)
            for (double t : smp.t_axis) eval(node, s, t);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> ds(spec.s_lo, spec.s_hi), dt(spec.t_lo, spec.t_hi);
    std::uniform_int_distribution<std::size_t> dn(0, smp.nodes.size() - 1);
    for (int i = 0; i < spec.random_samples; ++i) {
        const std::size_t node = smp.nodes[dn(rng)];
        const double s = ds(rng);
        const double t = dt(rng);
        eval(node, s, t);
    }
    return r;
}

std::pair<double, double> fit_H4_constants(const NonlinearityPair& pair, double alpha_hat, double beta_hat,
                                           const MeshPtr& mesh, const SampleSpec& spec) {
    Sampler smp(*mesh, spec);
    double cf = std::numeric_limits<double>::infinity();
    double cg = std::numeric_limits<double>::infinity();
    for (std::size_t node : smp.nodes) {
        for (double s : smp.s_axis) {
            for (double t : smp.t_axis) {
                const double mf = signed_pow(s, alpha_hat) * abs_pow(t, beta_hat + 1.0);
                const double mg = abs_pow(s, alpha_hat + 1.0) * signed_pow(t, beta_hat);
                if (mf > 0.0 && std::isfinite(mf)) cf = std::min(cf, pair.f(node, s, t) / mf);
                if (mg > 0.0 && std::isfinite(mg)) cg = std::min(cg, pair.g(node, s, t) / mg);
            }
        }
    }
    // Shave the last bits so the fitted constants pass the sampled check strictly.
    return {cf * (1.0 - 1e-12), cg * (1.0 - 1e-12)};
}

NonlinearityPair adversarial_pair(double p, double C) {
    NonlinearityPair pair;
    pair.label = "adversarial";
    const double e = 2.0 * p * C;
    pair.f = [e](std::size_t, double s, double) { return s * std::pow(std::abs(s), e); };
    pair.g = [](std::size_t, double, double) { return 0.0; };
    return pair;
}

ManufacturedCase manufactured(double p, const std::string& name, int n) {
    ManufacturedCase mc;
    mc.name = name;
    mc.p = p;
    if (name == "torsion_1d") {
        if (!(p > 1.0)) throw InputError("torsion_1d requires p > 1");
        auto mesh = Mesh::interval(-1.0, 1.0, n);
        const double e = p / (p - 1.0), c = (p - 1.0) / p;
        mc.u_exact = Field::sample(mesh, [&](double x, double) { return c * (1.0 - std::pow(std::abs(x), e)); });
        mc.u_exact.zero_boundary();
        mc.h = Field::constant(mesh, 1.0);
        return mc;
    }
    if (name == "sine_p2") {
        if (p != 2.0) throw InputError("sine_p2 is defined for p = 2 only");
        auto mesh = Mesh::interval(0.0, 1.0, n);
        const double pi = std::numbers::pi;
        mc.u_exact = Field::sample(mesh, [&](double x, double) { return std::sin(pi * x); });
        mc.u_exact.zero_boundary();
        mc.h = Field::sample(mesh, [&](double x, double) { return pi * pi * std::sin(pi * x); });
        return mc;
    }
    throw InputError("unknown manufactured case '" + name + "' (known: torsion_1d, sine_p2)");
}

}  // namespace qles
