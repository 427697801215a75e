#include "qles/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qles {

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    return out;
}

Json seq(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

}  // namespace

void write_field_csv(const std::filesystem::path& path, const Field& f) {
    auto out = open_out(path);
    const Mesh& m = *f.mesh;
    out << (m.dim() == 1 ? "x,value\n" : "x,y,value\n");
    for (std::size_t k = 0; k < f.size(); ++k) {
        out << g17(m.coord(k, 0)) << ',';
        if (m.dim() == 2) out << g17(m.coord(k, 1)) << ',';
        out << g17(f[k]) << '\n';
    }
}

Field read_field_csv(const std::filesystem::path& path, const MeshPtr& mesh) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open field file " + path.string());
    std::string line;
    std::getline(in, line);
    const std::string header = mesh->dim() == 1 ? "x,value" : "x,y,value";
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) throw InputError(path.string() + ": expected header `" + header + "`");
    Field f(mesh);
    std::size_t k = 0;
    const double tol = 1e-9 * std::max(mesh->hi()[0] - mesh->lo()[0], 1.0);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (k >= f.size()) throw InputError(path.string() + ": more rows than mesh nodes");
        std::istringstream row(line);
        std::string cell;
        std::vector<double> cols;
        while (std::getline(row, cell, ',')) cols.push_back(std::stod(cell));
        if (cols.size() != static_cast<std::size_t>(mesh->dim()) + 1)
            throw InputError(path.string() + ": wrong column count on row " + std::to_string(k + 1));
        for (int a = 0; a < mesh->dim(); ++a)
            if (std::abs(cols[a] - mesh->coord(k, a)) > tol)
                throw InputError(path.string() + ": node coordinates do not match the configured mesh");
        f[k++] = cols.back();
    }
    if (k != f.size()) throw InputError(path.string() + ": fewer rows than mesh nodes");
    return f;
}

void write_solve_trace_csv(const std::filesystem::path& path, const SolveTrace& t) {
    auto out = open_out(path);
    out << "stage_eps,iter,energy,residual_norm,step_size\n";
    for (const auto& r : t.rows)
        out << g17(r.stage_eps) << ',' << r.iter << ',' << g17(r.energy) << ',' << g17(r.residual_norm) << ','
            << g17(r.step_size) << '\n';
}

void write_iter_trace_csv(const std::filesystem::path& path, const IterTrace& t) {
    auto out = open_out(path);
    out << "iter,x_norm,delta_norm,res_u,res_v\n";
    for (const auto& r : t.rows)
        out << r.iter << ',' << g17(r.x_norm) << ',' << g17(r.delta_norm) << ',' << g17(r.res_u) << ','
            << g17(r.res_v) << '\n';
}

void write_moser_csv(const std::filesystem::path& path, const MoserLadder& L, const BoundReport& R) {
    auto out = open_out(path);
    out << "k,delta_k,gamma_k,E_k,e_k\n";
    for (int k = 0; k <= L.kmax; ++k) {
        out << k << ',' << g17(L.delta[k]) << ',' << g17(L.gamma[k]) << ',' << g17(R.E[k]) << ',';
        if (std::isfinite(R.e[k])) out << g17(R.e[k]);
        else out << "nan";
        out << '\n';
    }
}

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json to_json(const EigenResult& r) {
    Json j;
    j["lambda"] = num(r.lambda);
    j["restarts"] = r.restarts;
    j["spread"] = num(r.spread);
    j["iters"] = r.iters;
    j["converged"] = r.converged;
    return j;
}

Json to_json(const Certificate& c) {
    Json j;
    j["verdict"] = to_string(c.verdict);
    j["subsolution_ok"] = c.subsolution_ok;
    j["ordering_ok"] = c.ordering_ok;
    j["positivity_ok"] = c.positivity_ok;
    j["min_interior_u"] = num(c.min_interior_u);
    j["subsolution_residual"] = num(c.subsolution_residual);
    j["ordering_gap"] = num(c.ordering_gap);
    j["tolerances"] = {{"subsolution", c.tolerances.subsolution},
                       {"ordering", c.tolerances.ordering},
                       {"positivity_floor", num(c.positivity_floor)}};
    j["reason"] = c.reason;
    return j;
}

Json to_json(const ViolationReport& r) {
    Json j;
    j["check"] = r.check;
    j["checked"] = r.checked;
    j["violations"] = r.violations;
    j["worst_margin"] = num(r.worst_margin);
    Json pt;
    pt["x"] = num(r.worst_point.x);
    pt["y"] = num(r.worst_point.y);
    pt["s"] = num(r.worst_point.s);
    pt["t"] = num(r.worst_point.t);
    pt["other"] = num(r.worst_point.other);
    pt["slot"] = r.worst_point.slot;
    j["worst_point"] = pt;
    return j;
}

Json to_json(const BoundReport& r) {
    Json j;
    j["E_k"] = seq(r.E);
    j["e_k"] = seq(r.e);
    j["zero_fields"] = r.zero_fields;
    j["e0"] = num(r.e0);
    j["bound_u"] = num(r.bound_u);
    j["bound_v"] = num(r.bound_v);
    j["log_form_u"] = num(r.log_form_u);
    j["log_form_v"] = num(r.log_form_v);
    j["discrete_max_u"] = num(r.discrete_max_u);
    j["discrete_max_v"] = num(r.discrete_max_v);
    j["slack_u"] = num(r.slack_u);
    j["slack_v"] = num(r.slack_v);
    j["bound_holds"] = r.bound_holds;
    j["log_AB_fit"] = num(r.log_AB_fit);
    j["A_plus_B_fit"] = num(r.A_plus_B_fit);
    j["closed_form_assumptions_hold"] = r.closed_form_assumptions_hold;
    j["E0"] = num(r.E0);
    j["E0_sobolev_majorant"] = num(r.E0_sobolev_majorant);
    j["E0_theta_majorant"] = r.E0_theta_majorant ? num(*r.E0_theta_majorant) : Json(nullptr);
    j["norm_u"] = seq(r.norm_u);
    j["norm_v"] = seq(r.norm_v);
    j["k_at_200"] = r.k_at_200;
    j["gap_at_200"] = num(r.gap_at_200);
    j["gap_final"] = num(r.gap_final);
    j["flags"] = r.flags;
    return j;
}

Json to_json(const NormWindow& w) {
    Json j;
    j["eps0"] = num(w.eps0);
    j["theta"] = num(w.theta);
    j["theta_lower"] = num(w.theta_lower);
    j["theta_finite"] = w.theta_finite;
    j["K"] = num(w.K);
    j["Cp"] = num(w.Cp);
    j["Cq"] = num(w.Cq);
    j["lambda_pq"] = num(w.lambda_pq);
    j["k_over_lambda"] = num(w.k_over_lambda);
    j["window_empty"] = w.window_empty;
    j["flags"] = w.flags;
    return j;
}

Json to_json(const MoserLadder& L) {
    Json j;
    j["C"] = L.C;
    j["D"] = L.D;
    j["p"] = L.p;
    j["q"] = L.q;
    j["dim"] = L.dim;
    j["kmax"] = L.kmax;
    j["p_star"] = num(L.p_star);
    j["q_star"] = num(L.q_star);
    j["window_vacuous"] = L.window_vacuous;
    j["identity_error"] = L.identity_error();
    j["delta_k"] = seq(L.delta);
    j["gamma_k"] = seq(L.gamma);
    j["flags"] = L.flags;
    return j;
}

void write_json(const std::filesystem::path& path, const Json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

}  // namespace qles
