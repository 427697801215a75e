#include "qles/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "qles/mesh.hpp"

namespace qles {

namespace {

struct KeyInfo {
    const char* key;
    const char* def;
    const char* help;
};

// clang-format off
constexpr KeyInfo kKeys[] = {
    {"problem.name", "example", "example | zero | adversarial"},
    {"problem.p", "1.5", "exponent of the u equation"},
    {"problem.q", "1.5", "exponent of the v equation"},
    {"problem.alpha", "-0.25", "coupling exponent alpha"},
    {"problem.beta", "-0.25", "coupling exponent beta"},
    {"problem.k", "0.1", "constant weight k_pq"},
    {"problem.C", "2", "growth constant C"},
    {"mesh.dim", "2", "1 or 2"},
    {"mesh.n", "64", "interior nodes per axis"},
    {"mesh.lo", "0", "lower domain corner (each axis)"},
    {"mesh.hi", "1", "upper domain corner (each axis)"},
    {"plap.eps_start", "1e-2", "first regularization level"},
    {"plap.eps_min", "1e-10", "last regularization level"},
    {"plap.eps_factor", "0.1", "ladder ratio"},
    {"plap.tol", "1e-8", "residual tolerance per level"},
    {"plap.max_iter", "500", "iterations per level"},
    {"picard.theta", "0.5", "damping"},
    {"picard.tol_fix", "1e-8", "fixed-point increment tolerance"},
    {"picard.tol_res", "1e-6", "weak residual tolerance"},
    {"picard.max_iter", "400", "outer iterations"},
    {"picard.patience", "60", "iterations without progress before giving up"},
    {"picard.delta", "1", "amplitude of the starting bump"},
    {"homotopy.ladder", "0.25,0.5,0.75,1", "increasing tau values ending at 1"},
    {"sweep.taus", "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1", "tau values for sweep-tau"},
    {"eigen.kind", "plap", "plap | coupled | embedding"},
    {"eigen.p", "auto", "exponent (auto: problem.p)"},
    {"eigen.r", "3", "target Lebesgue exponent for kind = embedding"},
    {"eigen.weight", "1", "constant weight b"},
    {"eigen.restarts", "3", "seeded restarts"},
    {"eigen.max_iter", "3000", "descent iterations per restart"},
    {"fibering.alpha_hat", "0", "positivity exponent alpha_hat"},
    {"fibering.beta_hat", "0", "positivity exponent beta_hat"},
    {"fibering.lambda", "0", "lambda"},
    {"fibering.a", "auto", "weight a (auto: largest constant on the box)"},
    {"fibering.b", "0", "constant weight b"},
    {"fibering.box", "10", "upper edge of the positive box used to fit a"},
    {"fibering.allow_regime_ii", "false", "accept lambda >= lambda_b with a warning"},
    {"moser.C", "auto", "ladder C (auto: problem.C)"},
    {"moser.D", "0.5", "ladder D"},
    {"moser.kmax", "20", "ladder length"},
    {"check.pair", "auto", "example | adversarial (auto: problem.name)"},
    {"check.points", "201", "grid points per axis"},
    {"check.random", "1000", "random samples"},
    {"check.range", "10", "sample box half-width"},
    {"validate.case", "sine_p2", "sine_p2 | torsion_1d"},
    {"validate.p", "auto", "exponent (auto: 2 for sine_p2, problem.p otherwise)"},
    {"validate.n", "1024", "interior nodes"},
    {"validate.tol", "1e-6", "max nodal error tolerance"},
    {"input.u", "", "u field CSV (empty: solve the problem)"},
    {"input.v", "", "v field CSV"},
    {"run.seed", "1", "seed for restarts and samples"},
    {"run.out", "out", "output directory"},
    {"run.concurrent", "false", "run independent sub-solves on two threads"},
};
// clang-format on

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

RunConfig::RunConfig() {
    for (const auto& k : kKeys) values_[k.key] = k.def;
}

void RunConfig::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    load_text(ss.str(), path.string());
}

void RunConfig::load_text(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::string> unknown;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError(source + ":" + std::to_string(lineno) + ": expected `section.key = value`");
        const std::string key = trim(line.substr(0, eq));
        if (!known(key)) {
            unknown.push_back(key);
            continue;
        }
        values_[key] = trim(line.substr(eq + 1));
    }
    if (!unknown.empty()) {
        std::string msg = "unknown config keys in " + source + ":";
        for (const auto& k : unknown) msg += " " + k;
        throw InputError(msg);
    }
}

void RunConfig::set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw InputError("override `" + assignment + "` is not key=value");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (!known(key)) throw InputError("unknown config keys: " + key);
    values_[key] = value;
}

const std::string& RunConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw InputError("unknown config key " + key);
    return it->second;
}

double RunConfig::get_double(const std::string& key) const {
    const std::string& s = get(key);
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InputError(key + " = `" + s + "` is not a number");
    }
}

double RunConfig::get_double_or(const std::string& key, double fallback) const {
    return get(key) == "auto" ? fallback : get_double(key);
}

int RunConfig::get_int(const std::string& key) const {
    const std::string& s = get(key);
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InputError(key + " = `" + s + "` is not an integer");
    }
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
    const std::string& s = get(key);
    try {
        std::size_t used = 0;
        if (!s.empty() && s[0] == '-') throw std::invalid_argument(s);
        const auto v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InputError(key + " = `" + s + "` is not a nonnegative integer");
    }
}

bool RunConfig::get_bool(const std::string& key) const {
    const std::string& s = get(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw InputError(key + " = `" + s + "` is not a boolean");
}

std::vector<double> RunConfig::get_list(const std::string& key) const {
    std::vector<double> out;
    std::istringstream in(get(key));
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InputError(key + " entry `" + item + "` is not a number");
        }
    }
    if (out.empty()) throw InputError(key + " is empty");
    return out;
}

std::string RunConfig::help_text() {
    std::string s = "Config keys (section.key = value):\n";
    for (const auto& k : kKeys) {
        s += "  ";
        s += k.key;
        s += " [";
        s += k.def;
        s += "]  ";
        s += k.help;
        s += "\n";
    }
    return s;
}

}  // namespace qles
