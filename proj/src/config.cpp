#include "radiff/config.hpp"

#include <cctype>
#include <cstdio>
#include <sstream>

namespace radiff {

namespace {

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += "\n";
        out += parts[i];
    }
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string list17(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += num17(v[i]);
    }
    return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errs)
    : std::runtime_error(join(errs)), errors(std::move(errs)) {}

namespace {

struct Parser {
    RunConfig cfg;
    std::vector<std::string> errors;
    int lineno = 0;

    void err(const std::string& msg) {
        errors.push_back("line " + std::to_string(lineno) + ": " + msg);
    }

    bool parse_double(const std::string& v, double& out) {
        try {
            std::size_t pos = 0;
            out = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return true;
        } catch (...) {
            err("'" + v + "' is not a number");
            return false;
        }
    }

    bool parse_int(const std::string& v, int& out) {
        try {
            std::size_t pos = 0;
            out = std::stoi(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return true;
        } catch (...) {
            err("'" + v + "' is not an integer");
            return false;
        }
    }

    bool parse_bool(const std::string& v, bool& out) {
        if (v == "true") { out = true; return true; }
        if (v == "false") { out = false; return true; }
        err("'" + v + "' is not a boolean (expected true or false)");
        return false;
    }

    bool parse_list(const std::string& v, std::vector<double>& out) {
        out.clear();
        if (trim(v).empty()) return true;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            double x;
            if (!parse_double(trim(item), x)) return false;
            out.push_back(x);
        }
        return true;
    }

    bool parse_vec3(const std::string& v, Vec3& out) {
        std::vector<double> list;
        if (!parse_list(v, list)) return false;
        if (list.size() != 3) {
            err("expected 3 comma-separated numbers");
            return false;
        }
        out = {list[0], list[1], list[2]};
        return true;
    }

    void positive_int(const std::string& key, const std::string& v, int& out, int lo) {
        int x;
        if (!parse_int(v, x)) return;
        if (x < lo) { err(key + " must be >= " + std::to_string(lo)); return; }
        out = x;
    }

    void bounded(const std::string& key, const std::string& v, double& out, double lo,
                 double hi, bool open) {
        double x;
        if (!parse_double(v, x)) return;
        const bool ok = open ? (x > lo && x < hi) : (x >= lo && x <= hi);
        if (!ok) {
            err(key + " must lie in " + (open ? "(" : "[") + num17(lo) + ", " + num17(hi) +
                (open ? ")" : "]"));
            return;
        }
        out = x;
    }

    void positive(const std::string& key, const std::string& v, double& out) {
        double x;
        if (!parse_double(v, x)) return;
        if (!(x > 0.0)) { err(key + " must be positive"); return; }
        out = x;
    }

    void nonnegative(const std::string& key, const std::string& v, double& out) {
        double x;
        if (!parse_double(v, x)) return;
        if (x < 0.0) { err(key + " must be nonnegative"); return; }
        out = x;
    }

    void choice(const std::string& key, const std::string& v, std::string& out,
                const std::vector<std::string>& allowed) {
        for (const auto& c : allowed)
            if (v == c) { out = v; return; }
        std::string opts;
        for (std::size_t i = 0; i < allowed.size(); ++i)
            opts += (i ? " | " : "") + allowed[i];
        err(key + " must be one of: " + opts);
    }

    void assign(const std::string& section, const std::string& key, const std::string& v) {
        if (section == "grid") {
            if (key == "nx") positive_int(key, v, cfg.nx, 1);
            else if (key == "ny") positive_int(key, v, cfg.ny, 1);
            else if (key == "nz") positive_int(key, v, cfg.nz, 1);
            else if (key == "lx") positive(key, v, cfg.lx);
            else if (key == "ly") positive(key, v, cfg.ly);
            else if (key == "lz") positive(key, v, cfg.lz);
            else err("unknown key '" + key + "' in [grid]");
        } else if (section == "quadrature") {
            if (key == "n_polar") positive_int(key, v, cfg.n_polar, 2);
            else if (key == "n_azimuth") positive_int(key, v, cfg.n_azimuth, 4);
            else err("unknown key '" + key + "' in [quadrature]");
        } else if (section == "model") {
            if (key == "epsilon") bounded(key, v, cfg.epsilon, 0.0, 1.0, true);
            else if (key == "u_preset")
                choice(key, v, cfg.u_preset,
                       {"zero", "constant", "taylor_green", "compressible_sine"});
            else if (key == "u_amplitude") { double x; if (parse_double(v, x)) cfg.u_amplitude = x; }
            else if (key == "u_vector") parse_vec3(v, cfg.u_vector);
            else err("unknown key '" + key + "' in [model]");
        } else if (section == "data") {
            if (key == "theta0_preset") choice(key, v, cfg.theta0_preset, {"constant", "sine"});
            else if (key == "a") positive(key, v, cfg.a);
            else if (key == "b") { double x; if (parse_double(v, x)) cfg.b = x; }
            else if (key == "g_preset") choice(key, v, cfg.g_preset, {"isotropic", "directional"});
            else if (key == "eta") nonnegative(key, v, cfg.eta);
            else err("unknown key '" + key + "' in [data]");
        } else if (section == "run") {
            if (key == "dt_policy") choice(key, v, cfg.dt_policy, {"cfl", "fixed"});
            else if (key == "dt") nonnegative(key, v, cfg.dt);
            else if (key == "cfl") {
                double x;
                if (parse_double(v, x)) {
                    if (x > 0.0 && x <= 1.0) cfg.cfl = x;
                    else err("cfl must lie in (0, 1]");
                }
            }
            else if (key == "t_end") positive(key, v, cfg.t_end);
            else if (key == "snapshots") parse_list(v, cfg.snapshots);
            else if (key == "newton_tol") positive(key, v, cfg.newton_tol);
            else if (key == "diffusion_tol") positive(key, v, cfg.diffusion_tol);
            else if (key == "tau_max") positive(key, v, cfg.tau_max);
            else if (key == "dtau") positive(key, v, cfg.dtau);
            else if (key == "limit_dt") positive(key, v, cfg.limit_dt);
            else err("unknown key '" + key + "' in [run]");
        } else if (section == "sweep") {
            if (key == "epsilons") parse_list(v, cfg.epsilons);
            else if (key == "t_eval") parse_list(v, cfg.t_eval);
            else if (key == "refinement_check") parse_bool(v, cfg.refinement_check);
            else err("unknown key '" + key + "' in [sweep]");
        } else {
            err("unknown section [" + section + "]");
        }
    }
};

const char* kSections[] = {"grid", "quadrature", "model", "data", "run", "sweep"};

}  // namespace

RunConfig parse_config(const std::string& text) {
    Parser p;
    std::istringstream stream(text);
    std::string raw, section;
    while (std::getline(stream, raw)) {
        ++p.lineno;
        const std::size_t hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                p.err("malformed section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            bool known = false;
            for (const char* s : kSections) known = known || section == s;
            if (!known) p.err("unknown section [" + section + "]");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            p.err("expected 'key = value'");
            continue;
        }
        if (section.empty()) {
            p.err("key outside any section");
            continue;
        }
        p.assign(section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }

    // cross-field constraints
    RunConfig& c = p.cfg;
    p.lineno = 0;
    if (c.n_azimuth % 2 != 0) p.errors.push_back("quadrature: n_azimuth must be even");
    if (c.theta0_preset == "sine" && !(c.a - std::abs(c.b) > 0.0))
        p.errors.push_back("data: sine preset requires a - |b| > 0");
    if (c.dt_policy == "fixed" && !(c.dt > 0.0))
        p.errors.push_back("run: fixed dt policy requires dt > 0");
    for (std::size_t i = 1; i < c.snapshots.size(); ++i)
        if (!(c.snapshots[i] > c.snapshots[i - 1])) {
            p.errors.push_back("run: snapshots must be strictly increasing");
            break;
        }
    for (double s : c.snapshots)
        if (!(s > 0.0)) {
            p.errors.push_back("run: snapshots must be positive");
            break;
        }
    if (c.epsilons.empty()) p.errors.push_back("sweep: epsilons must be nonempty");
    for (double e : c.epsilons)
        if (!(e > 0.0 && e < 1.0)) {
            p.errors.push_back("sweep: epsilons must lie in (0, 1)");
            break;
        }
    if (c.t_eval.empty()) p.errors.push_back("sweep: t_eval must be nonempty");
    for (double t : c.t_eval)
        if (!(t > 0.0)) {
            p.errors.push_back("sweep: t_eval must be positive");
            break;
        }

    if (!p.errors.empty()) throw ConfigError(std::move(p.errors));
    return p.cfg;
}

std::string echo_config(const RunConfig& c) {
    std::ostringstream out;
    out << "[grid]\n";
    out << "nx = " << c.nx << "\nny = " << c.ny << "\nnz = " << c.nz << "\n";
    out << "lx = " << num17(c.lx) << "\nly = " << num17(c.ly) << "\nlz = " << num17(c.lz) << "\n";
    out << "\n[quadrature]\n";
    out << "n_polar = " << c.n_polar << "\nn_azimuth = " << c.n_azimuth << "\n";
    out << "\n[model]\n";
    out << "epsilon = " << num17(c.epsilon) << "\n";
    out << "u_preset = " << c.u_preset << "\n";
    out << "u_amplitude = " << num17(c.u_amplitude) << "\n";
    out << "u_vector = " << num17(c.u_vector[0]) << ", " << num17(c.u_vector[1]) << ", "
        << num17(c.u_vector[2]) << "\n";
    out << "\n[data]\n";
    out << "theta0_preset = " << c.theta0_preset << "\n";
    out << "a = " << num17(c.a) << "\nb = " << num17(c.b) << "\n";
    out << "g_preset = " << c.g_preset << "\n";
    out << "eta = " << num17(c.eta) << "\n";
    out << "\n[run]\n";
    out << "dt_policy = " << c.dt_policy << "\n";
    out << "dt = " << num17(c.dt) << "\n";
    out << "cfl = " << num17(c.cfl) << "\n";
    out << "t_end = " << num17(c.t_end) << "\n";
    out << "snapshots = " << list17(c.snapshots) << "\n";
    out << "newton_tol = " << num17(c.newton_tol) << "\n";
    out << "diffusion_tol = " << num17(c.diffusion_tol) << "\n";
    out << "tau_max = " << num17(c.tau_max) << "\n";
    out << "dtau = " << num17(c.dtau) << "\n";
    out << "limit_dt = " << num17(c.limit_dt) << "\n";
    out << "\n[sweep]\n";
    out << "epsilons = " << list17(c.epsilons) << "\n";
    out << "t_eval = " << list17(c.t_eval) << "\n";
    out << "refinement_check = " << (c.refinement_check ? "true" : "false") << "\n";
    return out.str();
}

VelocityField RunConfig::velocity() const {
    if (u_preset == "constant") return VelocityField::constant(u_vector);
    if (u_preset == "taylor_green") return VelocityField::taylor_green(u_amplitude);
    if (u_preset == "compressible_sine") return VelocityField::compressible_sine(u_amplitude);
    return VelocityField::zero();
}

DataPreset RunConfig::data_preset() const {
    DataPreset d;
    d.theta = theta0_preset == "constant" ? DataPreset::Theta::Constant : DataPreset::Theta::Sine;
    d.a = a;
    d.b = b;
    d.g = g_preset == "isotropic" ? DataPreset::Perturbation::Isotropic
                                  : DataPreset::Perturbation::Directional;
    d.eta = eta;
    return d;
}

SweepConfig RunConfig::sweep_config() const {
    SweepConfig s;
    s.epsilons = epsilons;
    s.t_eval = t_eval;
    s.grid = grid();
    s.n_polar = n_polar;
    s.n_azimuth = n_azimuth;
    s.data = data_preset();
    s.u = velocity();
    s.refinement_check = refinement_check;
    s.cfl = cfl;
    s.tau_max = tau_max;
    s.dtau = dtau;
    s.limit_dt = limit_dt;
    return s;
}

}  // namespace radiff
