#ifndef CTRW_EXPERIMENT_HPP
#define CTRW_EXPERIMENT_HPP

// Experiment driver: config files, run kinds (diffuse, react-diffuse,
// dispersion, predict, classify), figure-ready data tables, and manifests.
//
// Config format: flat INI-style text, '#' comments, [section] headers,
// key = value lines. Every run writes a manifest that is itself a valid
// config resolving all defaults, so a run can be re-executed from its
// manifest alone. Output tables print doubles with 17 significant digits
// and use fully deterministic row ordering, so identical configs produce
// byte-identical files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ctrw/analysis.hpp"
#include "ctrw/dynamics.hpp"
#include "ctrw/errors.hpp"
#include "ctrw/kinetics.hpp"
#include "ctrw/laplacian.hpp"
#include "ctrw/network.hpp"
#include "ctrw/version.hpp"

namespace ctrw {

struct ConfigError : InvalidParameterError {
    using InvalidParameterError::InvalidParameterError;
};

namespace detail {

inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Flat key-value config document.

class KeyValueConfig {
  public:
    static KeyValueConfig parse_string(const std::string& text) {
        KeyValueConfig cfg;
        std::istringstream in(text);
        std::string line, section;
        long line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw ParseError("unterminated section header", line_no);
                section = detail::trim(line.substr(1, line.size() - 2));
                if (section.empty()) throw ParseError("empty section name", line_no);
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty()) throw ParseError("empty key", line_no);
            if (section.empty()) throw ParseError("key outside any [section]", line_no);
            cfg.values_[section + "." + key] = value;
        }
        return cfg;
    }

    static KeyValueConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open config: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_string(ss.str());
    }

    bool has(const std::string& section, const std::string& key) const {
        return values_.count(section + "." + key) > 0;
    }

    std::string get_string(const std::string& section, const std::string& key) const {
        const auto it = values_.find(section + "." + key);
        if (it == values_.end()) throw ConfigError(section + "." + key + ": missing required key");
        return it->second;
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
        const auto it = values_.find(section + "." + key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& section, const std::string& key, double fallback) const {
        if (!has(section, key)) return fallback;
        return parse_double(section, key, get_string(section, key));
    }

    double get_double(const std::string& section, const std::string& key) const {
        return parse_double(section, key, get_string(section, key));
    }

    long long get_int(const std::string& section, const std::string& key, long long fallback) const {
        if (!has(section, key)) return fallback;
        const std::string v = get_string(section, key);
        try {
            std::size_t pos = 0;
            const long long r = std::stoll(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return r;
        } catch (...) {
            throw ConfigError(section + "." + key + ": not an integer: '" + v + "'");
        }
    }

    std::uint64_t get_uint64(const std::string& section, const std::string& key,
                             std::uint64_t fallback) const {
        if (!has(section, key)) return fallback;
        const std::string v = get_string(section, key);
        try {
            std::size_t pos = 0;
            const unsigned long long r = std::stoull(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return r;
        } catch (...) {
            throw ConfigError(section + "." + key + ": not an unsigned integer: '" + v + "'");
        }
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
        if (!has(section, key)) return fallback;
        const std::string v = get_string(section, key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError(section + "." + key + ": not a boolean: '" + v + "'");
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

  private:
    double parse_double(const std::string& section, const std::string& key,
                        const std::string& v) const {
        try {
            std::size_t pos = 0;
            const double r = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return r;
        } catch (...) {
            throw ConfigError(section + "." + key + ": not a number: '" + v + "'");
        }
    }

    std::map<std::string, std::string> values_;
};

// ---------------------------------------------------------------------------
// Resolved experiment configuration.

enum class ExperimentKind { diffuse, react_diffuse, dispersion, predict, classify };

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::diffuse: return "diffuse";
        case ExperimentKind::react_diffuse: return "react-diffuse";
        case ExperimentKind::dispersion: return "dispersion";
        case ExperimentKind::predict: return "predict";
        case ExperimentKind::classify: return "classify";
    }
    return "?";
}

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::diffuse;
    std::string out_dir = "out";
    std::uint64_t seed = 0;

    // network
    bool network_from_file = false;
    std::string network_path;
    GeneratorConfig generator;

    // laplacian + species diffusion rates
    LaplacianVariant laplacian_variant = LaplacianVariant::case_a;
    double alpha = 1.0;
    double alpha_u = 1.0;
    double alpha_v = 1.0;
    bool rescale_case_b = true;
    double s = 1.0;

    // kinetics
    std::string model_name = "none";
    double logistic_r = 1.0;
    double linear_a = 1.0;
    double linear_b = 1.0;
    GMParams gm;

    // integration
    IntegratorConfig integrator;
    double snapshot_every = 0.0;

    // initial condition
    double init_amplitude = 0.01;
    double init_value = 1.0;

    // dispersion sweep
    double s_min = 1e-4;
    double s_max = 1e2;
    int s_points = 200;
    DispersionMethod dispersion_method = DispersionMethod::automatic;
    std::optional<double> report_s;  // also emit a full StabilityReport at this s

    static ExperimentConfig from_config(const KeyValueConfig& kv);
    static ExperimentConfig from_file(const std::string& path) {
        return from_config(KeyValueConfig::parse_file(path));
    }

    std::string manifest_string() const;
};

namespace detail {

inline const std::map<std::string, std::set<std::string>>& allowed_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"run", {"kind", "out_dir", "seed"}},
        {"network", {"variant", "J", "k", "p", "path"}},
        {"laplacian", {"variant", "alpha", "alpha_u", "alpha_v", "rescale_case_b", "s"}},
        {"kinetics", {"model", "r", "a", "b", "c", "rho", "rho0", "mu", "nu", "c_d"}},
        {"integrator",
         {"method", "rtol", "atol", "dt", "dt_init", "dt_min", "dt_max", "t_max", "steady_tol",
          "snapshot_every"}},
        {"init", {"amplitude", "value"}},
        {"dispersion", {"s_min", "s_max", "points", "method", "report_s"}},
    };
    return keys;
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::from_config(const KeyValueConfig& kv) {
    for (const auto& [path, value] : kv.entries()) {
        const auto dot = path.find('.');
        const std::string section = path.substr(0, dot);
        const std::string key = path.substr(dot + 1);
        const auto it = detail::allowed_keys().find(section);
        if (it == detail::allowed_keys().end())
            throw ConfigError(section + ": unknown section");
        if (!it->second.count(key)) throw ConfigError(path + ": unknown key");
        (void)value;
    }

    ExperimentConfig c;
    const std::string kind = kv.get_string("run", "kind");
    if (kind == "diffuse")
        c.kind = ExperimentKind::diffuse;
    else if (kind == "react-diffuse")
        c.kind = ExperimentKind::react_diffuse;
    else if (kind == "dispersion")
        c.kind = ExperimentKind::dispersion;
    else if (kind == "predict")
        c.kind = ExperimentKind::predict;
    else if (kind == "classify")
        c.kind = ExperimentKind::classify;
    else
        throw ConfigError("run.kind: unknown value '" + kind + "'");
    c.out_dir = kv.get_string("run", "out_dir", "out");
    c.seed = kv.get_uint64("run", "seed", 0);

    const std::string variant = kv.get_string("network", "variant");
    if (variant == "file") {
        c.network_from_file = true;
        c.network_path = kv.get_string("network", "path");
    } else {
        if (variant == "ba")
            c.generator.variant = NetworkVariant::ba;
        else if (variant == "ws")
            c.generator.variant = NetworkVariant::ws;
        else if (variant == "ring")
            c.generator.variant = NetworkVariant::ring;
        else if (variant == "complete")
            c.generator.variant = NetworkVariant::complete;
        else if (variant == "star")
            c.generator.variant = NetworkVariant::star;
        else if (variant == "path")
            c.generator.variant = NetworkVariant::path;
        else
            throw ConfigError("network.variant: unknown value '" + variant + "'");
        c.generator.vertex_count = static_cast<int>(kv.get_int("network", "J", 50));
        c.generator.k = static_cast<int>(kv.get_int("network", "k", 3));
        c.generator.p = kv.get_double("network", "p", 0.1);
        c.generator.rng_seed = c.seed;
        if (c.generator.vertex_count < 2) throw ConfigError("network.J: must be at least 2");
        if ((variant == "ba" || variant == "ws") &&
            (c.generator.k < 1 || c.generator.k >= c.generator.vertex_count))
            throw ConfigError("network.k: requires 1 <= k < J");
        if (variant == "ws" && (c.generator.p < 0.0 || c.generator.p > 1.0))
            throw ConfigError("network.p: must lie in [0, 1]");
    }

    const std::string lvar = kv.get_string("laplacian", "variant", "case_a");
    if (lvar == "case_a")
        c.laplacian_variant = LaplacianVariant::case_a;
    else if (lvar == "case_b")
        c.laplacian_variant = LaplacianVariant::case_b;
    else
        throw ConfigError("laplacian.variant: unknown value '" + lvar + "'");
    c.alpha = kv.get_double("laplacian", "alpha", 1.0);
    c.alpha_u = kv.get_double("laplacian", "alpha_u", 1.0);
    c.alpha_v = kv.get_double("laplacian", "alpha_v", 1.0);
    c.rescale_case_b = kv.get_bool("laplacian", "rescale_case_b", true);
    c.s = kv.get_double("laplacian", "s", 1.0);
    if (!(c.alpha > 0.0)) throw ConfigError("laplacian.alpha: must be positive");
    if (!(c.alpha_u > 0.0) || !(c.alpha_v > 0.0))
        throw ConfigError("laplacian.alpha_u/alpha_v: must be positive");
    if (!(c.s >= 0.0)) throw ConfigError("laplacian.s: must be nonnegative");

    c.model_name = kv.get_string("kinetics", "model", "none");
    if (c.model_name != "none" && c.model_name != "logistic" && c.model_name != "linear" &&
        c.model_name != "gierer_meinhardt")
        throw ConfigError("kinetics.model: unknown value '" + c.model_name + "'");
    c.logistic_r = kv.get_double("kinetics", "r", 1.0);
    c.linear_a = kv.get_double("kinetics", "a", 1.0);
    c.linear_b = kv.get_double("kinetics", "b", 1.0);
    c.gm.c = kv.get_double("kinetics", "c", c.gm.c);
    c.gm.rho = kv.get_double("kinetics", "rho", c.gm.rho);
    c.gm.rho0 = kv.get_double("kinetics", "rho0", c.gm.rho0);
    c.gm.mu = kv.get_double("kinetics", "mu", c.gm.mu);
    c.gm.nu = kv.get_double("kinetics", "nu", c.gm.nu);
    c.gm.c_d = kv.get_double("kinetics", "c_d", c.gm.c_d);

    const std::string method = kv.get_string("integrator", "method", "rk45");
    if (method == "rk45")
        c.integrator.method = IntegratorConfig::Method::rk45_adaptive;
    else if (method == "rk4")
        c.integrator.method = IntegratorConfig::Method::rk4_fixed;
    else
        throw ConfigError("integrator.method: unknown value '" + method + "'");
    c.integrator.rtol = kv.get_double("integrator", "rtol", 1e-8);
    c.integrator.atol = kv.get_double("integrator", "atol", 1e-10);
    c.integrator.dt = kv.get_double("integrator", "dt", 1e-3);
    c.integrator.dt_init = kv.get_double("integrator", "dt_init", 1e-4);
    c.integrator.dt_min = kv.get_double("integrator", "dt_min", 1e-12);
    c.integrator.dt_max = kv.get_double("integrator", "dt_max", 1e2);
    c.integrator.t_max = kv.get_double("integrator", "t_max", 1e6);
    c.integrator.steady_tol = kv.get_double("integrator", "steady_tol", 1e-9);
    c.integrator.s = c.s;
    c.snapshot_every = kv.get_double("integrator", "snapshot_every", 0.0);
    try {
        c.integrator.validate();
    } catch (const InvalidParameterError& err) {
        throw ConfigError(std::string("integrator: ") + err.what());
    }

    c.init_amplitude = kv.get_double("init", "amplitude", 0.01);
    c.init_value = kv.get_double("init", "value", 1.0);

    c.s_min = kv.get_double("dispersion", "s_min", 1e-4);
    c.s_max = kv.get_double("dispersion", "s_max", 1e2);
    c.s_points = static_cast<int>(kv.get_int("dispersion", "points", 200));
    const std::string dm = kv.get_string("dispersion", "method", "auto");
    if (dm == "auto")
        c.dispersion_method = DispersionMethod::automatic;
    else if (dm == "full")
        c.dispersion_method = DispersionMethod::full_spectrum;
    else if (dm == "modes")
        c.dispersion_method = DispersionMethod::mode_decomposition;
    else
        throw ConfigError("dispersion.method: unknown value '" + dm + "'");
    if (kv.has("dispersion", "report_s")) c.report_s = kv.get_double("dispersion", "report_s");
    if (!(c.s_min > 0.0) || !(c.s_max > c.s_min))
        throw ConfigError("dispersion.s_min/s_max: requires 0 < s_min < s_max");
    if (c.s_points < 2) throw ConfigError("dispersion.points: must be at least 2");

    // Cross-field checks.
    if (c.kind != ExperimentKind::diffuse && c.model_name == "none" &&
        c.kind != ExperimentKind::dispersion)
        throw ConfigError("kinetics.model: kind '" + std::string(to_string(c.kind)) +
                          "' requires a reaction model");
    if (c.kind == ExperimentKind::dispersion && c.model_name == "none")
        throw ConfigError("kinetics.model: dispersion requires a reaction model");
    if (c.kind != ExperimentKind::diffuse &&
        (!(c.init_amplitude > 0.0) || c.init_amplitude > 0.1))
        throw ConfigError("init.amplitude: must lie in (0, 0.1]");
    if (c.network_from_file && !std::filesystem::exists(c.network_path))
        throw ConfigError("network.path: file does not exist: " + c.network_path);
    return c;
}

inline std::string ExperimentConfig::manifest_string() const {
    using detail::g17;
    std::ostringstream out;
    out << "# ctrw-patterns manifest (version " << version_string << ")\n";
    out << "# this file is a complete config; re-run with: ctrw-patterns run <this file>\n";
    out << "[run]\n";
    out << "kind = " << to_string(kind) << "\n";
    out << "out_dir = " << out_dir << "\n";
    out << "seed = " << seed << "\n\n";
    out << "[network]\n";
    if (network_from_file) {
        out << "variant = file\n";
        out << "path = " << network_path << "\n";
    } else {
        switch (generator.variant) {
            case NetworkVariant::ba: out << "variant = ba\n"; break;
            case NetworkVariant::ws: out << "variant = ws\n"; break;
            case NetworkVariant::ring: out << "variant = ring\n"; break;
            case NetworkVariant::complete: out << "variant = complete\n"; break;
            case NetworkVariant::star: out << "variant = star\n"; break;
            case NetworkVariant::path: out << "variant = path\n"; break;
        }
        out << "J = " << generator.vertex_count << "\n";
        out << "k = " << generator.k << "\n";
        out << "p = " << g17(generator.p) << "\n";
    }
    out << "\n[laplacian]\n";
    out << "variant = " << to_string(laplacian_variant) << "\n";
    out << "alpha = " << g17(alpha) << "\n";
    out << "alpha_u = " << g17(alpha_u) << "\n";
    out << "alpha_v = " << g17(alpha_v) << "\n";
    out << "rescale_case_b = " << (rescale_case_b ? "true" : "false") << "\n";
    out << "s = " << g17(s) << "\n";
    out << "\n[kinetics]\n";
    out << "model = " << model_name << "\n";
    if (model_name == "logistic") out << "r = " << g17(logistic_r) << "\n";
    if (model_name == "linear") {
        out << "a = " << g17(linear_a) << "\n";
        out << "b = " << g17(linear_b) << "\n";
    }
    if (model_name == "gierer_meinhardt") {
        out << "c = " << g17(gm.c) << "\n";
        out << "rho = " << g17(gm.rho) << "\n";
        out << "rho0 = " << g17(gm.rho0) << "\n";
        out << "mu = " << g17(gm.mu) << "\n";
        out << "nu = " << g17(gm.nu) << "\n";
        out << "c_d = " << g17(gm.c_d) << "\n";
    }
    out << "\n[integrator]\n";
    out << "method = "
        << (integrator.method == IntegratorConfig::Method::rk45_adaptive ? "rk45" : "rk4") << "\n";
    out << "rtol = " << g17(integrator.rtol) << "\n";
    out << "atol = " << g17(integrator.atol) << "\n";
    out << "dt = " << g17(integrator.dt) << "\n";
    out << "dt_init = " << g17(integrator.dt_init) << "\n";
    out << "dt_min = " << g17(integrator.dt_min) << "\n";
    out << "dt_max = " << g17(integrator.dt_max) << "\n";
    out << "t_max = " << g17(integrator.t_max) << "\n";
    out << "steady_tol = " << g17(integrator.steady_tol) << "\n";
    out << "snapshot_every = " << g17(snapshot_every) << "\n";
    out << "\n[init]\n";
    out << "amplitude = " << g17(init_amplitude) << "\n";
    out << "value = " << g17(init_value) << "\n";
    out << "\n[dispersion]\n";
    out << "s_min = " << g17(s_min) << "\n";
    out << "s_max = " << g17(s_max) << "\n";
    out << "points = " << s_points << "\n";
    switch (dispersion_method) {
        case DispersionMethod::automatic: out << "method = auto\n"; break;
        case DispersionMethod::full_spectrum: out << "method = full\n"; break;
        case DispersionMethod::mode_decomposition: out << "method = modes\n"; break;
    }
    if (report_s) out << "report_s = " << g17(*report_s) << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Run machinery.

struct RunResult {
    ExperimentKind kind;
    std::vector<std::string> artifacts;  // file paths written
    std::string termination;             // integration outcome when applicable
    std::string classification;          // label when kind = classify
};

namespace detail {

inline std::unique_ptr<ReactionModel> make_model(const ExperimentConfig& c) {
    if (c.model_name == "none") return std::make_unique<NoReactionModel>(1);
    if (c.model_name == "logistic") return std::make_unique<LogisticModel>(c.logistic_r);
    if (c.model_name == "linear") return std::make_unique<LinearModel>(c.linear_a, c.linear_b);
    if (c.model_name == "gierer_meinhardt") return std::make_unique<GiererMeinhardtModel>(c.gm);
    throw ConfigError("kinetics.model: unknown value '" + c.model_name + "'");
}

inline Network make_network(const ExperimentConfig& c) {
    if (c.network_from_file) return load_edge_list(c.network_path);
    return generate(c.generator);
}

inline LaplacianMatrix make_laplacian(const ExperimentConfig& c, const Network& net) {
    return c.laplacian_variant == LaplacianVariant::case_a ? build_case_a(net, c.alpha)
                                                           : build_case_b(net, c.alpha);
}

// Species diffusion rates, with the Case B mean-waiting-time rescale applied
// when requested.
inline std::vector<double> species_alphas(const ExperimentConfig& c, const Network& net,
                                          int species) {
    std::vector<double> a;
    if (species == 1) {
        a = {c.alpha_u};
    } else {
        a = {c.alpha_u, c.alpha_v};
    }
    if (c.laplacian_variant == LaplacianVariant::case_b && c.rescale_case_b) {
        const double factor =
            static_cast<double>(net.vertex_count()) / static_cast<double>(net.degree_sum());
        for (double& x : a) x *= factor;
    }
    return a;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << text;
    if (!out) throw ParseError("write failed: " + path);
}

struct PatternRow {
    int species;
    int degree;
    double value;
    int vertex;
};

inline std::vector<PatternRow> pattern_rows(const SystemState& state, const Network& net,
                                            int species) {
    const int n = net.vertex_count();
    std::vector<PatternRow> rows;
    rows.reserve(static_cast<std::size_t>(species) * static_cast<std::size_t>(n));
    for (int p = 0; p < species; ++p)
        for (int j = 0; j < n; ++j)
            rows.push_back({p, net.degree(j),
                            state.x[static_cast<std::size_t>(p) * static_cast<std::size_t>(n) +
                                    static_cast<std::size_t>(j)],
                            j});
    std::sort(rows.begin(), rows.end(), [](const PatternRow& a, const PatternRow& b) {
        if (a.species != b.species) return a.species < b.species;
        if (a.degree != b.degree) return a.degree < b.degree;
        if (a.value != b.value) return a.value < b.value;
        return a.vertex < b.vertex;
    });
    return rows;
}

// Pattern table: vertex, degree, species, value; rows sorted by species, then
// degree, then value (the paper's in-segment concentration ordering).
inline void write_pattern_csv(const std::string& path, const SystemState& state,
                              const Network& net, int species) {
    std::ostringstream out;
    out << "vertex,degree,species,value\n";
    for (const auto& r : pattern_rows(state, net, species))
        out << r.vertex << "," << r.degree << "," << r.species << "," << g17(r.value) << "\n";
    write_text(path, out.str());
}

inline void write_comparison_csv(const std::string& path, const SystemState& state,
                                 const std::vector<double>& predicted, const Network& net,
                                 int species) {
    const int n = net.vertex_count();
    std::vector<PatternRow> rows = pattern_rows(state, net, species);
    std::ostringstream out;
    out << "vertex,degree,species,simulated,predicted,diff\n";
    for (const auto& r : rows) {
        const std::size_t idx = static_cast<std::size_t>(r.species) * static_cast<std::size_t>(n) +
                                static_cast<std::size_t>(r.vertex);
        out << r.vertex << "," << r.degree << "," << r.species << "," << g17(r.value) << ","
            << g17(predicted[idx]) << "," << g17(r.value - predicted[idx]) << "\n";
    }
    write_text(path, out.str());
}

inline void write_dispersion_csv(const std::string& path, const DispersionCurve& curve) {
    std::ostringstream out;
    out << "s,re_mu_star\n";
    for (std::size_t i = 0; i < curve.s.size(); ++i)
        out << g17(curve.s[i]) << "," << g17(curve.re_mu_star[i]) << "\n";
    write_text(path, out.str());
}

inline nlohmann::json window_json(const std::optional<std::pair<double, double>>& w) {
    if (!w) return nullptr;
    return nlohmann::json::array({w->first, w->second});
}

inline void write_dispersion_json(const std::string& path, const DispersionCurve& curve) {
    nlohmann::json j;
    j["critical_s"] = curve.critical_s;
    j["turing_window"] = window_json(curve.turing_window);
    write_text(path, j.dump(2) + "\n");
}

inline void write_stability_json(const std::string& path, const StabilityReport& rep) {
    nlohmann::json j;
    j["s"] = rep.s;
    j["mu_star"] = {rep.mu_star.real(), rep.mu_star.imag()};
    j["reaction_stable"] = rep.reaction_stable;
    j["turing_unstable"] = rep.turing_unstable;
    j["repeated_leading"] = rep.repeated_leading;
    nlohmann::json vals = nlohmann::json::array();
    for (const auto& lam : rep.eigenvalues) vals.push_back({lam.real(), lam.imag()});
    j["eigenvalues"] = vals;
    nlohmann::json vec = nlohmann::json::array();
    for (const auto& c : rep.leading_eigenvector) vec.push_back({c.real(), c.imag()});
    j["leading_eigenvector"] = vec;
    write_text(path, j.dump(2) + "\n");
}

}  // namespace detail

inline RunResult run(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    using detail::g17;
    RunResult result;
    result.kind = cfg.kind;
    fs::create_directories(cfg.out_dir);
    auto out_path = [&](const std::string& name) { return (fs::path(cfg.out_dir) / name).string(); };
    auto record = [&](const std::string& p) {
        result.artifacts.push_back(p);
        return p;
    };

    detail::write_text(record(out_path("manifest.txt")), cfg.manifest_string());

    const Network net = detail::make_network(cfg);
    save_edge_list(net, record(out_path("network.edges")));

    const std::unique_ptr<ReactionModel> model = detail::make_model(cfg);
    const LaplacianMatrix laplacian = detail::make_laplacian(cfg, net);
    const std::vector<double> alphas = detail::species_alphas(cfg, net, model->species());

    if (cfg.kind == ExperimentKind::dispersion) {
        DispersionOptions opt;
        opt.method = cfg.dispersion_method;
        const std::vector<double> grid =
            log_grid(cfg.s_min, cfg.s_max, static_cast<std::size_t>(cfg.s_points));
        const DispersionCurve curve = dispersion_relation(laplacian, *model, alphas, grid, opt);
        detail::write_dispersion_csv(record(out_path("dispersion.csv")), curve);
        detail::write_dispersion_json(record(out_path("dispersion.json")), curve);
        if (cfg.report_s) {
            const StabilityReport rep = stability_report(laplacian, *model, alphas, *cfg.report_s);
            detail::write_stability_json(record(out_path("stability.json")), rep);
        }
        return result;
    }

    // Kinds below integrate a trajectory.
    SystemState init;
    if (cfg.kind == ExperimentKind::diffuse) {
        if (!(cfg.init_value > 0.0)) throw ConfigError("init.value: must be positive");
        init = uniform_state(model->species(), net.vertex_count(), cfg.init_value);
    } else {
        init = perturbed_initial_state(*model, net.vertex_count(), cfg.init_amplitude, cfg.seed);
    }

    ReactionDiffusionSystem sys(laplacian, *model, alphas, cfg.s);
    IntegratorConfig icfg = cfg.integrator;
    icfg.s = cfg.s;

    std::ostringstream traj;
    double next_snapshot = 0.0;
    StateObserver observer;
    if (cfg.snapshot_every > 0.0) {
        traj << "t,species,vertex,value\n";
        const int n = net.vertex_count();
        const int m = model->species();
        observer = [&traj, &next_snapshot, cfg, n, m](const SystemState& st) {
            if (st.t < next_snapshot) return;
            next_snapshot = st.t + cfg.snapshot_every;
            for (int p = 0; p < m; ++p)
                for (int j = 0; j < n; ++j)
                    traj << g17(st.t) << "," << p << "," << j << ","
                         << g17(st.x[static_cast<std::size_t>(p) * static_cast<std::size_t>(n) +
                                     static_cast<std::size_t>(j)])
                         << "\n";
        };
    }

    const IntegrationResult ir = integrate(sys, std::move(init), icfg, observer);
    result.termination =
        ir.reason == TerminationReason::steady_state ? "steady_state" : "t_max_reached";
    if (cfg.snapshot_every > 0.0)
        detail::write_text(record(out_path("trajectory.csv")), traj.str());

    detail::write_pattern_csv(record(out_path("pattern.csv")), ir.state, net, model->species());

    if (cfg.kind == ExperimentKind::predict) {
        const PredictorResult pred = linear_pattern_predictor(laplacian, *model, alphas, cfg.s);
        detail::write_comparison_csv(record(out_path("predictor_vs_simulation.csv")), ir.state,
                                     pred.predicted, net, model->species());
    }

    if (cfg.kind == ExperimentKind::classify) {
        ClassifyOptions copt;
        copt.steady_tol = cfg.integrator.steady_tol;
        copt.window_grid = log_grid(cfg.s_min, cfg.s_max, static_cast<std::size_t>(cfg.s_points));
        copt.dispersion.method = cfg.dispersion_method;
        const Classification cls =
            classify_pattern(ir.state, laplacian, *model, alphas, cfg.s, copt);
        result.classification = to_string(cls.label);

        nlohmann::json j;
        j["label"] = to_string(cls.label);
        j["s"] = cls.s;
        j["homogeneity_rel_deviation"] = cls.homogeneity_rel_deviation;
        j["predictor_rel_distance"] = cls.predictor_rel_distance;
        j["turing_window"] = detail::window_json(cls.window);
        j["s_in_window"] = cls.s_in_window;
        j["termination"] = result.termination;
        if (model->has_steady_state()) j["reaction_steady_state"] = model->steady_state();
        const int n = net.vertex_count();
        nlohmann::json means = nlohmann::json::array();
        for (int p = 0; p < model->species(); ++p) {
            double mean = 0.0;
            for (int v = 0; v < n; ++v)
                mean += ir.state.x[static_cast<std::size_t>(p) * static_cast<std::size_t>(n) +
                                   static_cast<std::size_t>(v)];
            means.push_back(mean / n);
        }
        j["species_means"] = means;
        // Two-means split of the lowest-degree class, species 0.
        const auto splits = bimodality_by_degree(
            std::span<const double>(ir.state.x).subspan(0, static_cast<std::size_t>(n)), net);
        const auto& low = splits.front();
        j["min_degree_class"] = {{"degree", low.degree},
                                 {"count", low.split.lower_count + low.split.upper_count},
                                 {"lower_mean", low.split.lower_mean},
                                 {"upper_mean", low.split.upper_mean},
                                 {"separation", low.split.separation},
                                 {"within_spread", low.split.within_spread},
                                 {"bimodal", low.split.bimodal}};
        detail::write_text(record(out_path("classification.json")), j.dump(2) + "\n");
    }

    return result;
}

inline RunResult run_config_file(const std::string& path) {
    return run(ExperimentConfig::from_file(path));
}

// ---------------------------------------------------------------------------
// Canned figure batch: desk-scale data tables, one per figure panel.

namespace detail {

inline void write_single_species_table(const std::string& path, const SystemState& state,
                                       const Network& net,
                                       const std::vector<double>* predicted) {
    const std::vector<PatternRow> rows = pattern_rows(state, net, 1);
    std::ostringstream out;
    if (predicted) {
        out << "vertex,degree,concentration,predicted,diff\n";
        for (const auto& r : rows)
            out << r.vertex << "," << r.degree << "," << g17(r.value) << ","
                << g17((*predicted)[static_cast<std::size_t>(r.vertex)]) << ","
                << g17(r.value - (*predicted)[static_cast<std::size_t>(r.vertex)]) << "\n";
    } else {
        out << "vertex,degree,concentration\n";
        for (const auto& r : rows)
            out << r.vertex << "," << r.degree << "," << g17(r.value) << "\n";
    }
    write_text(path, out.str());
}

inline void write_species_panel(const std::string& path, const SystemState& state,
                                const Network& net, int species_index) {
    const int n = net.vertex_count();
    SystemState one;
    one.t = state.t;
    one.x.assign(state.x.begin() + static_cast<std::ptrdiff_t>(species_index) * n,
                 state.x.begin() + static_cast<std::ptrdiff_t>(species_index + 1) * n);
    write_single_species_table(path, one, net, nullptr);
}

}  // namespace detail

struct FigureBatchResult {
    std::vector<std::string> tables;
};

// Runs the eight canned experiments behind the paper-style figures at the
// requested network size and writes one CSV per figure panel.
inline FigureBatchResult reproduce_figures(int size, const std::string& out_dir,
                                           unsigned threads = 0) {
    namespace fs = std::filesystem;
    if (size != 50 && size != 500)
        throw ConfigError("figures: size must be 50 or 500");
    fs::create_directories(out_dir);
    FigureBatchResult result;
    std::mutex result_mutex;
    auto add_table = [&](const std::string& p) {
        std::lock_guard<std::mutex> lock(result_mutex);
        result.tables.push_back(p);
    };

    const std::uint64_t net_seed_ba = 20250101;
    const std::uint64_t net_seed_ws = 20250102;
    const Network ba = generate_ba(size, 3, net_seed_ba);
    const Network ws = generate_ws(size, 3, 0.1, net_seed_ws);

    // Shared models. GM diffusion rates put the slow rate on the activator u
    // and the fast rate on the inhibitor v (ratio 256); the Turing window is
    // empty with the roles exchanged.
    const GiererMeinhardtModel gm;
    const LogisticModel logistic(1.0);
    const NoReactionModel pure(1);
    const double slow = 1.0 / 256.0, fast = 1.0;

    struct GmSetup {
        const Network* net;
        LaplacianVariant variant;
        std::vector<double> alphas;
        LaplacianMatrix laplacian;
        double s_run = 1.0;
        std::optional<std::pair<double, double>> window;
    };
    auto make_gm_setup = [&](const Network& net, LaplacianVariant variant) {
        std::vector<double> alphas = {slow, fast};
        if (variant == LaplacianVariant::case_b) {
            const auto [au, av] = case_b_rescaled_rates(net, slow, fast);
            alphas = {au, av};
        }
        LaplacianMatrix lap = variant == LaplacianVariant::case_a ? build_case_a(net, 1.0)
                                                                  : build_case_b(net, 1.0);
        GmSetup setup{&net, variant, alphas, std::move(lap)};
        const DispersionCurve curve =
            dispersion_relation(setup.laplacian, gm, setup.alphas, log_grid(1e-4, 1e2, 200));
        setup.window = curve.turing_window;
        setup.s_run = setup.window ? std::sqrt(setup.window->first * setup.window->second) : 1.0;
        return setup;
    };

    auto integrate_to_steady = [&](const LaplacianMatrix& lap, const ReactionModel& model,
                                   const std::vector<double>& alphas, double s,
                                   const SystemState& init, double t_max) {
        ReactionDiffusionSystem sys(lap, model, alphas, s);
        IntegratorConfig cfg;
        cfg.t_max = t_max;
        cfg.dt_max = 50.0;
        return integrate(sys, init, cfg);
    };

    auto diffusion_figure = [&](const Network& net, const std::string& table) {
        const LaplacianMatrix lap = build_case_a(net, 1.0);
        const IntegrationResult ir = integrate_to_steady(
            lap, pure, {1.0}, 1.0, uniform_state(1, net.vertex_count(), 1.0), 1e5);
        detail::write_single_species_table(table, ir.state, net, nullptr);
        add_table(table);
    };

    auto logistic_figure = [&](const Network& net, std::uint64_t seed, const std::string& table) {
        const LaplacianMatrix lap = build_case_a(net, 1.0);
        const std::vector<double> alphas = {1.0};
        const SystemState init = perturbed_initial_state(logistic, net.vertex_count(), 0.01, seed);
        const IntegrationResult ir = integrate_to_steady(lap, logistic, alphas, 1.0, init, 1e5);
        const PredictorResult pred = linear_pattern_predictor(lap, logistic, alphas, 1.0);
        detail::write_single_species_table(table, ir.state, net, &pred.predicted);
        add_table(table);
    };

    auto gm_figure = [&](const Network& net, LaplacianVariant variant, std::uint64_t seed,
                         const std::string& table_u, const std::string& table_v) {
        const GmSetup setup = make_gm_setup(net, variant);
        const SystemState init = perturbed_initial_state(gm, net.vertex_count(), 0.01, seed);
        const IntegrationResult ir =
            integrate_to_steady(setup.laplacian, gm, setup.alphas, setup.s_run, init, 4e4);
        detail::write_species_panel(table_u, ir.state, net, 0);
        detail::write_species_panel(table_v, ir.state, net, 1);
        add_table(table_u);
        add_table(table_v);
    };

    auto dispersion_figure = [&](const Network& net, LaplacianVariant variant,
                                 const std::string& table) {
        const GmSetup setup = make_gm_setup(net, variant);
        const DispersionCurve curve =
            dispersion_relation(setup.laplacian, gm, setup.alphas, log_grid(1e-4, 1e2, 200));
        detail::write_dispersion_csv(table, curve);
        add_table(table);
    };

    auto at = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };

    const std::vector<std::function<void()>> jobs = {
        [&] { diffusion_figure(ba, at("fig1.csv")); },
        [&] { logistic_figure(ba, 11, at("fig2.csv")); },
        [&] { gm_figure(ba, LaplacianVariant::case_a, 12, at("fig3_u.csv"), at("fig3_v.csv")); },
        [&] { gm_figure(ba, LaplacianVariant::case_b, 13, at("fig4_u.csv"), at("fig4_v.csv")); },
        [&] {
            dispersion_figure(ba, LaplacianVariant::case_a, at("fig5_case_a.csv"));
            dispersion_figure(ba, LaplacianVariant::case_b, at("fig5_case_b.csv"));
        },
        [&] { diffusion_figure(ws, at("fig6.csv")); },
        [&] { logistic_figure(ws, 14, at("fig7.csv")); },
        [&] {
            gm_figure(ws, LaplacianVariant::case_a, 15, at("fig8_case_a_u.csv"),
                      at("fig8_case_a_v.csv"));
            gm_figure(ws, LaplacianVariant::case_b, 16, at("fig8_case_b_u.csv"),
                      at("fig8_case_b_v.csv"));
            dispersion_figure(ws, LaplacianVariant::case_a, at("fig8_dispersion_case_a.csv"));
            dispersion_figure(ws, LaplacianVariant::case_b, at("fig8_dispersion_case_b.csv"));
        },
    };

    const unsigned nt = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    detail::parallel_for(jobs.size(), nt, [&](std::size_t i) { jobs[i](); });

    std::sort(result.tables.begin(), result.tables.end());
    return result;
}

}  // namespace ctrw

#endif
