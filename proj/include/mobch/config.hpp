// config.hpp
// Plain `key = value` configuration files with dotted section names.
// Unknown keys are rejected; every diagnostic names the offending key and
// line. Defaults are documented in the README.

#ifndef MOBCH_CONFIG_HPP
#define MOBCH_CONFIG_HPP

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mobch/ensemble.hpp"
#include "mobch/errors.hpp"
#include "mobch/grid.hpp"
#include "mobch/mobility.hpp"
#include "mobch/potential.hpp"
#include "mobch/stepper.hpp"

namespace mobch {

struct InitSpec {
    enum class Kind { Constant, Cosine };
    Kind kind = Kind::Cosine;
    double value = 0.0; // constant level
    double mean = 0.0;  // cosine offset
    double amplitude = 0.01;
    int mode = 1;

    GridFunction build(const Grid& g) const {
        if (kind == Kind::Constant) return GridFunction(g, value);
        GridFunction v(g, mean);
        const double ext = g.extent();
        for (std::size_t idx = 0; idx < v.size(); ++idx) {
            const int ix = g.dim == 1 ? static_cast<int>(idx)
                                      : static_cast<int>(idx % g.n_cells);
            const double x = (ix + 0.5) * g.h;
            v[idx] += amplitude * std::cos(mode * M_PI * x / ext);
        }
        return v;
    }
};

struct RootConfig {
    Grid grid{1, 64, 4.0 / 64.0};
    PotentialSpec potential = PotentialSpec::double_well();
    MobilitySpec mobility = MobilitySpec::constant(1.0);
    SimConfig sim;           // sim.f is materialized on the grid
    InitSpec init;
    EnsembleConfig ensemble; // grid and base are filled from the sections

    GridFunction initial_field() const { return init.build(grid); }
};

namespace detail {

struct RawConfig {
    std::map<std::string, std::string> values;
    std::map<std::string, int> lines;
    std::set<std::string> consumed;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    int line_of(const std::string& key) const {
        auto it = lines.find(key);
        return it == lines.end() ? 0 : it->second;
    }

    std::string get_string(const std::string& key, const std::string& dflt) {
        consumed.insert(key);
        auto it = values.find(key);
        return it == values.end() ? dflt : it->second;
    }

    double get_double(const std::string& key, double dflt) {
        consumed.insert(key);
        auto it = values.find(key);
        if (it == values.end()) return dflt;
        const char* s = it->second.c_str();
        char* end = nullptr;
        const double v = std::strtod(s, &end);
        if (end == s || *end != '\0')
            throw ParseError(line_of(key), key, "not a number: '" + it->second + "'");
        return v;
    }

    long get_long(const std::string& key, long dflt) {
        consumed.insert(key);
        auto it = values.find(key);
        if (it == values.end()) return dflt;
        const char* s = it->second.c_str();
        char* end = nullptr;
        const long v = std::strtol(s, &end, 10);
        if (end == s || *end != '\0')
            throw ParseError(line_of(key), key, "not an integer: '" + it->second + "'");
        return v;
    }

    bool get_bool(const std::string& key, bool dflt) {
        consumed.insert(key);
        auto it = values.find(key);
        if (it == values.end()) return dflt;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw ParseError(line_of(key), key, "expected true/false");
    }

    std::vector<double> get_list(const std::string& key,
                                 std::vector<double> dflt) {
        consumed.insert(key);
        auto it = values.find(key);
        if (it == values.end()) return dflt;
        std::vector<double> out;
        std::string item;
        std::istringstream ss(it->second);
        while (std::getline(ss, item, ',')) {
            const char* s = item.c_str();
            char* end = nullptr;
            const double v = std::strtod(s, &end);
            if (end == s)
                throw ParseError(line_of(key), key, "bad list entry '" + item + "'");
            out.push_back(v);
        }
        if (out.empty())
            throw ParseError(line_of(key), key, "empty list");
        return out;
    }
};

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline RawConfig read_raw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("parse_config: cannot open " + path);
    RawConfig raw;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError(lineno, "", "expected 'key = value'");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        if (key.empty()) throw ParseError(lineno, "", "empty key");
        if (val.empty()) throw ParseError(lineno, key, "empty value");
        if (raw.values.count(key))
            throw ParseError(lineno, key, "duplicate key");
        raw.values[key] = val;
        raw.lines[key] = lineno;
    }
    return raw;
}

} // namespace detail

inline RootConfig parse_config(const std::string& path) {
    detail::RawConfig raw = detail::read_raw(path);
    RootConfig cfg;

    // grid
    const long dim = raw.get_long("grid.dim", 1);
    const long n = raw.get_long("grid.n", 64);
    const double extent = raw.get_double("grid.extent", 4.0);
    if (dim != 1 && dim != 2)
        throw ParseError(raw.line_of("grid.dim"), "grid.dim", "must be 1 or 2");
    if (n < 1)
        throw ParseError(raw.line_of("grid.n"), "grid.n", "must be positive");
    if (!(extent > 0.0))
        throw ParseError(raw.line_of("grid.extent"), "grid.extent",
                         "must be positive");
    cfg.grid = Grid(static_cast<int>(dim), static_cast<int>(n),
                    extent / static_cast<double>(n));

    // potential
    const std::string pk = raw.get_string("potential.kind", "double_well");
    try {
        if (pk == "double_well") {
            cfg.potential =
                PotentialSpec::double_well(raw.get_double("potential.lambda", 1.0));
        } else if (pk == "polynomial") {
            const double p = raw.get_double("potential.p", 4.0);
            const double eta = raw.get_double("potential.eta", 3.0);
            cfg.potential = PotentialSpec::polynomial(
                p, raw.get_double("potential.K_W", eta), eta,
                raw.get_double("potential.lambda", 1.0));
        } else if (pk == "logarithmic") {
            cfg.potential =
                PotentialSpec::logarithmic(raw.get_double("potential.lambda_log", 1.0));
        } else {
            throw UnknownKey(raw.line_of("potential.kind"), "potential.kind",
                             "unknown potential '" + pk +
                                 "'; valid: double_well, polynomial, logarithmic");
        }
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(raw.line_of("potential.kind"), "potential.kind", e.what());
    }

    // mobility
    const std::string mk = raw.get_string("mobility.kind", "constant");
    try {
        if (mk == "constant") {
            cfg.mobility = MobilitySpec::constant(raw.get_double("mobility.value", 1.0));
        } else if (mk == "sinusoidal") {
            cfg.mobility = MobilitySpec::sinusoidal(raw.get_double("mobility.base", 2.0),
                                                    raw.get_double("mobility.amp", 1.0));
        } else {
            throw UnknownKey(raw.line_of("mobility.kind"), "mobility.kind",
                             "unknown mobility '" + mk +
                                 "'; valid: constant, sinusoidal");
        }
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(raw.line_of("mobility.kind"), "mobility.kind", e.what());
    }
    const std::string favg = raw.get_string("mobility.face_average", "arithmetic");
    if (favg == "harmonic") {
        cfg.mobility.face_average = FaceAverage::Harmonic;
    } else if (favg != "arithmetic") {
        throw UnknownKey(raw.line_of("mobility.face_average"),
                         "mobility.face_average",
                         "valid: arithmetic, harmonic");
    }

    // sim
    cfg.sim.epsilon = raw.get_double("sim.epsilon", 0.0);
    if (cfg.sim.epsilon < 0.0)
        throw ParseError(raw.line_of("sim.epsilon"), "sim.epsilon",
                         "epsilon >= 0 required");
    cfg.sim.yosida_n = raw.get_long("sim.yosida_n", 10000);
    cfg.sim.dt = raw.get_double("sim.dt", 1e-4);
    cfg.sim.t_end = raw.get_double("sim.t_end", 1.0);
    cfg.sim.newton_tol = raw.get_double("sim.newton_tol", 1e-10);
    cfg.sim.newton_max_iter =
        static_cast<int>(raw.get_long("sim.newton_max_iter", 30));
    cfg.sim.m = raw.get_double("sim.m", 0.5);
    cfg.sim.snapshot_every =
        static_cast<int>(raw.get_long("sim.snapshot_every", 100));
    cfg.sim.couple_epsilon_to_n = raw.get_bool("sim.couple_epsilon_to_n", false);
    const double f_const = raw.get_double("sim.f_const", 0.0);
    cfg.sim.f = GridFunction(cfg.grid, f_const);
    try {
        cfg.sim.validate();
    } catch (const Error& e) {
        throw ParseError(0, "sim", e.what());
    }
    if (cfg.potential.singular() && !(cfg.sim.m < 1.0))
        throw ParseError(raw.line_of("sim.m"), "sim.m",
                         "m < 1 required for singular potentials");

    // initial data
    const std::string ik = raw.get_string("init.kind", "cosine");
    if (ik == "constant") {
        cfg.init.kind = InitSpec::Kind::Constant;
        cfg.init.value = raw.get_double("init.value", 0.0);
    } else if (ik == "cosine") {
        cfg.init.kind = InitSpec::Kind::Cosine;
        cfg.init.mean = raw.get_double("init.mean", 0.0);
        cfg.init.amplitude = raw.get_double("init.amplitude", 0.01);
        cfg.init.mode = static_cast<int>(raw.get_long("init.mode", 1));
    } else {
        throw UnknownKey(raw.line_of("init.kind"), "init.kind",
                         "unknown init '" + ik + "'; valid: constant, cosine");
    }

    // ensemble
    cfg.ensemble.count = static_cast<int>(raw.get_long("ensemble.count", 20));
    cfg.ensemble.radius = raw.get_double("ensemble.radius", 2.0);
    cfg.ensemble.mean_band = raw.get_double("ensemble.mean_band", 0.2);
    cfg.ensemble.seed = static_cast<unsigned long>(raw.get_long("ensemble.seed", 1));
    cfg.ensemble.sample_times =
        raw.get_list("ensemble.sample_times", {10.0, 20.0, 40.0});
    cfg.ensemble.rho_ladder = raw.get_list("ensemble.rho_ladder", {});
    const std::string metric = raw.get_string("ensemble.metric", "dV");
    if (metric == "l2") {
        cfg.ensemble.use_l2_metric = true;
    } else if (metric != "dV") {
        throw UnknownKey(raw.line_of("ensemble.metric"), "ensemble.metric",
                         "valid: dV, l2");
    }
    cfg.ensemble.grid = cfg.grid;
    cfg.ensemble.base = cfg.sim;

    // reject anything unconsumed
    for (const auto& [key, value] : raw.values)
        if (!raw.consumed.count(key))
            throw UnknownKey(raw.line_of(key), key, "unknown key");

    return cfg;
}

} // namespace mobch

#endif
