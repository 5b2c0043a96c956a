#pragma once

#include <cstdlib>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "blm/geometry.hpp"
#include "blm/model.hpp"
#include "blm/stepper.hpp"

namespace blm {

// Run configuration in a line-oriented `key = value` format with '#'
// comments. Recognized keys: Re, nu, beta, mixing, dt, T, burn_in, mesh_h,
// refine, sweep. Exactly one of Re and nu must be given; the other is derived
// from the channel normalization nu = 1/Re.
struct RunConfig {
    Geometry geometry = Geometry::channel_with_obstacle();
    double mesh_h = 0.16;
    double refine = 2.0;
    double reynolds = 0.0;
    double nu = 0.0;
    double beta = 10.0;
    MixingSpec mixing = MixingSpec::l1();
    double dt = 0.01;
    double t_end = 50.0;
    double burn_in = 0.2;
    std::vector<double> sweep;

    ModelParams params() const { return params_for(reynolds); }

    ModelParams params_for(double re) const {
        ModelParams p;
        p.reynolds = re;
        p.nu = reynolds_to_viscosity(re);
        p.beta = beta;
        p.mixing = mixing;
        return p;
    }

    SolverConfig solver() const {
        SolverConfig s;
        s.dt = dt;
        s.t_end = t_end;
        return s;
    }

    std::string mesh_id() const {
        return "channel-h" + format_double(mesh_h) + "-r" + format_double(refine);
    }
};

namespace detail {

inline double parse_number(const std::string& text, const std::string& key, int line) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0')
        throw ParseError("config: key '" + key + "' expects a number, got '" + text + "'", line);
    return v;
}

inline MixingSpec parse_mixing(const std::string& text, int line) {
    if (text == "l1") return MixingSpec::l1();
    if (text == "l2") return MixingSpec::l2();
    if (text.rfind("const:", 0) == 0) {
        const double v = parse_number(text.substr(6), "mixing", line);
        if (v < 0.0) throw ParseError("config: mixing constant must be nonnegative", line);
        return MixingSpec::constant(v);
    }
    throw ParseError("config: mixing must be l1, l2 or const:<value>, got '" + text + "'", line);
}

inline std::vector<double> parse_sweep(const std::string& text, int line) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) throw ParseError("config: empty sweep entry", line);
        item = item.substr(first, item.find_last_not_of(" \t") - first + 1);
        const double re = parse_number(item, "sweep", line);
        if (!(re > 0.0)) throw ParseError("config: sweep Reynolds numbers must be positive", line);
        for (double prev : values)
            if (prev == re)
                throw ParseError("config: duplicate Reynolds number " + format_double(re) +
                                     " in sweep",
                                 line);
        values.push_back(re);
    }
    return values;
}

}  // namespace detail

inline RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    bool have_re = false, have_nu = false;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const auto first = raw.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        raw = raw.substr(first, raw.find_last_not_of(" \t\r") - first + 1);

        const auto eq = raw.find('=');
        if (eq == std::string::npos)
            throw ParseError("config: expected 'key = value', got '" + raw + "'", line_no);
        std::string key = raw.substr(0, eq);
        std::string value = raw.substr(eq + 1);
        const auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            if (a == std::string::npos) return std::string();
            return s.substr(a, s.find_last_not_of(" \t") - a + 1);
        };
        key = trim(key);
        value = trim(value);
        if (value.empty()) throw ParseError("config: key '" + key + "' has no value", line_no);

        if (key == "Re") {
            cfg.reynolds = detail::parse_number(value, key, line_no);
            if (!(cfg.reynolds > 0.0)) throw ParseError("config: Re must be positive", line_no);
            have_re = true;
        } else if (key == "nu") {
            cfg.nu = detail::parse_number(value, key, line_no);
            if (!(cfg.nu > 0.0)) throw ParseError("config: nu must be positive", line_no);
            have_nu = true;
        } else if (key == "beta") {
            cfg.beta = detail::parse_number(value, key, line_no);
            if (cfg.beta < 0.0) throw ParseError("config: beta must be nonnegative", line_no);
        } else if (key == "mixing") {
            cfg.mixing = detail::parse_mixing(value, line_no);
        } else if (key == "dt") {
            cfg.dt = detail::parse_number(value, key, line_no);
            if (!(cfg.dt > 0.0)) throw ParseError("config: dt must be positive", line_no);
        } else if (key == "T") {
            cfg.t_end = detail::parse_number(value, key, line_no);
            if (cfg.t_end < 0.0) throw ParseError("config: T must be nonnegative", line_no);
        } else if (key == "burn_in") {
            cfg.burn_in = detail::parse_number(value, key, line_no);
            if (!(cfg.burn_in >= 0.0 && cfg.burn_in < 1.0))
                throw ParseError("config: burn_in must lie in [0,1)", line_no);
        } else if (key == "mesh_h") {
            cfg.mesh_h = detail::parse_number(value, key, line_no);
            if (!(cfg.mesh_h > 0.0)) throw ParseError("config: mesh_h must be positive", line_no);
        } else if (key == "refine") {
            cfg.refine = detail::parse_number(value, key, line_no);
            if (!(cfg.refine >= 1.0)) throw ParseError("config: refine must be at least 1", line_no);
        } else if (key == "sweep") {
            cfg.sweep = detail::parse_sweep(value, line_no);
        } else {
            throw ParseError("config: unknown key '" + key + "'", line_no);
        }
    }

    if (have_re && have_nu)
        throw ParseError("config: give exactly one of Re and nu, not both", line_no);
    if (!have_re && !have_nu)
        throw ParseError("config: missing Re (or equivalently nu)", line_no);
    if (have_nu) cfg.reynolds = 1.0 / cfg.nu;
    else cfg.nu = reynolds_to_viscosity(cfg.reynolds);
    return cfg;
}

inline RunConfig parse_config_string(const std::string& text) {
    std::istringstream ss(text);
    return parse_config(ss);
}

}  // namespace blm
