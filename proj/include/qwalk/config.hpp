#pragma once

#include <charconv>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qwalk {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Experiment { simulate, conserve, extended, lorentz, continuum, mechanics };

/// Validated run description parsed from a flat key=value document.
struct RunSpec {
    Experiment experiment = Experiment::simulate;
    std::size_t n_sites = 64;
    std::size_t steps = 32;
    std::string coin = "random:1";           // identity | hadamard | random:<seed> | random_site:<seed>
    std::string initial_state = "random:1";  // delta:<p> | plane_wave:<mode> | gaussian:<c>:<w> | random:<seed>
    double rapidity = 0.5;
    double lambda = 0;  // 0: derive exp(rapidity / 2)
    std::vector<double> epsilon_list{0.1, 0.05, 0.025};
    double mass = 1.0;
    double wavenumber = std::numbers::pi / 8;
    double t_final = 4.0;
    double solver_tol = 1e-12;
    std::string output_path = ".";
};

namespace detail {
inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] inline void config_fail(int line, const std::string& msg) {
    throw ConfigError("config error (line " + std::to_string(line) + "): " + msg);
}

inline double parse_double(const std::string& v, int line, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        config_fail(line, "invalid number for " + key + ": '" + v + "'");
    }
}

inline std::size_t parse_size(const std::string& v, int line, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long long i = std::stoll(v, &pos);
        if (pos != v.size() || i < 0) throw std::invalid_argument("not a non-negative integer");
        return static_cast<std::size_t>(i);
    } catch (const std::exception&) {
        config_fail(line, "invalid integer for " + key + ": '" + v + "'");
    }
}
}  // namespace detail

/// Apply one key=value assignment (also used for --override flags).
/// `line` is used in error messages; pass 0 for command-line overrides.
inline void apply_config_entry(RunSpec& spec, const std::string& key, const std::string& value,
                               int line) {
    using detail::config_fail;
    if (key == "experiment") {
        if (value == "simulate")
            spec.experiment = Experiment::simulate;
        else if (value == "conserve")
            spec.experiment = Experiment::conserve;
        else if (value == "extended")
            spec.experiment = Experiment::extended;
        else if (value == "lorentz")
            spec.experiment = Experiment::lorentz;
        else if (value == "continuum")
            spec.experiment = Experiment::continuum;
        else if (value == "mechanics")
            spec.experiment = Experiment::mechanics;
        else
            config_fail(line, "unknown experiment '" + value + "'");
    } else if (key == "n_sites") {
        spec.n_sites = detail::parse_size(value, line, key);
    } else if (key == "steps") {
        spec.steps = detail::parse_size(value, line, key);
    } else if (key == "coin") {
        spec.coin = value;
    } else if (key == "initial_state") {
        spec.initial_state = value;
    } else if (key == "rapidity") {
        spec.rapidity = detail::parse_double(value, line, key);
    } else if (key == "lambda") {
        spec.lambda = detail::parse_double(value, line, key);
    } else if (key == "mass") {
        spec.mass = detail::parse_double(value, line, key);
    } else if (key == "wavenumber") {
        spec.wavenumber = detail::parse_double(value, line, key);
    } else if (key == "t_final") {
        spec.t_final = detail::parse_double(value, line, key);
    } else if (key == "solver_tol") {
        spec.solver_tol = detail::parse_double(value, line, key);
    } else if (key == "output_path") {
        spec.output_path = value;
    } else if (key == "epsilon_list") {
        spec.epsilon_list.clear();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ','))
            spec.epsilon_list.push_back(detail::parse_double(detail::trim(item), line, key));
        if (spec.epsilon_list.empty()) config_fail(line, "epsilon_list is empty");
    } else {
        config_fail(line, "unknown key '" + key + "'");
    }
}

inline void validate_spec(const RunSpec& spec) {
    if (spec.n_sites < 4 || spec.n_sites % 2 != 0)
        throw ConfigError("config error: n_sites must be even and >= 4");
    if (spec.steps < 1) throw ConfigError("config error: steps must be >= 1");
    if (spec.solver_tol <= 0) throw ConfigError("config error: solver_tol must be > 0");
}

/// Parse a flat key=value document ('#' starts a comment, blank lines
/// ignored). Every error message carries the offending line number.
inline RunSpec parse_config(const std::string& text) {
    RunSpec spec;
    bool have_experiment = false;
    std::stringstream ss(text);
    std::string raw;
    int line = 0;
    while (std::getline(ss, raw)) {
        ++line;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        const std::string entry = detail::trim(raw);
        if (entry.empty()) continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
            detail::config_fail(line, "expected key=value, got '" + entry + "'");
        const std::string key = detail::trim(entry.substr(0, eq));
        const std::string value = detail::trim(entry.substr(eq + 1));
        if (key.empty()) detail::config_fail(line, "empty key");
        apply_config_entry(spec, key, value, line);
        if (key == "experiment") have_experiment = true;
    }
    validate_spec(spec);
    if (!have_experiment) throw ConfigError("config error: experiment required");
    return spec;
}

}  // namespace qwalk
