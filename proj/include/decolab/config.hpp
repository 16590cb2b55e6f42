// config.hpp — strict key=value experiment configuration and run manifests
//
// Format: one `key = value` per line, '#' starts a comment. Unknown keys are
// fatal (a typo must never silently fall back to a default).
#pragma once

#include <cctype>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "decolab/core.hpp"
#include "decolab/params.hpp"

namespace decolab::config {

class parse_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string experiment;  // optional in the file; the CLI sets it
    ModelParams params;
    std::size_t dim = 16;
    std::uint64_t seed = 1;
    std::size_t n_modes = 1024;
    double delta_omega = 0.01;
    double dt = 1e-3;
    double T = 10.0;
    std::size_t n_outer = 10000;
    std::size_t n_inner = 4;
    std::string out_dir = "results";
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_num(const std::string& v, const std::string& key, int line) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw parse_error("line " + std::to_string(line) + ": value for '" + key
                          + "' is not a number: '" + v + "'");
    }
}

inline std::size_t parse_size(const std::string& v, const std::string& key, int line) {
    const double x = parse_num(v, key, line);
    if (x < 0 || x != static_cast<double>(static_cast<std::size_t>(x)))
        throw parse_error("line " + std::to_string(line) + ": value for '" + key
                          + "' must be a nonnegative integer");
    return static_cast<std::size_t>(x);
}

} // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::size_t hash = raw.find('#');
        std::string s = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw parse_error("line " + std::to_string(line) + ": expected 'key = value'");
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string val = detail::trim(s.substr(eq + 1));
        if (key.empty() || val.empty())
            throw parse_error("line " + std::to_string(line) + ": empty key or value");

        if (key == "experiment") cfg.experiment = val;
        else if (key == "hbar") cfg.params.hbar = detail::parse_num(val, key, line);
        else if (key == "mass") cfg.params.mass = detail::parse_num(val, key, line);
        else if (key == "omega0") cfg.params.omega0 = detail::parse_num(val, key, line);
        else if (key == "a") cfg.params.a = detail::parse_num(val, key, line);
        else if (key == "dim") cfg.dim = detail::parse_size(val, key, line);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(detail::parse_size(val, key, line));
        else if (key == "n_modes") cfg.n_modes = detail::parse_size(val, key, line);
        else if (key == "delta_omega") cfg.delta_omega = detail::parse_num(val, key, line);
        else if (key == "dt") cfg.dt = detail::parse_num(val, key, line);
        else if (key == "T") cfg.T = detail::parse_num(val, key, line);
        else if (key == "n_outer") cfg.n_outer = detail::parse_size(val, key, line);
        else if (key == "n_inner") cfg.n_inner = detail::parse_size(val, key, line);
        else if (key == "out_dir") cfg.out_dir = val;
        else
            throw parse_error("line " + std::to_string(line) + ": unknown key '" + key + "'");
    }

    try {
        cfg.params.validate();
    } catch (const std::invalid_argument& e) {
        throw parse_error(std::string("invalid configuration: ") + e.what());
    }
    if (cfg.dim < 2) throw parse_error("invalid configuration: dim must be >= 2");
    if (!(cfg.delta_omega > 0)) throw parse_error("invalid configuration: delta_omega must be > 0");
    if (!(cfg.dt > 0)) throw parse_error("invalid configuration: dt must be > 0");
    if (!(cfg.T > 0)) throw parse_error("invalid configuration: T must be > 0");
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// Echo block: the effective configuration including derived constants.
inline std::string echo(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "experiment = " << cfg.experiment << "\n";
    out << "hbar = " << cfg.params.hbar << "\n";
    out << "mass = " << cfg.params.mass << "\n";
    out << "omega0 = " << cfg.params.omega0 << "\n";
    out << "a = " << cfg.params.a << "\n";
    out << "epsilon = " << cfg.params.epsilon() << "  # derived, a/(2 omega0)\n";
    out << "sigma = " << cfg.params.sigma() << "  # derived, sqrt(hbar/mass)\n";
    out << "dim = " << cfg.dim << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "n_modes = " << cfg.n_modes << "\n";
    out << "delta_omega = " << cfg.delta_omega << "\n";
    out << "dt = " << cfg.dt << "\n";
    out << "T = " << cfg.T << "\n";
    out << "n_outer = " << cfg.n_outer << "\n";
    out << "n_inner = " << cfg.n_inner << "\n";
    out << "out_dir = " << cfg.out_dir << "\n";
    return out.str();
}

inline void write_manifest(const std::string& path, const ExperimentConfig& cfg,
                           double wall_seconds, int exit_status) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    out << "# decolab run manifest\n";
    out << "library_version = " << DECOLAB_VERSION << "\n";
    out << "wall_seconds = " << wall_seconds << "\n";
    out << "exit_status = " << exit_status << "\n";
    out << "timestamp_unix = " << now << "\n";
    out << "# configuration echo\n";
    out << echo(cfg);
}

} // namespace decolab::config
