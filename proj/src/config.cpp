#include "pancake/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pancake/errors.hpp"

namespace pancake {

namespace {

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": '" + value + "'");
    }
}

void apply_key(RunConfig& cfg, const std::string& section, const std::string& key,
               const std::string& value) {
    const std::string full = section.empty() ? key : section + "." + key;
    auto& sim = cfg.sim;
    if (full == "sim.kappa") sim.kappa = parse_double(full, value);
    else if (full == "sim.beta") sim.beta = parse_double(full, value);
    else if (full == "sim.tau_u") sim.tau_u = parse_double(full, value);
    else if (full == "sim.alpha") sim.alpha = parse_double(full, value);
    else if (full == "sim.sigma_batter") sim.sigma_batter = parse_double(full, value);
    else if (full == "sim.sigma_air") sim.sigma_air = parse_double(full, value);
    else if (full == "sim.thickness0") sim.thickness0 = parse_double(full, value);
    else if (full == "sim.gamma") sim.gamma = parse_double(full, value);
    else if (full == "sim.flow_rate") sim.flow_rate = parse_double(full, value);
    else if (full == "sim.theta_max") sim.theta_max = parse_double(full, value);
    else if (full == "sim.c_theta") sim.c_theta = parse_double(full, value);
    else if (full == "perception.uniformity_threshold_fraction")
        cfg.uniformity_threshold_fraction = parse_double(full, value);
    else if (full == "perception.jump_threshold_sigmas")
        cfg.jump_threshold_sigmas = parse_double(full, value);
    else if (full == "perception.weighting_mode") {
        try {
            cfg.weighting_mode = weighting_mode_from_string(value);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    } else if (full == "run.seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_double(full, value));
    } else if (full == "run.units") {
        if (value != "mm" && value != "cm" && value != "m")
            throw ConfigError("run.units must be mm, cm or m; got '" + value + "'");
        cfg.units = value;
    } else if (full == "paths.dataset_dir") {
        cfg.dataset_dir = value;
    } else if (full == "paths.model_dir") {
        cfg.model_dir = value;
    } else if (full == "paths.output_dir") {
        cfg.output_dir = value;
    } else {
        throw ConfigError("unrecognized config key: " + full);
    }
}

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "sim" && section != "perception" && section != "run" &&
                section != "paths")
                throw ConfigError("unrecognized config section: [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
        apply_key(cfg, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    validate(cfg.sim);
    if (!(cfg.uniformity_threshold_fraction > 0.0) || !(cfg.jump_threshold_sigmas > 0.0))
        throw ConfigError("thresholds must be positive");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
    char buf[2048];
    std::snprintf(buf, sizeof buf,
                  "[sim]\n"
                  "kappa = %.12g\n"
                  "beta = %.12g\n"
                  "tau_u = %.12g\n"
                  "alpha = %.12g\n"
                  "sigma_batter = %.12g\n"
                  "sigma_air = %.12g\n"
                  "thickness0 = %.12g\n"
                  "gamma = %.12g\n"
                  "flow_rate = %.12g\n"
                  "theta_max = %.12g\n"
                  "c_theta = %.12g\n"
                  "\n[perception]\n"
                  "uniformity_threshold_fraction = %.12g\n"
                  "jump_threshold_sigmas = %.12g\n"
                  "weighting_mode = %s\n"
                  "\n[run]\n"
                  "seed = %llu\n"
                  "units = %s\n"
                  "\n[paths]\n"
                  "dataset_dir = %s\n"
                  "model_dir = %s\n"
                  "output_dir = %s\n",
                  c.sim.kappa, c.sim.beta, c.sim.tau_u, c.sim.alpha, c.sim.sigma_batter,
                  c.sim.sigma_air, c.sim.thickness0, c.sim.gamma, c.sim.flow_rate, c.sim.theta_max,
                  c.sim.c_theta, c.uniformity_threshold_fraction, c.jump_threshold_sigmas,
                  to_string(c.weighting_mode).c_str(),
                  static_cast<unsigned long long>(c.seed), c.units.c_str(), c.dataset_dir.c_str(),
                  c.model_dir.c_str(), c.output_dir.c_str());
    return buf;
}

double parse_length(const std::string& text, const std::string& default_unit) {
    std::string num = trim(text);
    std::string unit = default_unit;
    for (const char* suffix : {"mm", "cm", "m"}) {
        const size_t n = std::string(suffix).size();
        if (num.size() > n && num.compare(num.size() - n, n, suffix) == 0) {
            unit = suffix;
            num = trim(num.substr(0, num.size() - n));
            break;
        }
    }
    double value = 0.0;
    try {
        size_t used = 0;
        value = std::stod(num, &used);
        if (used != num.size()) throw std::invalid_argument(num);
    } catch (const std::exception&) {
        throw std::invalid_argument("cannot parse length '" + text + "'");
    }
    if (unit == "mm") return value * 1e-3;
    if (unit == "cm") return value * 1e-2;
    return value;
}

}  // namespace pancake
