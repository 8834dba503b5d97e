#include "nsslab/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace nsslab {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"experiment", {"system", "seed", "output_dir"}},
        {"simulation", {"horizon", "dt", "x0"}},
        {"levels", {"v1", "v0_policy", "v0", "interpolate", "confidence", "min_loops"}},
        {"grid", {"r_min", "r_max", "r_count", "r_spacing"}},
        {"fractiles", {"k"}},
        {"ensemble", {"n_paths", "dt", "times", "radius", "n_se", "allowance"}},
        {"premises", {"half_width", "per_dim", "time_points", "gamma_points"}},
        {"output", {"trajectory_stride"}},
    };
    return keys;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
    throw std::invalid_argument("config: bad value for " + key + ": '" + value + "'");
}

double to_double(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        bad_value(key, raw);
    }
    return value;
}

std::uint64_t to_u64(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        bad_value(key, raw);
    }
    return value;
}

bool to_bool(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "true" || s == "1") {
        return true;
    }
    if (s == "false" || s == "0") {
        return false;
    }
    bad_value(key, raw);
}

std::vector<double> to_list(const std::string& key, const std::string& raw) {
    std::vector<double> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(to_double(key, item));
    }
    if (out.empty()) {
        bad_value(key, raw);
    }
    return out;
}

std::string fmt(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string fmt_list(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out += (i ? "," : "") + fmt(xs[i]);
    }
    return out;
}

void apply(ExperimentConfig& cfg, const std::string& section, const std::string& key,
           const std::string& value) {
    const std::string full = section + "." + key;
    const std::string v = trim(value);
    if (section == "experiment") {
        if (key == "system") cfg.system = v;
        else if (key == "seed") cfg.seed = to_u64(full, v);
        else if (key == "output_dir") cfg.output_dir = v;
    } else if (section == "simulation") {
        if (key == "horizon") cfg.horizon = to_double(full, v);
        else if (key == "dt") cfg.dt = to_double(full, v);
        else if (key == "x0") cfg.x0 = to_list(full, v);
    } else if (section == "levels") {
        if (key == "v1") cfg.v1 = to_double(full, v);
        else if (key == "v0_policy") {
            if (v == "optimal_beta") cfg.v0_policy = V0Policy::optimal_beta;
            else if (v == "explicit") cfg.v0_policy = V0Policy::explicit_value;
            else bad_value(full, v);
        } else if (key == "v0") cfg.v0 = to_double(full, v);
        else if (key == "interpolate") cfg.interpolate = to_bool(full, v);
        else if (key == "confidence") cfg.confidence = to_double(full, v);
        else if (key == "min_loops") cfg.min_loops = to_u64(full, v);
    } else if (section == "grid") {
        if (key == "r_min") cfg.r_grid.min = to_double(full, v);
        else if (key == "r_max") cfg.r_grid.max = to_double(full, v);
        else if (key == "r_count") cfg.r_grid.count = to_u64(full, v);
        else if (key == "r_spacing") {
            if (v == "log") cfg.r_grid.spacing = GridSpacing::log;
            else if (v == "linear") cfg.r_grid.spacing = GridSpacing::linear;
            else bad_value(full, v);
        }
    } else if (section == "fractiles") {
        cfg.k_list = to_list(full, v);
    } else if (section == "ensemble") {
        if (key == "n_paths") cfg.n_paths = to_u64(full, v);
        else if (key == "dt") cfg.ensemble_dt = to_double(full, v);
        else if (key == "times") cfg.ensemble_times = to_list(full, v);
        else if (key == "radius") cfg.radius = to_double(full, v);
        else if (key == "n_se") cfg.n_se = to_double(full, v);
        else if (key == "allowance") cfg.allowance = to_double(full, v);
    } else if (section == "premises") {
        if (key == "half_width") cfg.premise_half_width = to_double(full, v);
        else if (key == "per_dim") cfg.premise_per_dim = static_cast<int>(to_u64(full, v));
        else if (key == "time_points") cfg.premise_time_points = to_u64(full, v);
        else if (key == "gamma_points") cfg.gamma_points = to_u64(full, v);
    } else if (section == "output") {
        cfg.trajectory_stride = to_u64(full, v);
    }
}

ExperimentConfig from_tree(const pt::ptree& tree) {
    ExperimentConfig cfg;
    for (const auto& [section, body] : tree) {
        const auto known = known_keys().find(section);
        if (known == known_keys().end()) {
            throw std::invalid_argument("config: unknown section [" + section + "]");
        }
        if (!body.data().empty()) {
            throw std::invalid_argument("config: key '" + section + "' outside any section");
        }
        for (const auto& [key, node] : body) {
            if (!known->second.contains(key)) {
                throw std::invalid_argument("config: unknown key " + section + "." + key);
            }
            apply(cfg, section, key, node.data());
        }
    }
    cfg.validate();
    return cfg;
}

void apply_overrides(pt::ptree& tree, const std::vector<std::string>& overrides) {
    for (const std::string& item : overrides) {
        const auto eq = item.find('=');
        const std::string path = trim(item.substr(0, eq));
        const auto dot = path.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot == 0 ||
            dot + 1 == path.size() || path.find('.', dot + 1) != std::string::npos) {
            throw std::invalid_argument("config: override must look like section.key=value: '" +
                                        item + "'");
        }
        tree.put(pt::ptree::path_type(path, '.'), trim(item.substr(eq + 1)));
    }
}

}  // namespace

std::vector<double> RadiusGrid::points() const {
    if (count == 0 || !(min > 0.0) || !(max >= min)) {
        throw std::invalid_argument("RadiusGrid: need 0 < min <= max and count >= 1");
    }
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double frac = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        out[i] = spacing == GridSpacing::log ? min * std::pow(max / min, frac) : min + frac * (max - min);
    }
    out.back() = count == 1 ? min : max;
    return out;
}

void ExperimentConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) {
            throw std::invalid_argument(std::string("config: ") + what);
        }
    };
    require(!system.empty(), "experiment.system must be set");
    require(horizon > 0.0 && dt > 0.0 && dt <= horizon, "need 0 < simulation.dt <= simulation.horizon");
    require(!x0.empty(), "simulation.x0 must be non-empty");
    require(v1 > 0.0, "levels.v1 must be positive");
    require(v0_policy == V0Policy::optimal_beta || (v0 > 0.0 && v0 < v1),
            "explicit levels.v0 must lie in (0, v1)");
    require(confidence > 0.5 && confidence < 1.0, "levels.confidence must lie in (0.5, 1)");
    require(r_grid.count >= 1 && r_grid.min > 0.0 && r_grid.max >= r_grid.min, "bad [grid]");
    for (double k : k_list) {
        require(k > 0.0 && k < 1.0, "fractiles.k entries must lie in (0, 1)");
    }
    require(n_paths == 0 || (ensemble_dt > 0.0 && !ensemble_times.empty()), "bad [ensemble]");
    for (double t : ensemble_times) {
        require(t >= 0.0, "ensemble.times must be non-negative");
    }
    require(radius > 0.0, "ensemble.radius must be positive");
    require(premise_per_dim >= 1 && premise_time_points >= 1 && gamma_points >= 1, "bad [premises]");
}

ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    apply_overrides(tree, overrides);
    return from_tree(tree);
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("config: cannot open " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), overrides);
}

std::string to_ini(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "[experiment]\n"
        << "system = " << cfg.system << "\n"
        << "seed = " << cfg.seed << "\n"
        << "output_dir = " << cfg.output_dir.string() << "\n\n"
        << "[simulation]\n"
        << "horizon = " << fmt(cfg.horizon) << "\n"
        << "dt = " << fmt(cfg.dt) << "\n"
        << "x0 = " << fmt_list(cfg.x0) << "\n\n"
        << "[levels]\n"
        << "v1 = " << fmt(cfg.v1) << "\n"
        << "v0_policy = " << (cfg.v0_policy == V0Policy::optimal_beta ? "optimal_beta" : "explicit") << "\n"
        << "v0 = " << fmt(cfg.v0) << "\n"
        << "interpolate = " << (cfg.interpolate ? "true" : "false") << "\n"
        << "confidence = " << fmt(cfg.confidence) << "\n"
        << "min_loops = " << cfg.min_loops << "\n\n"
        << "[grid]\n"
        << "r_min = " << fmt(cfg.r_grid.min) << "\n"
        << "r_max = " << fmt(cfg.r_grid.max) << "\n"
        << "r_count = " << cfg.r_grid.count << "\n"
        << "r_spacing = " << (cfg.r_grid.spacing == GridSpacing::log ? "log" : "linear") << "\n\n"
        << "[fractiles]\n"
        << "k = " << fmt_list(cfg.k_list) << "\n\n"
        << "[ensemble]\n"
        << "n_paths = " << cfg.n_paths << "\n"
        << "dt = " << fmt(cfg.ensemble_dt) << "\n"
        << "times = " << fmt_list(cfg.ensemble_times) << "\n"
        << "radius = " << fmt(cfg.radius) << "\n"
        << "n_se = " << fmt(cfg.n_se) << "\n"
        << "allowance = " << fmt(cfg.allowance) << "\n\n"
        << "[premises]\n"
        << "half_width = " << fmt(cfg.premise_half_width) << "\n"
        << "per_dim = " << cfg.premise_per_dim << "\n"
        << "time_points = " << cfg.premise_time_points << "\n"
        << "gamma_points = " << cfg.gamma_points << "\n\n"
        << "[output]\n"
        << "trajectory_stride = " << cfg.trajectory_stride << "\n";
    return out.str();
}

}  // namespace nsslab
