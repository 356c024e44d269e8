#ifndef HAMLEVY_CONFIG_HPP
#define HAMLEVY_CONFIG_HPP

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hamlevy/common.hpp"
#include "hamlevy/kernels.hpp"
#include "hamlevy/levy_noise.hpp"
#include "hamlevy/solver.hpp"

namespace hamlevy {

enum class ExperimentKind {
    VarianceScan,
    Covariance,
    Qclt,
    Fclt,
    Ergodic,
    MalliavinVerify,
    ChaosVerify,
    GammaAudit,
};

inline const char* kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::VarianceScan: return "variance-scan";
        case ExperimentKind::Covariance: return "covariance";
        case ExperimentKind::Qclt: return "qclt";
        case ExperimentKind::Fclt: return "fclt";
        case ExperimentKind::Ergodic: return "ergodic";
        case ExperimentKind::MalliavinVerify: return "malliavin-verify";
        case ExperimentKind::ChaosVerify: return "chaos-verify";
        case ExperimentKind::GammaAudit: return "gamma-audit";
    }
    return "?";
}

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::VarianceScan;
    KernelSpec kernel = KernelSpec::gaussian();
    LevyMeasureSpec noise = LevyMeasureSpec::rademacher();
    double p = 2.0;
    double T = 1.0;
    double t = 1.0;
    std::vector<double> R_list = {8, 16, 32, 64};
    std::vector<double> t_grid;
    std::vector<std::pair<double, double>> pairs;
    std::size_t n_replicates = 10000;
    std::uint64_t seed = 1;
    unsigned workers = 0;
    std::string out_dir = ".";
    SolverConfig solver;
    bool scheme_set = false;
    double dk_threshold = 0.06;
    bool kernel_truncation_given = false;

    std::map<std::string, std::string> raw;  // echoed into reports
};

namespace config_detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::vector<double> parse_list(const std::string& field,
                                      const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (...) {
            throw ConfigError("config field '" + field + "': bad number '" +
                              item + "'");
        }
    }
    if (out.empty()) throw ConfigError("config field '" + field + "' is empty");
    return out;
}

// name(arg1,arg2,...) -> {name, args}
inline std::pair<std::string, std::vector<double>> parse_call(
    const std::string& field, const std::string& value) {
    const auto open = value.find('(');
    if (open == std::string::npos) return {trim(value), {}};
    const auto close = value.rfind(')');
    if (close == std::string::npos || close < open)
        throw ConfigError("config field '" + field + "': unbalanced parentheses");
    return {trim(value.substr(0, open)),
            parse_list(field, value.substr(open + 1, close - open - 1))};
}

}  // namespace config_detail

inline KernelSpec parse_kernel(const std::string& value) {
    auto [name, args] = config_detail::parse_call("kernel", value);
    if (name == "gaussian") {
        return args.empty() ? KernelSpec::gaussian() : KernelSpec::gaussian(args[0]);
    }
    if (name == "box") {
        return args.empty() ? KernelSpec::box() : KernelSpec::box(args[0]);
    }
    if (name == "riesz") {
        if (args.empty())
            throw ConfigError("kernel riesz(alpha[,truncation]) needs alpha");
        const double trunc = args.size() > 1 ? args[1] : 0.0;
        if (!(args[0] > 0.0 && args[0] < 1.0))
            throw ConfigError("kernel riesz: alpha must lie in (0,1)");
        // truncation 0 means: resolve later from the experiment geometry
        KernelSpec s = KernelSpec::riesz(args[0], trunc > 0.0 ? trunc : 1.0);
        if (trunc <= 0.0) s.truncation_radius = 0.0;
        return s;
    }
    throw ConfigError("unknown kernel '" + name +
                      "' (expected gaussian[,box,riesz])");
}

inline LevyMeasureSpec parse_noise(const std::string& value) {
    auto [name, args] = config_detail::parse_call("noise", value);
    if (name == "rademacher")
        return LevyMeasureSpec::rademacher(args.empty() ? 1.0 : args[0]);
    if (name == "uniform") {
        if (args.empty()) throw ConfigError("noise uniform(a[,lambda]) needs a");
        return LevyMeasureSpec::uniform(args[0], args.size() > 1 ? args[1] : 1.0);
    }
    if (name == "centered-two-point") {
        if (args.size() < 3)
            throw ConfigError("noise centered-two-point(p,a,b[,lambda])");
        return LevyMeasureSpec::centered_two_point(
            args[0], args[1], args[2], args.size() > 3 ? args[3] : 1.0);
    }
    throw ConfigError("unknown noise preset '" + name + "'");
}

inline ExperimentKind parse_kind(const std::string& value) {
    for (ExperimentKind k :
         {ExperimentKind::VarianceScan, ExperimentKind::Covariance,
          ExperimentKind::Qclt, ExperimentKind::Fclt, ExperimentKind::Ergodic,
          ExperimentKind::MalliavinVerify, ExperimentKind::ChaosVerify,
          ExperimentKind::GammaAudit})
        if (value == kind_name(k)) return k;
    throw ConfigError("unknown experiment kind '" + value + "'");
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::stringstream ss(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = config_detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') continue;  // section header
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key=value");
        const std::string key = config_detail::trim(line.substr(0, eq));
        const std::string value = config_detail::trim(line.substr(eq + 1));
        cfg.raw[key] = value;
        try {
            if (key == "kind") {
                cfg.kind = parse_kind(value);
            } else if (key == "kernel") {
                cfg.kernel = parse_kernel(value);
                cfg.kernel_truncation_given =
                    cfg.kernel.is_riesz() && cfg.kernel.truncation_radius > 0.0;
            } else if (key == "noise") {
                cfg.noise = parse_noise(value);
            } else if (key == "p") {
                cfg.p = std::stod(value);
            } else if (key == "T") {
                cfg.T = std::stod(value);
            } else if (key == "t") {
                cfg.t = std::stod(value);
            } else if (key == "R_list") {
                cfg.R_list = config_detail::parse_list(key, value);
            } else if (key == "t_grid") {
                cfg.t_grid = config_detail::parse_list(key, value);
            } else if (key == "pairs") {
                cfg.pairs.clear();
                std::stringstream ps(value);
                std::string item;
                while (std::getline(ps, item, ';')) {
                    auto [nm, args] = config_detail::parse_call(key, item);
                    if (!nm.empty() || args.size() != 2)
                        throw ConfigError("pairs: expected (t,s);(t,s);...");
                    cfg.pairs.push_back({args[0], args[1]});
                }
            } else if (key == "n_replicates") {
                const long long v = std::stoll(value);
                if (v < 0) throw ConfigError("n_replicates must be >= 0");
                cfg.n_replicates = static_cast<std::size_t>(v);
            } else if (key == "seed") {
                cfg.seed = std::stoull(value);
            } else if (key == "workers") {
                cfg.workers = static_cast<unsigned>(std::stoul(value));
            } else if (key == "out") {
                cfg.out_dir = value;
            } else if (key == "scheme") {
                if (value == "event")
                    cfg.solver.scheme = Scheme::EventDriven;
                else if (value == "grid")
                    cfg.solver.scheme = Scheme::Grid;
                else
                    throw ConfigError("scheme must be 'event' or 'grid'");
                cfg.scheme_set = true;
            } else if (key == "dx") {
                cfg.solver.dx = std::stod(value);
                cfg.solver.dt = cfg.solver.dx;
            } else if (key == "quad_step") {
                cfg.solver.quad_step_target = std::stod(value);
            } else if (key == "picard_depth") {
                cfg.solver.picard_depth = std::stoi(value);
            } else if (key == "dk_threshold") {
                cfg.dk_threshold = std::stod(value);
            } else {
                throw ConfigError("unknown config key '" + key + "'");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("config line " + std::to_string(lineno) + " ('" +
                              key + "'): " + e.what());
        }
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

// cross-field validation; resolves derived defaults in place
inline void validate_config(ExperimentConfig& cfg) {
    cfg.solver.validate();
    if (cfg.n_replicates == 0 && cfg.kind != ExperimentKind::GammaAudit)
        throw ConfigError("n_replicates must be positive");
    if (cfg.R_list.empty()) throw ConfigError("R_list must not be empty");
    for (double R : cfg.R_list)
        if (!(R > 0.0)) throw ConfigError("radii must be positive");
    if (!(cfg.T > 0.0)) throw ConfigError("T must be positive");
    if (!(cfg.t > 0.0 && cfg.t <= cfg.T))
        throw ConfigError("t must lie in (0, T]");
    if (!(cfg.p > 1.0 && cfg.p <= 2.0))
        throw ConfigError("p must lie in (1, 2]");
    if (!(cfg.noise.m2() > 0.0) ||
        !std::isfinite(cfg.noise.m2()))
        throw ConfigError("noise must have finite positive m2");

    if (cfg.kernel.is_riesz()) {
        const double alpha = cfg.kernel.alpha;
        if ((cfg.kind == ExperimentKind::Qclt || cfg.kind == ExperimentKind::Fclt ||
             cfg.kind == ExperimentKind::GammaAudit) &&
            !(cfg.p > 2.0 / (2.0 - alpha)))
            throw ConfigError(
                "Riesz QCLT window violated: need p > 2/(2-alpha) = " +
                std::to_string(2.0 / (2.0 - alpha)));
        // resolve the truncation radius: 8x the solver's spatial window
        const double Rmax =
            *std::max_element(cfg.R_list.begin(), cfg.R_list.end());
        if (!cfg.kernel_truncation_given)
            cfg.kernel.truncation_radius = 8.0 * (Rmax + cfg.T);
        // heavy-tailed kernels run on the grid scheme by default
        if (!cfg.scheme_set &&
            (cfg.kind == ExperimentKind::VarianceScan ||
             cfg.kind == ExperimentKind::Covariance ||
             cfg.kind == ExperimentKind::Qclt || cfg.kind == ExperimentKind::Fclt ||
             cfg.kind == ExperimentKind::Ergodic))
            cfg.solver.scheme = Scheme::Grid;
    }

    if (cfg.kind == ExperimentKind::VarianceScan ||
        cfg.kind == ExperimentKind::Qclt || cfg.kind == ExperimentKind::Ergodic) {
        if (cfg.R_list.size() < 2)
            throw ConfigError(kind_name(cfg.kind) +
                              std::string(": need at least two radii"));
    }
    if (cfg.kind == ExperimentKind::Covariance && cfg.pairs.empty())
        cfg.pairs = {{1.0, 1.0}, {2.0, 1.0}, {2.0, 2.0}, {1.5, 1.0}};
    if (cfg.kind == ExperimentKind::Covariance)
        for (auto& pr : cfg.pairs)
            if (!(pr.first > 0.0 && pr.second > 0.0 && pr.first <= cfg.T &&
                  pr.second <= cfg.T))
                throw ConfigError("covariance pairs must lie in (0, T]");
    if (cfg.kind == ExperimentKind::Fclt && cfg.t_grid.empty()) {
        for (int i = 1; i <= 6; ++i)
            cfg.t_grid.push_back(cfg.T * static_cast<double>(i) / 6.0);
    }
    if (cfg.kind == ExperimentKind::Fclt)
        for (double tg : cfg.t_grid)
            if (!(tg > 0.0 && tg <= cfg.T))
                throw ConfigError("t_grid entries must lie in (0, T]");

    const double beta =
        cfg.kernel.is_riesz() ? cfg.kernel.alpha + 1.0 : 1.0;
    (void)beta;
}

inline double config_beta(const ExperimentConfig& cfg) {
    return cfg.kernel.is_riesz() ? cfg.kernel.alpha + 1.0 : 1.0;
}

}  // namespace hamlevy

#endif
