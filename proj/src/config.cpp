#include "minplus/config.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace minplus {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                          (v.front() == '\'' && v.back() == '\''))) {
        return v.substr(1, v.size() - 2);
    }
    return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        std::size_t used = 0;
        double d = 0.0;
        try {
            d = std::stod(item, &used);
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': cannot parse number '" + item + "'");
        }
        if (used != item.size()) {
            throw ConfigError("key '" + key + "': trailing characters in '" + item + "'");
        }
        out.push_back(d);
    }
    if (out.empty()) {
        throw ConfigError("key '" + key + "': empty list");
    }
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    const auto list = parse_list(key, v);
    if (list.size() != 1) throw ConfigError("key '" + key + "': expected one number");
    return list[0];
}

long parse_int(const std::string& key, const std::string& v) {
    const double d = parse_double(key, v);
    if (d != std::floor(d)) throw ConfigError("key '" + key + "': expected an integer");
    return static_cast<long>(d);
}

Vec to_vec(const std::vector<double>& v) {
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
}

Mat to_mat(const std::string& key, const std::vector<double>& v, int rows, int cols) {
    if (static_cast<int>(v.size()) != rows * cols) {
        throw ConfigError("key '" + key + "': expected " + std::to_string(rows * cols) +
                          " entries, got " + std::to_string(v.size()));
    }
    Mat out(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) out(r, c) = v[static_cast<std::size_t>(r * cols + c)];
    }
    return out;
}

}  // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = unquote(trim(line.substr(eq + 1)));
        if (key.empty() || value.empty()) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key or value");
        }
        if (kv.count(key)) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        kv[key] = value;
    }

    RunConfig cfg;
    std::vector<double> raw_half_width{1.0};
    std::map<std::string, std::vector<double>> raw_mats;

    for (const auto& [key, value] : kv) {
        if (key == "model") cfg.model = value;
        else if (key == "T") cfg.T = static_cast<int>(parse_int(key, value));
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
        else if (key == "noise_kind") cfg.noise_kind = value;
        else if (key == "noise_w_std") cfg.noise_w_std = parse_double(key, value);
        else if (key == "noise_v_std") cfg.noise_v_std = parse_double(key, value);
        else if (key == "x0") cfg.x0 = to_vec(parse_list(key, value));
        else if (key == "xbar0") cfg.xbar0 = to_vec(parse_list(key, value));
        else if (key == "phi0") cfg.phi0 = parse_double(key, value);
        else if (key == "window_half_width") raw_half_width = parse_list(key, value);
        else if (key == "partitions") cfg.partitions = static_cast<int>(parse_int(key, value));
        else if (key == "samples_per_partition")
            cfg.samples_per_partition = static_cast<int>(parse_int(key, value));
        else if (key == "prune_max_members")
            cfg.prune_max_members = static_cast<int>(parse_int(key, value));
        else if (key == "prune_strategy") cfg.prune_strategy = value;
        else if (key == "prune_seed") cfg.prune_seed = static_cast<std::uint64_t>(parse_int(key, value));
        else if (key == "prune_max_iterations")
            cfg.prune_max_iterations = static_cast<int>(parse_int(key, value));
        else if (key == "measurement_mode") cfg.measurement_mode = value;
        else if (key == "measurements") cfg.measurements = value;
        else if (key == "out_dir") cfg.out_dir = value;
        else if (key == "F_fwd" || key == "f_fwd" || key == "B" || key == "C" || key == "R" ||
                 key == "Q_eta" || key == "N0")
            raw_mats[key] = parse_list(key, value);
        else if (key == "jump_step") cfg.jump_step = static_cast<int>(parse_int(key, value));
        else if (key == "jump_size") cfg.jump_size = parse_double(key, value);
        else if (key == "jump_dim") cfg.jump_dim = static_cast<int>(parse_int(key, value));
        else if (key == "recovery_threshold") cfg.recovery_threshold = parse_double(key, value);
        else throw ConfigError("unknown config key '" + key + "'");
    }

    if (cfg.T < 0) throw ConfigError("T must be >= 0");
    if (cfg.partitions < 1) throw ConfigError("partitions must be >= 1");
    if (cfg.samples_per_partition < 3) throw ConfigError("samples_per_partition must be >= 3");
    if (cfg.prune_max_members < 1) throw ConfigError("prune_max_members must be >= 1");
    if (cfg.noise_kind != "gaussian" && cfg.noise_kind != "uniform")
        throw ConfigError("noise_kind must be gaussian or uniform");
    if (cfg.prune_strategy != "cluster" && cfg.prune_strategy != "value")
        throw ConfigError("prune_strategy must be cluster or value");
    if (cfg.measurement_mode != "combined" && cfg.measurement_mode != "split")
        throw ConfigError("measurement_mode must be combined or split");
    if (cfg.model != "cubic_demo" && cfg.model != "custom")
        throw ConfigError("model must be cubic_demo or custom");

    int n = 2;
    if (cfg.model == "custom") {
        if (!cfg.x0) throw ConfigError("custom model requires x0");
        n = static_cast<int>(cfg.x0->size());
        auto need = [&](const char* key) -> const std::vector<double>& {
            auto it = raw_mats.find(key);
            if (it == raw_mats.end()) throw ConfigError(std::string("custom model requires ") + key);
            return it->second;
        };
        cfg.F_fwd = to_mat("F_fwd", need("F_fwd"), n, n);
        const int m = static_cast<int>(need("B").size()) / n;
        if (m < 1 || static_cast<int>(need("B").size()) != n * m)
            throw ConfigError("B length must be a multiple of n");
        cfg.B = to_mat("B", need("B"), n, m);
        const int p = static_cast<int>(need("C").size()) / n;
        if (p < 1 || static_cast<int>(need("C").size()) != p * n)
            throw ConfigError("C length must be a multiple of n");
        cfg.C = to_mat("C", need("C"), p, n);
        if (raw_mats.count("f_fwd")) cfg.f_fwd = to_vec(raw_mats["f_fwd"]);
        if (raw_mats.count("R")) cfg.R = to_mat("R", raw_mats["R"], p, p);
        if (raw_mats.count("Q_eta")) cfg.Q_eta = to_mat("Q_eta", raw_mats["Q_eta"], m, m);
        if (raw_mats.count("N0")) cfg.N0 = to_mat("N0", raw_mats["N0"], n, n);
    } else {
        if (raw_mats.count("F_fwd") || raw_mats.count("f_fwd") || raw_mats.count("B") ||
            raw_mats.count("C")) {
            throw ConfigError("dynamics/output matrices are only valid with model = custom");
        }
        if (raw_mats.count("R")) cfg.R = to_mat("R", raw_mats["R"], 1, 1);
        if (raw_mats.count("Q_eta")) cfg.Q_eta = to_mat("Q_eta", raw_mats["Q_eta"], 1, 1);
        if (raw_mats.count("N0")) cfg.N0 = to_mat("N0", raw_mats["N0"], 2, 2);
        if (cfg.x0 && cfg.x0->size() != 2) throw ConfigError("cubic_demo state has two dimensions");
    }

    if (raw_half_width.size() == 1) {
        cfg.window_half_width = Vec::Constant(n, raw_half_width[0]);
    } else if (static_cast<int>(raw_half_width.size()) == n) {
        cfg.window_half_width = to_vec(raw_half_width);
    } else {
        throw ConfigError("window_half_width must be a scalar or one entry per state dimension");
    }
    if ((cfg.window_half_width.array() <= 0).any()) {
        throw ConfigError("window_half_width must be positive");
    }
    if (cfg.jump_step < 0 || cfg.jump_step > cfg.T)
        throw ConfigError("jump_step must lie in [0, T]");
    if (cfg.jump_dim < 1 || cfg.jump_dim > n) throw ConfigError("jump_dim out of range");
    if (cfg.xbar0 && cfg.x0 && cfg.xbar0->size() != cfg.x0->size())
        throw ConfigError("xbar0 and x0 must have the same length");
    return cfg;
}

ForwardModel forward_model(const RunConfig& cfg) {
    ForwardModel fm;
    if (cfg.model == "cubic_demo") {
        fm.n = 2;
        fm.m = 1;
        fm.p = 1;
        fm.F = Mat{{1.0, 0.0}, {0.1, 1.0}};
        fm.f = Vec::Zero(2);
        fm.B = Mat{{0.1}, {0.0}};
        fm.linear_output = false;
        fm.output = [](const Vec& x) {
            Vec y(1);
            y(0) = x(1) * x(1) * x(1) / 40.0;
            return y;
        };
        fm.output_active = {1};
        return fm;
    }
    fm.F = *cfg.F_fwd;
    fm.n = static_cast<int>(fm.F.rows());
    fm.f = cfg.f_fwd ? *cfg.f_fwd : Vec(Vec::Zero(fm.n));
    fm.B = *cfg.B;
    fm.m = static_cast<int>(fm.B.cols());
    fm.C = *cfg.C;
    fm.p = static_cast<int>(fm.C.rows());
    fm.linear_output = true;
    const Mat C = fm.C;
    fm.output = [C](const Vec& x) { return Vec(C * x); };
    return fm;
}

Vec RunConfig::half_width_for(int state_dim) const {
    if (window_half_width.size() == 0) {
        return Vec::Constant(state_dim, 1.0);
    }
    if (window_half_width.size() == 1) {
        return Vec::Constant(state_dim, window_half_width(0));
    }
    if (window_half_width.size() != state_dim) {
        throw ConfigError("window_half_width must be a scalar or one entry per state dimension");
    }
    return window_half_width;
}

Vec truth_initial_state(const RunConfig& cfg) {
    if (cfg.x0) return *cfg.x0;
    return (Vec(2) << 1.0, 0.0).finished();
}

ModelSpec filter_model(const RunConfig& cfg) {
    const ForwardModel fm = forward_model(cfg);

    Eigen::FullPivLU<Mat> lu(fm.F);
    if (!lu.isInvertible()) {
        throw ConfigError("forward dynamics matrix is singular; cannot derive backward map");
    }
    const Mat F_bwd = lu.inverse();
    const Vec f_bwd = -(F_bwd * fm.f);

    ModelSpec m;
    m.n = fm.n;
    m.m = fm.m;
    m.p = fm.p;
    m.dynamics = AffineDynamics{F_bwd, f_bwd};
    m.B = fm.B;
    if (fm.linear_output) {
        m.output = LinearOutput{fm.C};
    } else {
        m.output = NonlinearOutput{fm.output, fm.output_active};
    }
    m.R = cfg.R ? *cfg.R : Mat(Mat::Identity(fm.p, fm.p));
    m.Q_eta = cfg.Q_eta ? *cfg.Q_eta : Mat(Mat::Identity(fm.m, fm.m));
    m.N0 = cfg.N0 ? *cfg.N0 : Mat(Mat::Identity(fm.n, fm.n));

    m.xbar0 = cfg.xbar0 ? *cfg.xbar0 : truth_initial_state(cfg);
    m.phi0 = cfg.phi0;
    m.validate();
    return m;
}

FilterConfig filter_config(const RunConfig& cfg, int state_dim) {
    FilterConfig fc;
    fc.window_half_width = cfg.half_width_for(state_dim);
    fc.partitions = cfg.partitions;
    fc.samples_per_partition = cfg.samples_per_partition;
    fc.prune.max_members = cfg.prune_max_members;
    fc.prune.strategy = cfg.prune_strategy == "cluster" ? PruneStrategy::ClusterPrune
                                                        : PruneStrategy::ValuePrune;
    fc.prune.seed = cfg.prune_seed;
    fc.prune.max_iterations = cfg.prune_max_iterations;
    fc.measurement_mode = cfg.measurement_mode == "combined" ? MeasurementMode::Combined
                                                             : MeasurementMode::Split;
    return fc;
}

}  // namespace minplus
