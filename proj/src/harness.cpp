#include "minplus/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "minplus/csv.hpp"
#include "minplus/oracles.hpp"
#include "minplus/rng.hpp"

namespace minplus {

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

std::vector<std::string> y_headers(int p) {
    std::vector<std::string> h;
    if (p == 1) {
        h.push_back("y");
    } else {
        for (int j = 0; j < p; ++j) h.push_back("y" + std::to_string(j + 1));
    }
    return h;
}

double rmse_of(const std::vector<double>& errs) {
    if (errs.empty()) return 0.0;
    double acc = 0.0;
    for (double e : errs) acc += e * e;
    return std::sqrt(acc / static_cast<double>(errs.size()));
}

}  // namespace

SimOutput simulate(const RunConfig& cfg) {
    const ForwardModel fm = forward_model(cfg);
    Xoshiro256pp rng(cfg.seed);
    const bool uniform = cfg.noise_kind == "uniform";

    SimOutput out;
    Vec x = truth_initial_state(cfg);
    out.truth.push_back(x);
    for (int k = 1; k <= cfg.T; ++k) {
        Vec w(fm.m);
        for (int i = 0; i < fm.m; ++i) w(i) = rng.noise(cfg.noise_w_std, uniform);
        x = fm.F * x + fm.f + fm.B * w;
        if (cfg.jump_step > 0 && k == cfg.jump_step) {
            x(cfg.jump_dim - 1) += cfg.jump_size;
        }
        Vec v(fm.p);
        for (int i = 0; i < fm.p; ++i) v(i) = rng.noise(cfg.noise_v_std, uniform);
        out.truth.push_back(x);
        out.ys.push_back(fm.output(x) + v);
    }
    return out;
}

void write_truth_csv(const std::string& path, const std::vector<Vec>& truth) {
    const int n = truth.empty() ? 0 : static_cast<int>(truth.front().size());
    std::vector<std::string> header{"step"};
    for (int d = 0; d < n; ++d) header.push_back("x" + std::to_string(d + 1));
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        std::vector<std::string> row{std::to_string(k)};
        for (int d = 0; d < n; ++d) row.push_back(fmt_double(truth[k](d)));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

void write_measurements_csv(const std::string& path, const std::vector<Vec>& ys) {
    const int p = ys.empty() ? 1 : static_cast<int>(ys.front().size());
    std::vector<std::string> header{"step"};
    for (const auto& h : y_headers(p)) header.push_back(h);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < ys.size(); ++k) {
        std::vector<std::string> row{std::to_string(k + 1)};
        for (int j = 0; j < p; ++j) row.push_back(fmt_double(ys[k](j)));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

std::vector<Vec> read_measurements_csv(const std::string& path, int p) {
    const CsvTable table = read_csv(path);
    if (static_cast<int>(table.header.size()) != p + 1) {
        throw ConfigError("measurement file must have step plus " + std::to_string(p) +
                          " value column(s): " + path);
    }
    std::vector<Vec> ys;
    ys.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        if (static_cast<int>(row.size()) != p + 1) {
            throw ConfigError("short row in " + path);
        }
        Vec y(p);
        for (int j = 0; j < p; ++j) y(j) = std::stod(row[static_cast<std::size_t>(j + 1)]);
        ys.push_back(std::move(y));
    }
    return ys;
}

RunOutput run_filter(const RunConfig& cfg, OracleMode oracle, std::ostream& log) {
    const ModelSpec model = filter_model(cfg);
    const FilterConfig fc = filter_config(cfg, model.n);
    std::filesystem::create_directories(cfg.out_dir);

    RunOutput out;
    if (cfg.measurements == "generate") {
        SimOutput sim = simulate(cfg);
        out.truth = std::move(sim.truth);
        out.ys = std::move(sim.ys);
        write_truth_csv(join_path(cfg.out_dir, "truth.csv"), out.truth);
        write_measurements_csv(join_path(cfg.out_dir, "measurements.csv"), out.ys);
    } else {
        out.ys = read_measurements_csv(cfg.measurements, model.p);
    }

    out.result = run(model, fc, out.ys);
    for (const StepRecord& s : out.result.steps) out.total_ms += s.step_ms;

    // estimates.csv: one row per measurement step; truth columns stay empty
    // when measurements came from a file.
    std::vector<std::string> header{"step"};
    for (int d = 0; d < model.n; ++d) header.push_back("x" + std::to_string(d + 1) + "_true");
    for (const auto& h : y_headers(model.p)) header.push_back(h);
    for (int d = 0; d < model.n; ++d) header.push_back("x" + std::to_string(d + 1) + "_hat");
    header.push_back("card_pre");
    header.push_back("card_post");

    std::vector<std::vector<std::string>> rows;
    std::vector<std::vector<std::string>> timing_rows;
    for (std::size_t k = 0; k < out.result.steps.size(); ++k) {
        const StepRecord& s = out.result.steps[k];
        std::vector<std::string> row{std::to_string(k + 1)};
        for (int d = 0; d < model.n; ++d) {
            row.push_back(out.truth.empty() ? "" : fmt_double(out.truth[k + 1](d)));
        }
        for (int j = 0; j < model.p; ++j) row.push_back(fmt_double(out.ys[k](j)));
        for (int d = 0; d < model.n; ++d) row.push_back(fmt_double(s.estimate(d)));
        row.push_back(std::to_string(s.card_pre));
        row.push_back(std::to_string(s.card_post));
        rows.push_back(std::move(row));
        timing_rows.push_back({std::to_string(k + 1), fmt_double(s.step_ms)});
    }
    write_csv(join_path(cfg.out_dir, "estimates.csv"), header, rows);
    write_csv(join_path(cfg.out_dir, "timing.csv"), {"step", "step_ms"}, timing_rows);

    if (!out.truth.empty()) {
        for (int d = 0; d < model.n; ++d) {
            std::vector<double> errs;
            for (std::size_t k = 0; k < out.result.steps.size(); ++k) {
                errs.push_back(out.result.steps[k].estimate(d) - out.truth[k + 1](d));
            }
            out.rmse.push_back(rmse_of(errs));
        }
    }

    double mean_pre = 0.0, mean_post = 0.0;
    for (const StepRecord& s : out.result.steps) {
        mean_pre += s.card_pre;
        mean_post += s.card_post;
    }
    if (!out.result.steps.empty()) {
        mean_pre /= static_cast<double>(out.result.steps.size());
        mean_post /= static_cast<double>(out.result.steps.size());
    }

    log << "steps=" << out.result.steps.size();
    for (std::size_t d = 0; d < out.rmse.size(); ++d) {
        log << " rmse_x" << (d + 1) << "=" << fmt_double(out.rmse[d]);
    }
    log << " mean_card_pre=" << mean_pre << " mean_card_post=" << mean_post
        << " total_ms=" << out.total_ms << "\n";

    if (oracle == OracleMode::Grid) {
        if (model.n > 2 || model.m != 1) {
            throw ConfigError("grid oracle covers n <= 2, m = 1 models");
        }
        GridSpec g;
        g.lo = Vec(model.n);
        g.hi = Vec(model.n);
        for (int d = 0; d < model.n; ++d) {
            double lo = model.xbar0(d), hi = model.xbar0(d);
            for (const StepRecord& s : out.result.steps) {
                lo = std::min(lo, s.estimate(d));
                hi = std::max(hi, s.estimate(d));
            }
            for (const Vec& t : out.truth) {
                lo = std::min(lo, t(d));
                hi = std::max(hi, t(d));
            }
            g.lo(d) = lo - 3.0 * fc.window_half_width(d);
            g.hi(d) = hi + 3.0 * fc.window_half_width(d);
        }
        g.points.assign(model.n, model.n == 1 ? 641 : 161);
        const double sigma = 1.0 / std::sqrt(model.Q_eta(0, 0));
        g.w_lo = -8.0 * sigma;
        g.w_hi = 8.0 * sigma;
        g.w_points = 241;

        const DpFilterResult dp = dp_filter(model, g, out.ys);
        std::vector<std::string> dp_header{"step"};
        for (int d = 0; d < model.n; ++d) dp_header.push_back("x" + std::to_string(d + 1) + "_dp");
        dp_header.push_back("argmin_gap");
        std::vector<std::vector<std::string>> dp_rows;
        double max_gap = 0.0;
        for (std::size_t k = 0; k < out.result.steps.size(); ++k) {
            const Vec& dpe = dp.estimates[k + 1];
            const double gap = (out.result.steps[k].estimate - dpe).cwiseAbs().maxCoeff();
            max_gap = std::max(max_gap, gap);
            std::vector<std::string> row{std::to_string(k + 1)};
            for (int d = 0; d < model.n; ++d) row.push_back(fmt_double(dpe(d)));
            row.push_back(fmt_double(gap));
            dp_rows.push_back(std::move(row));
        }
        write_csv(join_path(cfg.out_dir, "dp_compare.csv"), dp_header, dp_rows);
        out.dp_estimates = dp.estimates;
        log << "grid_oracle max_argmin_gap=" << fmt_double(max_gap)
            << " resolution_bound=" << fmt_double(dp.max_resolution_bound)
            << " clamped_reads=" << dp.clamp_total << "\n";
    } else if (oracle == OracleMode::Riccati) {
        if (!model.affine() || !model.linear_output()) {
            throw ConfigError("the riccati oracle requires affine dynamics and a linear output");
        }
        const auto ref = riccati_filter(model, out.ys);
        double max_dev = 0.0;
        for (std::size_t k = 0; k < out.result.steps.size(); ++k) {
            max_dev = std::max(max_dev,
                               (out.result.steps[k].estimate - ref[k + 1]).cwiseAbs().maxCoeff());
        }
        log << "riccati_oracle max_estimate_deviation=" << fmt_double(max_dev) << "\n";
    }
    return out;
}

PruneCompareReport compare_pruning(const RunConfig& cfg, std::ostream& log,
                                   const std::string& report_path) {
    const ModelSpec model = filter_model(cfg);
    const SimOutput sim = simulate(cfg);
    const int jd = cfg.jump_dim - 1;

    PruneCompareReport report;
    report.threshold = cfg.recovery_threshold > 0.0 ? cfg.recovery_threshold
                                                    : cfg.half_width_for(model.n)(jd);

    auto run_strategy = [&](PruneStrategy strategy, StrategyTrace& trace) {
        FilterConfig fc = filter_config(cfg, model.n);
        fc.prune.strategy = strategy;
        const RunResult res = run(model, fc, sim.ys);
        for (std::size_t k = 0; k < res.steps.size(); ++k) {
            const double err = std::abs(res.steps[k].estimate(jd) - sim.truth[k + 1](jd));
            trace.jump_dim_error.push_back(err);
            if (cfg.jump_step > 0 && trace.recovery_step < 0 &&
                static_cast<int>(k + 1) >= cfg.jump_step && err < report.threshold) {
                trace.recovery_step = static_cast<int>(k + 1);
            }
        }
        return res;
    };

    const RunResult res_cluster = run_strategy(PruneStrategy::ClusterPrune, report.cluster);
    const RunResult res_value = run_strategy(PruneStrategy::ValuePrune, report.value);
    report.rmse_cluster = rmse_of(report.cluster.jump_dim_error);
    report.rmse_value = rmse_of(report.value.jump_dim_error);

    if (!report_path.empty()) {
        const std::string dim = std::to_string(cfg.jump_dim);
        const std::vector<std::string> header{"step",
                                              "x" + dim + "_true",
                                              "x" + dim + "_cluster",
                                              "x" + dim + "_value",
                                              "err_cluster",
                                              "err_value"};
        std::vector<std::vector<std::string>> rows;
        for (std::size_t k = 0; k < res_cluster.steps.size(); ++k) {
            rows.push_back({std::to_string(k + 1), fmt_double(sim.truth[k + 1](jd)),
                            fmt_double(res_cluster.steps[k].estimate(jd)),
                            fmt_double(res_value.steps[k].estimate(jd)),
                            fmt_double(report.cluster.jump_dim_error[k]),
                            fmt_double(report.value.jump_dim_error[k])});
        }
        write_csv(report_path, header, rows);
    }

    log << "compare_pruning jump_step=" << cfg.jump_step << " threshold=" << report.threshold
        << " rmse_cluster=" << fmt_double(report.rmse_cluster)
        << " rmse_value=" << fmt_double(report.rmse_value)
        << " recovery_cluster=" << report.cluster.recovery_step
        << " recovery_value=" << report.value.recovery_step << "\n";
    return report;
}

int oracle_check(const RunConfig& cfg, std::ostream& log) {
    const ModelSpec model = filter_model(cfg);
    RunOutput out = run_filter(cfg, OracleMode::Grid, log);

    if (!out.truth.empty() && cfg.model == "cubic_demo") {
        // Naive baseline inverts the cubic output pointwise.
        std::vector<double> base_err, filt_err, dp_err;
        const std::size_t first = out.result.steps.size() >= 20 ? 19 : 0;
        for (std::size_t k = first; k < out.result.steps.size(); ++k) {
            const double truth2 = out.truth[k + 1](1);
            base_err.push_back(std::cbrt(40.0 * out.ys[k](0)) - truth2);
            filt_err.push_back(out.result.steps[k].estimate(1) - truth2);
            dp_err.push_back(out.dp_estimates[k + 1](1) - truth2);
        }
        const double base = rmse_of(base_err);
        const double filt = rmse_of(filt_err);
        const double dpe = rmse_of(dp_err);
        log << "x2 rmse from step " << (first + 1) << ": baseline=" << fmt_double(base)
            << " minplus=" << fmt_double(filt) << " grid_dp=" << fmt_double(dpe) << "\n";
        if (base > 0.0) {
            log << "rmse ratios vs baseline: minplus=" << fmt_double(filt / base)
                << " grid_dp=" << fmt_double(dpe / base) << "\n";
        }
    }

    if (model.affine() && model.linear_output()) {
        const auto ref = riccati_filter(model, out.ys);
        double max_dev = 0.0;
        for (std::size_t k = 0; k < out.result.steps.size(); ++k) {
            max_dev = std::max(max_dev,
                               (out.result.steps[k].estimate - ref[k + 1]).cwiseAbs().maxCoeff());
        }
        log << "riccati max_estimate_deviation=" << fmt_double(max_dev) << "\n";
    }
    return 0;
}

}  // namespace minplus
