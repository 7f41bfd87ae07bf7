// Command-line front end: single solves, named benchmark suites, and scaling
// sweeps for the adaptive fractional-diffusion solver.
//
// Exit codes: 0 success, 1 usage error, 2 controller failure, 3 acceptance
// check failure.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "fracdiff/fracdiff.hpp"

namespace fs = std::filesystem;
using namespace fracdiff;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitControllerFailure = 2;
constexpr int kExitAcceptanceFailure = 3;

struct RunSpec {
    std::string benchmark = "testbed";
    double gamma = 0.25;
    double diffusivity = 1.0;
    int dx_divisions = 40;
    double t_end = 10.0;
    std::string controller = "te";
    double tol = 1e-4;
    double theta = 1.5;
    double omega = 1.0;
    double dt0 = 0.01;
    double fixed_dt = 0.0;
    int max_trials = 64;  // generous CLI default: the t = 0 start-up transient
                          // can need ~30+ halvings under trial-and-error
    std::string commit = "full";
    // steep-source / reservoir parameters
    double a = 20.0, p = 20.0, L = 4.0, u0 = 1.0;
    // custom problem (overrides benchmark when set)
    bool custom = false;
    double x_lo = 0.0, x_hi = 1.0;
    double left_bc = 0.0, right_bc = 0.0;
    std::string initial = "zero";  // zero | const:<v> | sin
    // outputs
    std::string out_dir;
    std::string steps_csv, profile_csv, summary_json;
    std::vector<double> snapshot_times;
};

ControllerKind parse_controller(const std::string& name) {
    if (name == "fixed") return ControllerKind::fixed;
    if (name == "te" || name == "trial_and_error") return ControllerKind::trial_and_error;
    if (name == "predictive") return ControllerKind::predictive;
    throw CLI::ValidationError("--controller", "unknown controller '" + name + "'");
}

ControllerConfig make_controller_config(const RunSpec& spec) {
    ControllerConfig cfg;
    cfg.kind = parse_controller(spec.controller);
    cfg.tolerance = spec.tol;
    cfg.theta = spec.theta;
    cfg.omega = spec.omega;
    cfg.dt0 = spec.dt0;
    cfg.fixed_dt = spec.fixed_dt;
    cfg.max_trials = spec.max_trials;
    cfg.commit = spec.commit == "half" ? CommitPolicy::half_step : CommitPolicy::full_step;
    if (cfg.kind == ControllerKind::fixed && !(cfg.fixed_dt > 0.0))
        throw CLI::ValidationError("--dt", "fixed controller requires --dt > 0");
    if (cfg.kind != ControllerKind::fixed && !(cfg.tolerance > 0.0))
        throw CLI::ValidationError("--tol", "adaptive controllers require --tol > 0");
    return cfg;
}

NamedBenchmark make_spec_problem(const RunSpec& spec) {
    if (spec.custom) {
        NamedBenchmark b;
        b.tag = BenchmarkTag::testbed;  // unused for custom problems
        b.problem.gamma = spec.gamma;
        b.problem.diffusivity = spec.diffusivity;
        b.problem.x_lo = spec.x_lo;
        b.problem.x_hi = spec.x_hi;
        const double lv = spec.left_bc, rv = spec.right_bc;
        b.problem.left_bc = [lv](double) { return lv; };
        b.problem.right_bc = [rv](double) { return rv; };
        if (spec.initial == "zero") {
            b.problem.initial = [](double) { return 0.0; };
        } else if (spec.initial == "sin") {
            b.problem.initial = [](double x) { return std::sin(x); };
        } else if (spec.initial.rfind("const:", 0) == 0) {
            const double v = std::stod(spec.initial.substr(6));
            b.problem.initial = [v](double) { return v; };
        } else {
            throw CLI::ValidationError("--initial", "expected zero, sin, or const:<v>");
        }
        b.problem.validate();
        return b;
    }
    if (spec.benchmark == "testbed") return make_testbed(spec.gamma);
    if (spec.benchmark == "steep_source")
        return make_steep_source(spec.gamma, spec.a, spec.p);
    if (spec.benchmark == "reservoir")
        return make_reservoir(spec.gamma, spec.diffusivity, spec.L, spec.u0);
    throw CLI::ValidationError("--benchmark",
                               "expected testbed, steep_source, or reservoir");
}

std::string out_path(const RunSpec& spec, const std::string& name) {
    if (name.empty()) return name;
    if (spec.out_dir.empty() || fs::path(name).is_absolute()) return name;
    fs::create_directories(spec.out_dir);
    return (fs::path(spec.out_dir) / name).string();
}

void add_run_options(CLI::App* cmd, RunSpec& spec) {
    cmd->add_option("--benchmark", spec.benchmark,
                    "named benchmark: testbed, steep_source, reservoir");
    cmd->add_option("--gamma", spec.gamma, "fractional order in (0, 1]");
    cmd->add_option("--K", spec.diffusivity, "diffusivity");
    cmd->add_option("--dx-divisions", spec.dx_divisions,
                    "spatial intervals J (dx = domain length / J)");
    cmd->add_option("--t-end", spec.t_end, "final time");
    cmd->add_option("--controller", spec.controller, "fixed, te, or predictive");
    cmd->add_option("--tol", spec.tol, "step-doubling tolerance");
    cmd->add_option("--theta", spec.theta, "assumed error-scaling exponent");
    cmd->add_option("--omega", spec.omega, "predictive under-relaxation in (0, 1]");
    cmd->add_option("--dt0", spec.dt0, "seed step for adaptive controllers");
    cmd->add_option("--dt", spec.fixed_dt, "step size for the fixed controller");
    cmd->add_option("--max-trials", spec.max_trials,
                    "candidate evaluations allowed per step");
    cmd->add_option("--commit", spec.commit, "committed estimate: full or half");
    cmd->add_option("--a", spec.a, "steep-source amplitude");
    cmd->add_option("--p", spec.p, "steep-source power");
    cmd->add_option("--L", spec.L, "reservoir domain length");
    cmd->add_option("--u0", spec.u0, "reservoir concentration");
    cmd->add_flag("--custom", spec.custom, "use the custom problem options");
    cmd->add_option("--x-lo", spec.x_lo, "custom domain left end");
    cmd->add_option("--x-hi", spec.x_hi, "custom domain right end");
    cmd->add_option("--left-bc", spec.left_bc, "custom constant left boundary value");
    cmd->add_option("--right-bc", spec.right_bc, "custom constant right boundary value");
    cmd->add_option("--initial", spec.initial, "custom initial: zero, sin, const:<v>");
    cmd->add_option("--out-dir", spec.out_dir,
                    "output directory (default from FRACDIFF_OUT_DIR)")
        ->envname("FRACDIFF_OUT_DIR");
    cmd->add_option("--steps-csv", spec.steps_csv, "per-step CSV output path");
    cmd->add_option("--profile-csv", spec.profile_csv, "solution profile CSV path");
    cmd->add_option("--summary-json", spec.summary_json, "JSON summary path");
    cmd->add_option("--snapshot-times", spec.snapshot_times,
                    "profile snapshot times (linear interpolation in t)");
}

int cmd_solve(const RunSpec& spec) {
    auto bench = make_spec_problem(spec);
    const auto cfg = make_controller_config(spec);
    SpatialGrid grid(bench.problem.x_lo, bench.problem.x_hi, spec.dx_divisions);

    const double gap = bench.problem.boundary_consistency_gap();
    if (gap > 1e-10) {
        std::cerr << "note: initial/boundary mismatch of " << gap
                  << " at t = 0 (solver uses the initial values at t0)\n";
    }

    auto res = run(bench.problem, grid, cfg,
                   spec.t_end, spec.custom ? "custom" : spec.benchmark);

    if (!spec.steps_csv.empty()) write_record_csv(res.record, out_path(spec, spec.steps_csv));
    if (!spec.profile_csv.empty()) {
        auto times = spec.snapshot_times;
        if (times.empty()) times = {spec.t_end};
        write_profile_csv(res.history, grid, times, out_path(spec, spec.profile_csv));
    }
    nlohmann::json summary = record_summary_json(res.record);
    if (bench.exact) {
        auto curve = error_curve(res.history, grid, bench.exact);
        double worst = 0.0;
        for (const auto& [t, e] : curve) worst = std::max(worst, e);
        summary["max_error_vs_exact"] = worst;
    }
    if (!spec.summary_json.empty()) write_json(summary, out_path(spec, spec.summary_json));

    std::cout << "steps=" << res.record.rows.size()
              << " t_final=" << (res.record.rows.empty() ? 0.0 : res.record.rows.back().t)
              << " work=" << (res.record.rows.empty() ? 0 : res.record.rows.back().work)
              << (res.record.completed ? "" : "  [controller failure]") << "\n";
    return res.record.completed ? 0 : kExitControllerFailure;
}

RunSpec with_controller(RunSpec spec, const std::string& controller, double tol) {
    spec.controller = controller;
    spec.tol = tol;
    return spec;
}

RunResult run_spec(const RunSpec& spec) {
    auto bench = make_spec_problem(spec);
    SpatialGrid grid(bench.problem.x_lo, bench.problem.x_hi, spec.dx_divisions);
    return run(bench.problem, grid, make_controller_config(spec), spec.t_end,
               spec.benchmark);
}

// Benchmark suites mirroring the figure-producing experiments.
int cmd_bench(const std::string& suite, RunSpec spec) {
    nlohmann::json verdicts;
    bool ok = true;

    if (suite == "errors") {
        auto bench = make_spec_problem(spec);
        SpatialGrid grid(bench.problem.x_lo, bench.problem.x_hi, spec.dx_divisions);
        for (const std::string ctrl : {"fixed", "te", "predictive"}) {
            RunSpec s = spec;
            s.controller = ctrl;
            if (ctrl == "fixed" && !(s.fixed_dt > 0.0)) s.fixed_dt = 0.01;
            auto res = run_spec(s);
            auto curve = error_curve(res.history, grid, bench.exact);
            write_record_csv(res.record, out_path(spec, "errors_" + ctrl + ".csv"));
            double worst = 0.0;
            for (const auto& [t, e] : curve)
                if (t >= 0.1) worst = std::max(worst, e);
            verdicts[ctrl]["max_error"] = worst;
            if (ctrl != "fixed") {
                const bool pass = worst <= 10.0 * s.tol;
                verdicts[ctrl]["within_10x_tol"] = pass;
                ok = ok && pass && res.record.completed;
            }
        }
    } else if (suite == "beta") {
        auto res = run_spec(spec);
        const double hi = spec.t_end, lo = std::min(1.0, hi / 100.0);
        auto fit = fit_beta(res.record, lo, hi);
        write_record_csv(res.record, out_path(spec, "beta_record.csv"));
        verdicts["beta_work"] = fit_json(fit);
        verdicts["beta_wall"] = fit_json(fit_beta(res.record, lo, hi, true));
        // piecewise halves, reported alongside (the paper sees a late-time break)
        const double mid = std::sqrt(lo * hi);
        verdicts["beta_work_early"] = fit_json(fit_beta(res.record, lo, mid));
        verdicts["beta_work_late"] = fit_json(fit_beta(res.record, mid, hi));
        const bool pass = spec.controller == "fixed"
                              ? fit.exponent >= 1.9 && fit.exponent <= 2.1
                              : fit.exponent < 0.6;
        verdicts["pass"] = pass;
        ok = pass;
    } else if (suite == "eta") {
        std::vector<RunRecord> records;
        // predictive only: trial-and-error cannot resolve the t = 0 start-up
        // transient at the tightest tolerance without degenerate steps
        for (double tol : {1e-3, 5e-4, 2e-4, 1e-4, 1e-5}) {
            auto res = run_spec(with_controller(spec, "predictive", tol));
            records.push_back(std::move(res.record));
        }
        const double probe = spec.t_end * 0.9;
        auto fit = fit_eta(records, probe);
        verdicts["eta"] = fit_json(fit);
        verdicts["t_probe"] = probe;
        const bool pass = fit.exponent >= 0.7 && fit.exponent <= 1.5;
        verdicts["pass"] = pass;
        ok = pass;
    } else if (suite == "theta") {
        spec.dx_divisions = 80;
        for (double gamma : {0.3, 0.5, 0.7, 0.9}) {
            RunSpec s = spec;
            s.gamma = gamma;
            s.controller = "predictive";
            auto bench = make_spec_problem(s);
            SpatialGrid grid(bench.problem.x_lo, bench.problem.x_hi, s.dx_divisions);
            ControllerConfig cfg = make_controller_config(s);
            SolutionHistory h;
            h.push(0.0, initial_state(bench.problem, grid));
            StepWork work;
            double dt_prev = cfg.dt0;
            const std::string key = "gamma_" + std::to_string(gamma);
            for (int n = 1; n <= 30; ++n) {
                auto out = select_predictive(
                    [&](double dt) {
                        return evaluate_candidate(bench.problem, grid, h, dt, &work);
                    },
                    dt_prev, cfg);
                if ((n % 10) == 0) {
                    std::vector<double> dts, dts3;
                    for (int m = 1; m <= 10; ++m) {
                        dts.push_back(m * out.dt);
                        dts3.push_back(m * out.dt / 3.0);
                    }
                    auto f1 = fit_theta(bench.problem, grid, h, dts);
                    auto f3 = fit_theta(bench.problem, grid, h, dts3);
                    verdicts[key]["n" + std::to_string(n)] = {
                        {"theta", f1.exponent}, {"theta_third", f3.exponent}};
                    const bool pass = f1.exponent >= 1.0 && f1.exponent <= 2.0 &&
                                      f3.exponent >= 1.0 && f3.exponent <= 2.0;
                    ok = ok && pass;
                }
                h.push(h.last_time() + out.dt, std::move(out.full_step));
                dt_prev = out.dt;
            }
        }
        verdicts["pass"] = ok;
    } else if (suite == "steep") {
        spec.benchmark = "steep_source";
        if (spec.t_end > 1.5) spec.t_end = 1.5;
        auto bench = make_spec_problem(spec);
        SpatialGrid grid(bench.problem.x_lo, bench.problem.x_hi, spec.dx_divisions);
        auto res = run_spec(spec);
        write_record_csv(res.record, out_path(spec, "steep_record.csv"));
        auto bands = mesh_density_report(res.record,
                                         {{0.0, 0.05}, {0.05, 0.5}, {0.8, 1.5}});
        verdicts["median_dt_fast_early"] = bands[0].dt_median;
        verdicts["median_dt_slow_mid"] = bands[1].dt_median;
        verdicts["median_dt_fast_late"] = bands[2].dt_median;
        // error normalized by the instantaneous solution amplitude (floored at
        // 1): the forced solution grows to ~a*t_end^p, far beyond any absolute
        // tolerance the spatial grid could support
        double worst = 0.0;
        for (std::size_t m = 1; m < res.history.size(); ++m) {
            const double t = res.history.times[m];
            double diff = 0.0, amp = 1.0;
            for (int j = 0; j < grid.node_count(); ++j) {
                const double ex = bench.exact(grid.node(j), t);
                diff = std::max(diff, std::abs(res.history.values[m][j] - ex));
                amp = std::max(amp, std::abs(ex));
            }
            worst = std::max(worst, diff / amp);
        }
        verdicts["max_error_normalized"] = worst;
        const bool strides = bands[1].dt_median >= 5.0 * bands[0].dt_median &&
                             bands[1].dt_median >= 5.0 * bands[2].dt_median;
        const bool accurate = worst <= 10.0 * spec.tol;
        verdicts["pass"] = strides && accurate && res.record.completed;
        ok = strides && accurate && res.record.completed;
    } else if (suite == "reservoir") {
        spec.benchmark = "reservoir";
        auto bench = make_spec_problem(spec);
        SpatialGrid grid(bench.problem.x_lo, bench.problem.x_hi, spec.dx_divisions);
        auto res = run_spec(spec);
        std::vector<double> snapshots;
        for (double t = spec.t_end; t > 1e-4 && snapshots.size() < 7; t /= 10.0)
            snapshots.push_back(t);
        std::sort(snapshots.begin(), snapshots.end());
        write_profile_csv(res.history, grid, snapshots,
                          out_path(spec, "reservoir_profiles.csv"));
        write_record_csv(res.record, out_path(spec, "reservoir_record.csv"));
        if (spec.gamma == 1.0) {
            double worst = 0.0;
            for (double t : snapshots) {
                auto p = profile_at(res.history, t);
                for (int j = 0; j < grid.node_count(); ++j)
                    worst = std::max(
                        worst, std::abs(p[j] - reservoir_reference_gamma1(
                                                   grid.node(j), t, spec.diffusivity,
                                                   spec.L, spec.u0)));
            }
            verdicts["max_error_vs_images"] = worst;
            const bool pass = worst <= 1e-3 * std::abs(spec.u0);
            verdicts["pass"] = pass;
            ok = pass && res.record.completed;
        } else {
            verdicts["pass"] = res.record.completed;
            ok = res.record.completed;
        }
    } else {
        std::cerr << "unknown bench suite '" << suite << "'\n";
        return kExitUsage;
    }

    verdicts["suite"] = suite;
    verdicts["t50_seconds"] = calibrate_t50(spec.gamma).seconds;
    write_json(verdicts, out_path(spec, "bench_" + suite + ".json"));
    std::cout << verdicts.dump(2) << "\n";
    return ok ? 0 : kExitAcceptanceFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive L1 finite-difference solver for 1-D time-fractional "
                 "diffusion equations"};
    app.require_subcommand(1);
    // INI-style config; solve options live under a [solve] section
    app.set_config("--config", "", "read options from an INI file");

    RunSpec solve_spec;
    auto* solve_cmd = app.add_subcommand("solve", "run a single solve");
    add_run_options(solve_cmd, solve_spec);
    solve_cmd->fallthrough();

    RunSpec bench_spec;
    std::string suite;
    auto* bench_cmd = app.add_subcommand(
        "bench", "run a benchmark suite: errors, beta, eta, theta, steep, reservoir");
    bench_cmd->add_option("suite", suite, "suite name")->required();
    add_run_options(bench_cmd, bench_spec);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (solve_cmd->parsed()) return cmd_solve(solve_spec);
        if (bench_cmd->parsed()) return cmd_bench(suite, bench_spec);
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitControllerFailure;
    }
    return kExitUsage;
}
