#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fracdiff/l1_scheme.hpp"
#include "fracdiff/problem.hpp"
#include "fracdiff/specfun.hpp"
#include "fracdiff/stepdoubling.hpp"

namespace fracdiff {

/// Result of a least-squares power-law fit y ~ c * x^exponent.
struct ScalingFit {
    double exponent = 0.0;
    double intercept = 0.0;   // log c
    double residual = 0.0;    // rms residual in log space
    std::size_t n_points = 0;
    double range_lo = 0.0;
    double range_hi = 0.0;
};

/// Log-log least squares; inputs are the linear-scale samples.
inline ScalingFit fit_power_law(const std::vector<double>& xs,
                                const std::vector<double>& ys,
                                std::size_t min_points = 5) {
    if (xs.size() != ys.size() || xs.size() < min_points)
        throw std::invalid_argument("fit_power_law: too few points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw std::invalid_argument("fit_power_law: samples must be positive");
        const double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    ScalingFit fit;
    fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.exponent * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = std::log(ys[i]) - (fit.intercept + fit.exponent * std::log(xs[i]));
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    fit.n_points = xs.size();
    fit.range_lo = *std::min_element(xs.begin(), xs.end());
    fit.range_hi = *std::max_element(xs.begin(), xs.end());
    return fit;
}

/// Max-norm error against an exact solution at every committed time.
inline std::vector<std::pair<double, double>> error_curve(const SolutionHistory& history,
                                                          const SpatialGrid& grid,
                                                          const SpaceTimeFn& exact) {
    if (!exact) throw std::invalid_argument("error_curve: no exact solution");
    std::vector<std::pair<double, double>> curve;
    curve.reserve(history.size());
    for (std::size_t m = 0; m < history.size(); ++m) {
        double e = 0.0;
        for (int j = 0; j < grid.node_count(); ++j)
            e = std::max(e, std::abs(history.values[m][j] - exact(grid.node(j),
                                                                  history.times[m])));
        curve.emplace_back(history.times[m], e);
    }
    return curve;
}

/// Slope of log cumulative work vs log t over rows with t in [t_lo, t_hi].
inline ScalingFit fit_beta(const RunRecord& record, double t_lo, double t_hi,
                           bool use_wall = false) {
    std::vector<double> ts, ws;
    for (const auto& row : record.rows) {
        if (row.t < t_lo || row.t > t_hi) continue;
        const double w = use_wall ? row.wall : static_cast<double>(row.work);
        if (!(w > 0.0)) continue;
        ts.push_back(row.t);
        ws.push_back(w);
    }
    return fit_power_law(ts, ws);
}

inline double work_at(const RunRecord& record, double t_probe) {
    for (const auto& row : record.rows) {
        if (row.t >= t_probe) return static_cast<double>(row.work);
    }
    throw std::invalid_argument("work_at: record does not reach the probe time");
}

/// Slope of log work(t_probe) vs log(1/tolerance) over a tolerance sweep.
inline ScalingFit fit_eta(const std::vector<RunRecord>& records, double t_probe) {
    if (records.size() < 4)
        throw std::invalid_argument("fit_eta: need at least 4 tolerance values");
    std::vector<double> inv_tols, works;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& r : records) {
        if (!(r.tolerance > 0.0))
            throw std::invalid_argument("fit_eta: records must carry tolerances");
        inv_tols.push_back(1.0 / r.tolerance);
        works.push_back(work_at(r, t_probe));
        lo = std::min(lo, r.tolerance);
        hi = std::max(hi, r.tolerance);
    }
    if (std::log10(hi / lo) < 1.5)
        throw std::invalid_argument("fit_eta: tolerances must span >= 1.5 decades");
    return fit_power_law(inv_tols, works, 4);
}

/// Slope of log E vs log dt at the current history state: the step-doubling
/// difference is evaluated for each candidate step without committing any.
inline ScalingFit fit_theta(const CandidateEvaluator& evaluate,
                            const std::vector<double>& dt_list) {
    if (dt_list.size() < 5) throw std::invalid_argument("fit_theta: need >= 5 steps");
    std::vector<double> dts, errs;
    for (double dt : dt_list) {
        auto out = evaluate(dt);
        if (out.err == 0.0)
            throw std::invalid_argument("fit_theta: degenerate zero difference");
        dts.push_back(dt);
        errs.push_back(out.err);
    }
    return fit_power_law(dts, errs);
}

inline ScalingFit fit_theta(const Problem& problem, const SpatialGrid& grid,
                            const SolutionHistory& history,
                            const std::vector<double>& dt_list) {
    if (history.empty())
        throw std::invalid_argument("fit_theta: history must hold at least the initial state");
    return fit_theta(
        [&](double dt) { return evaluate_candidate(problem, grid, history, dt); },
        dt_list);
}

/// Classical reservoir solution for gamma = 1 by the method of images,
/// truncated at M reflection pairs:
///   u0 [ sum_{m=0..M} erfc((2mL + x)/(2 sqrt(K t)))
///      - sum_{m=1..M} erfc((2mL - x)/(2 sqrt(K t))) ]
inline double reservoir_reference_gamma1(double x, double t, double K, double L,
                                         double u0, int images = 8) {
    if (!(t > 0.0)) throw std::domain_error("reservoir_reference_gamma1: t must be positive");
    if (images < 1) throw std::domain_error("reservoir_reference_gamma1: images >= 1");
    const double denom = 2.0 * std::sqrt(K * t);
    double sum = erfc_fn(x / denom);
    for (int m = 1; m <= images; ++m) {
        sum += erfc_fn((2.0 * m * L + x) / denom);
        sum -= erfc_fn((2.0 * m * L - x) / denom);
    }
    return u0 * sum;
}

/// Fixed-step reference solve; with a refined step it serves as the
/// self-convergence oracle for problems without a closed form.
inline SolutionHistory fine_grid_oracle(const Problem& problem, const SpatialGrid& grid,
                                        double dt, double t_end,
                                        StepWork* work = nullptr) {
    if (!(dt > 0.0) || !(t_end > 0.0))
        throw std::domain_error("fine_grid_oracle: dt and t_end must be positive");
    SolutionHistory h;
    h.push(0.0, initial_state(problem, grid));
    const double t_eps = 1e-12 * std::max(1.0, t_end);
    while (h.last_time() < t_end - t_eps) {
        const double step = std::min(dt, t_end - h.last_time());
        auto u = advance(problem, grid, h, step, work);
        double t_new = h.last_time() + step;
        if (std::abs(t_new - t_end) < t_eps) t_new = t_end;
        h.push(t_new, std::move(u));
    }
    return h;
}

/// Solution profile at an arbitrary time, linear interpolation in t between
/// committed mesh points.
inline std::vector<double> profile_at(const SolutionHistory& history, double t) {
    if (history.empty()) throw std::invalid_argument("profile_at: empty history");
    if (t <= history.times.front()) return history.values.front();
    if (t >= history.times.back()) return history.values.back();
    const auto it = std::lower_bound(history.times.begin(), history.times.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - history.times.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - history.times[lo]) / (history.times[hi] - history.times[lo]);
    std::vector<double> u(history.values[lo].size());
    for (std::size_t j = 0; j < u.size(); ++j)
        u[j] = (1.0 - w) * history.values[lo][j] + w * history.values[hi][j];
    return u;
}

struct BandStats {
    double t_lo = 0.0, t_hi = 0.0;
    double dt_min = 0.0, dt_median = 0.0, dt_max = 0.0;
    int count = 0;
};

/// Per-band step-size statistics: how the controller tiptoes through fast
/// regimes and strides through slow ones.
inline std::vector<BandStats> mesh_density_report(
    const RunRecord& record, const std::vector<std::pair<double, double>>& bands) {
    std::vector<BandStats> out;
    for (const auto& [lo, hi] : bands) {
        std::vector<double> dts;
        for (const auto& row : record.rows)
            if (row.t >= lo && row.t <= hi) dts.push_back(row.dt);
        BandStats s;
        s.t_lo = lo;
        s.t_hi = hi;
        s.count = static_cast<int>(dts.size());
        if (!dts.empty()) {
            std::sort(dts.begin(), dts.end());
            s.dt_min = dts.front();
            s.dt_max = dts.back();
            s.dt_median = dts[dts.size() / 2];
        }
        out.push_back(s);
    }
    return out;
}

/// Wall-time cost of a 50-step fixed-step testbed solve; the unit every
/// reported time is normalized by.
struct CalibrationT50 {
    double seconds = 0.0;
};

inline CalibrationT50 calibrate_t50(double gamma, int dx_divisions = 40) {
    auto b = make_testbed(gamma);
    SpatialGrid grid(b.problem.x_lo, b.problem.x_hi, dx_divisions);
    const auto start = std::chrono::steady_clock::now();
    fine_grid_oracle(b.problem, grid, 0.01, 0.5);  // 50 steps of 0.01
    CalibrationT50 c;
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                    .count();
    if (c.seconds <= 0.0) c.seconds = 1e-9;
    return c;
}

}  // namespace fracdiff
