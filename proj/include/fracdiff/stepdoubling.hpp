#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fracdiff/l1_scheme.hpp"
#include "fracdiff/problem.hpp"

namespace fracdiff {

/// One candidate step evaluated by step doubling: a full step of size dt and
/// two independent half steps, with their max-norm difference.
struct StepOutcome {
    double dt = 0.0;
    std::vector<double> full_step;
    std::vector<double> half_step;
    double err = 0.0;    // max over all nodes |half - full|
    int trials = 1;      // candidates evaluated before this one was accepted
};

enum class ControllerKind { fixed, trial_and_error, predictive };
enum class CommitPolicy { full_step, half_step };

inline std::string to_string(ControllerKind k) {
    switch (k) {
        case ControllerKind::fixed: return "fixed";
        case ControllerKind::trial_and_error: return "trial_and_error";
        case ControllerKind::predictive: return "predictive";
    }
    return "?";
}

struct ControllerConfig {
    ControllerKind kind = ControllerKind::trial_and_error;
    double tolerance = 1e-4;
    double dt0 = 0.01;
    double theta = 1.5;
    double omega = 1.0;
    int max_trials = 25;
    double fixed_dt = 0.0;  // fixed kind only
    double dt_max = std::numeric_limits<double>::infinity();
    double dt_min = 0.0;    // 0: derive the degeneracy floor from t = 0
    CommitPolicy commit = CommitPolicy::full_step;

    void validate() const {
        if (kind == ControllerKind::fixed) {
            if (!(fixed_dt > 0.0))
                throw std::domain_error("ControllerConfig: fixed controller needs fixed_dt > 0");
            return;
        }
        if (!(tolerance > 0.0))
            throw std::domain_error("ControllerConfig: tolerance must be positive");
        if (!(omega > 0.0) || omega > 1.0)
            throw std::domain_error("ControllerConfig: omega must lie in (0, 1]");
        if (!(theta > 0.0))
            throw std::domain_error("ControllerConfig: theta must be positive");
        if (!(dt0 > 0.0))
            throw std::domain_error("ControllerConfig: dt0 must be positive");
    }
};

/// Thrown when a controller exhausts max_trials or degenerates; carries the
/// best candidate seen so far.
struct ControllerFailure : std::runtime_error {
    ControllerFailure(std::string what, StepOutcome best_seen)
        : std::runtime_error(std::move(what)), best(std::move(best_seen)) {}
    StepOutcome best;
};

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Full step vs two half steps from the current history end; the history is
/// only read. The half-step midpoint lives on a temporary extension.
inline StepOutcome evaluate_candidate(const Problem& problem, const SpatialGrid& grid,
                                      HistoryView history, double dt,
                                      StepWork* work = nullptr) {
    StepOutcome out;
    out.dt = dt;
    out.full_step = advance(problem, grid, history, dt, work);
    const double t_mid = history.last_time() + 0.5 * dt;
    const std::vector<double> u_mid = advance(problem, grid, history, 0.5 * dt, work);
    out.half_step = advance(problem, grid, history.extended(t_mid, u_mid), 0.5 * dt, work);
    out.err = max_abs_diff(out.half_step, out.full_step);
    return out;
}

using CandidateEvaluator = std::function<StepOutcome(double dt)>;

inline double min_step_floor(double t) { return 1e-14 * std::max(1.0, t); }

/// Trial-and-error policy: halve while the difference exceeds the tolerance,
/// otherwise double until it does and keep the predecessor (whose outcome is
/// reused, never recomputed). E = tolerance counts as acceptable.
inline StepOutcome select_trial_and_error(const CandidateEvaluator& evaluate,
                                          double dt_init, const ControllerConfig& cfg) {
    if (!(dt_init > 0.0))
        throw std::domain_error("select_trial_and_error: dt_init must be positive");
    const double tol = cfg.tolerance;
    const double floor_dt = cfg.dt_min > 0.0 ? cfg.dt_min : min_step_floor(0.0);
    double dt = std::min(dt_init, cfg.dt_max);
    StepOutcome out = evaluate(dt);
    int trials = 1;
    if (out.err > tol) {
        while (out.err > tol) {
            dt *= 0.5;
            if (trials >= cfg.max_trials || dt < floor_dt) {
                out.trials = trials;
                throw ControllerFailure("trial-and-error: step under-resolution", std::move(out));
            }
            out = evaluate(dt);
            ++trials;
        }
        out.trials = trials;
        return out;
    }
    // doubling branch: accept the candidate previous to the first failure
    StepOutcome prev = std::move(out);
    while (true) {
        if (dt >= cfg.dt_max) {  // cannot grow further; the cap is acceptable as-is
            prev.trials = trials;
            return prev;
        }
        dt = std::min(dt * 2.0, cfg.dt_max);
        if (trials >= cfg.max_trials) {
            prev.trials = trials;
            throw ControllerFailure("trial-and-error: max_trials exceeded while doubling",
                                    std::move(prev));
        }
        StepOutcome next = evaluate(dt);
        ++trials;
        if (next.err > tol) {
            prev.trials = trials;
            return prev;
        }
        prev = std::move(next);
    }
}

struct PredictiveDiagnostics {
    int omega_halvings = 0;
    double final_omega = 1.0;
    bool accepted_out_of_band = false;
};

/// Predictive policy: assumes E ~ dt^theta, jumps toward the tolerance and
/// accepts inside the band [tol/2, 2 tol]. A detected 2-cycle halves the
/// under-relaxation omega; after max_trials the best candidate (smallest
/// |E - tol|) is accepted and flagged.
inline StepOutcome select_predictive(const CandidateEvaluator& evaluate, double dt_init,
                                     const ControllerConfig& cfg,
                                     PredictiveDiagnostics* diag = nullptr) {
    if (!(dt_init > 0.0))
        throw std::domain_error("select_predictive: dt_init must be positive");
    const double tol = cfg.tolerance;
    const double floor_dt = cfg.dt_min > 0.0 ? cfg.dt_min : min_step_floor(0.0);
    double omega = cfg.omega;
    double dt = std::min(dt_init, cfg.dt_max);
    double dt_prev = -1.0;  // candidate before the current one (cycle detection)

    StepOutcome best;
    double best_gap = std::numeric_limits<double>::infinity();
    int trials = 0;
    PredictiveDiagnostics local;
    local.final_omega = omega;

    while (trials < cfg.max_trials) {
        StepOutcome out = evaluate(dt);
        ++trials;
        const double gap = std::abs(out.err - tol);
        if (gap < best_gap) {
            best_gap = gap;
            best = out;
            best.trials = trials;
        }
        const bool in_band = out.err >= 0.5 * tol && out.err <= 2.0 * tol;
        const bool capped_ok = dt >= cfg.dt_max && out.err <= 2.0 * tol;
        if (in_band || capped_ok) {
            out.trials = trials;
            if (diag) {
                local.final_omega = omega;
                *diag = local;
            }
            return out;
        }
        if (out.err == 0.0) {  // no signal to predict from; grow like T&E would
            dt_prev = dt;
            dt = std::min(dt * 2.0, cfg.dt_max);
            continue;
        }
        double dt_new = omega * dt * std::pow(tol / out.err, 1.0 / cfg.theta) +
                        (1.0 - omega) * dt;
        if (dt_new >= floor_dt && dt_prev > 0.0 &&
            std::abs(dt_new - dt_prev) <= 1e-9 * dt_new) {
            // 2-cycle: damp the jump and re-predict
            omega *= 0.5;
            ++local.omega_halvings;
            dt_new = omega * dt * std::pow(tol / out.err, 1.0 / cfg.theta) +
                     (1.0 - omega) * dt;
        }
        dt_prev = dt;
        dt = std::clamp(dt_new, floor_dt, cfg.dt_max);
        if (dt == dt_prev) break;  // pinned at a bound with no new information
    }
    // out of trials: accept the closest candidate, flagged
    best.trials = trials;
    local.accepted_out_of_band = true;
    local.final_omega = omega;
    if (diag) *diag = local;
    return best;
}

struct StepRow {
    int n = 0;
    double t = 0.0;
    double dt = 0.0;
    double err = 0.0;
    int trials = 0;
    std::uint64_t work = 0;  // cumulative history-sum terms
    double wall = 0.0;       // cumulative seconds
};

/// Per-step log of a whole run plus the metadata needed to interpret it.
struct RunRecord {
    std::vector<StepRow> rows;
    double gamma = 0.0;
    double tolerance = 0.0;
    double theta = 0.0;
    double omega = 0.0;
    double dx = 0.0;
    std::string controller;
    std::string benchmark;
    int omega_halvings = 0;
    int out_of_band_accepts = 0;
    bool completed = false;
    std::string failure_reason;
};

struct RunResult {
    SolutionHistory history;
    RunRecord record;
};

/// Integrates from t = 0 to t_end, selecting each step with the configured
/// policy. The seed guess for step n is the accepted step n-1 (dt0 first);
/// the final step is capped so the last committed time is exactly t_end.
inline RunResult run(const Problem& problem, const SpatialGrid& grid,
                     const ControllerConfig& cfg, double t_end,
                     const std::string& benchmark_tag = "") {
    if (!(t_end > 0.0)) throw std::domain_error("run: t_end must be positive");
    cfg.validate();
    problem.validate();

    RunResult res;
    res.record.gamma = problem.gamma;
    res.record.tolerance = cfg.tolerance;
    res.record.theta = cfg.theta;
    res.record.omega = cfg.omega;
    res.record.dx = grid.dx();
    res.record.controller = to_string(cfg.kind);
    res.record.benchmark = benchmark_tag;

    res.history.push(0.0, initial_state(problem, grid));
    StepWork work;
    const auto wall_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start)
            .count();
    };

    double dt_guess = cfg.kind == ControllerKind::fixed ? cfg.fixed_dt : cfg.dt0;
    double omega = cfg.omega;
    int n = 0;
    const double t_eps = 1e-12 * std::max(1.0, t_end);
    while (res.history.last_time() < t_end - t_eps) {
        const double t_prev = res.history.last_time();
        const double remaining = t_end - t_prev;
        CandidateEvaluator evaluate = [&](double dt) {
            return evaluate_candidate(problem, grid, res.history, dt, &work);
        };
        StepOutcome out;
        try {
            switch (cfg.kind) {
                case ControllerKind::fixed:
                    out = evaluate(std::min(cfg.fixed_dt, remaining));
                    break;
                case ControllerKind::trial_and_error: {
                    ControllerConfig step_cfg = cfg;
                    step_cfg.dt_max = remaining;
                    step_cfg.dt_min = min_step_floor(t_prev);
                    out = select_trial_and_error(evaluate, std::min(dt_guess, remaining),
                                                 step_cfg);
                    break;
                }
                case ControllerKind::predictive: {
                    ControllerConfig step_cfg = cfg;
                    step_cfg.dt_max = remaining;
                    step_cfg.dt_min = min_step_floor(t_prev);
                    step_cfg.omega = omega;
                    PredictiveDiagnostics diag;
                    out = select_predictive(evaluate, std::min(dt_guess, remaining),
                                            step_cfg, &diag);
                    res.record.omega_halvings += diag.omega_halvings;
                    if (diag.accepted_out_of_band) ++res.record.out_of_band_accepts;
                    omega = diag.final_omega;
                    break;
                }
            }
        } catch (const ControllerFailure& failure) {
            res.record.completed = false;
            res.record.failure_reason = failure.what();
            return res;
        }

        double t_new = t_prev + out.dt;
        if (std::abs(t_new - t_end) < t_eps) t_new = t_end;
        ++n;
        res.history.push(t_new, cfg.commit == CommitPolicy::full_step
                                    ? std::move(out.full_step)
                                    : std::move(out.half_step));
        res.record.rows.push_back({n, t_new, out.dt, out.err, out.trials, work.terms,
                                   elapsed()});
        if (cfg.kind != ControllerKind::fixed) dt_guess = out.dt;
    }
    res.record.completed = true;
    return res;
}

}  // namespace fracdiff
