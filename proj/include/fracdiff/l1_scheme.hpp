#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fracdiff/problem.hpp"
#include "fracdiff/specfun.hpp"

namespace fracdiff {

/// Committed non-uniform temporal mesh together with the solution vector at
/// every committed time. This is the full memory the Caputo operator needs.
struct SolutionHistory {
    std::vector<double> times;
    std::vector<std::vector<double>> values;

    std::size_t size() const { return times.size(); }
    bool empty() const { return times.empty(); }
    double last_time() const { return times.back(); }
    const std::vector<double>& last_value() const { return values.back(); }

    void push(double t, std::vector<double> u) {
        if (!times.empty() && !(t > times.back()))
            throw std::domain_error("SolutionHistory: times must be strictly increasing");
        times.push_back(t);
        values.push_back(std::move(u));
    }
};

/// Read-only view of a history, optionally extended by one uncommitted entry.
/// The extension is what the half-step evaluation uses for its midpoint; the
/// referenced data must outlive the view.
class HistoryView {
public:
    HistoryView(const SolutionHistory& h) : base_(&h) {}  // NOLINT(google-explicit-constructor)

    HistoryView extended(const double& t, const std::vector<double>& u) const {
        HistoryView v(*this);
        if (v.extra_t_)
            throw std::logic_error("HistoryView: only one extension supported");
        v.extra_t_ = &t;
        v.extra_u_ = &u;
        return v;
    }

    std::size_t size() const { return base_->size() + (extra_t_ ? 1 : 0); }
    double time(std::size_t m) const {
        return m < base_->size() ? base_->times[m] : *extra_t_;
    }
    const std::vector<double>& value(std::size_t m) const {
        return m < base_->size() ? base_->values[m] : *extra_u_;
    }
    double last_time() const { return extra_t_ ? *extra_t_ : base_->last_time(); }
    const std::vector<double>& last_value() const {
        return extra_u_ ? *extra_u_ : base_->last_value();
    }

private:
    const SolutionHistory* base_;
    const double* extra_t_ = nullptr;
    const std::vector<double>* extra_u_ = nullptr;
};

/// Deterministic work proxy: counts history-sum terms processed, the quantity
/// that scales quadratically for fixed steps.
struct StepWork {
    std::uint64_t terms = 0;
};

/// Non-uniform L1 weight
///   T_{m,n} = [(t_n - t_m)^{1-gamma} - (t_n - t_{m+1})^{1-gamma}] / (t_{m+1} - t_m)
/// with the 0^{1-gamma} := 0 convention extended to gamma = 1 so that the
/// gamma = 1 limit collapses to backward Euler.
inline double l1_coefficient(double t_m, double t_mp1, double t_n, double gamma) {
    if (!(t_m < t_mp1) || !(t_mp1 <= t_n))
        throw std::domain_error("l1_coefficient: need t_m < t_mp1 <= t_n");
    if (!(gamma > 0.0) || gamma > 1.0)
        throw std::domain_error("l1_coefficient: gamma must lie in (0, 1]");
    const double e = 1.0 - gamma;
    return (detail::pow0(t_n - t_m, e) - detail::pow0(t_n - t_mp1, e)) / (t_mp1 - t_m);
}

/// Scaled weight (t_n - t_{n-1})^gamma * T_{m,n}; identically 1 for m = n-1.
inline double scaled_coefficient(double t_m, double t_mp1, double t_n, double t_nm1,
                                 double gamma) {
    if (!(t_nm1 < t_n))
        throw std::domain_error("scaled_coefficient: need t_nm1 < t_n");
    return std::pow(t_n - t_nm1, gamma) * l1_coefficient(t_m, t_mp1, t_n, gamma);
}

/// Three diagonals plus right-hand side over the interior nodes of one
/// implicit step. Strictly diagonally dominant by construction.
struct TridiagonalSystem {
    std::vector<double> sub;    // length J-2
    std::vector<double> diag;   // length J-1
    std::vector<double> super;  // length J-2
    std::vector<double> rhs;    // length J-1
};

/// Assembles the implicit system for the step from the last committed time to
/// t_n. Each scaled weight is computed once and reused across all interior
/// nodes; the memory sum is accumulated m-ascending with compensated
/// summation, since its terms span many magnitudes for large n.
inline TridiagonalSystem assemble(const Problem& problem, const SpatialGrid& grid,
                                  HistoryView history, double t_n,
                                  StepWork* work = nullptr) {
    const std::size_t n = history.size();  // index of the step being formed
    if (n == 0)
        throw std::domain_error("assemble: history must contain the initial condition");
    const double t_nm1 = history.last_time();
    if (!(t_n > t_nm1))
        throw std::domain_error("assemble: t_n must exceed the last history time");

    const double gamma = problem.gamma;
    const int J = grid.divisions();
    const int interior = J - 1;
    const double dt = t_n - t_nm1;
    const double g2 = gamma_fn(2.0 - gamma);
    const double dt_pow = std::pow(dt, gamma);
    const double s_n = g2 * problem.diffusivity * dt_pow / (grid.dx() * grid.dx());

    TridiagonalSystem sys;
    sys.sub.assign(static_cast<std::size_t>(interior - 1), -s_n);
    sys.super.assign(static_cast<std::size_t>(interior - 1), -s_n);
    sys.diag.assign(static_cast<std::size_t>(interior), 1.0 + 2.0 * s_n);
    sys.rhs.assign(static_cast<std::size_t>(interior), 0.0);

    // memory sum over m = 0 .. n-2, Kahan-compensated per node
    std::vector<double> comp(static_cast<std::size_t>(interior), 0.0);
    for (std::size_t m = 0; m + 1 < n; ++m) {
        const double w = dt_pow * l1_coefficient(history.time(m), history.time(m + 1),
                                                 t_n, gamma);
        if (w != 0.0) {
            const auto& u_next = history.value(m + 1);
            const auto& u_prev = history.value(m);
            for (int j = 0; j < interior; ++j) {
                const double term = -w * (u_next[j + 1] - u_prev[j + 1]);
                const double y = term - comp[j];
                const double t = sys.rhs[j] + y;
                comp[j] = (t - sys.rhs[j]) - y;
                sys.rhs[j] = t;
            }
        }
    }
    if (work) work->terms += (n - 1) * static_cast<std::uint64_t>(interior);

    const auto& u_last = history.last_value();
    for (int j = 0; j < interior; ++j) {
        const double x_j = grid.node(j + 1);
        const double f = g2 * dt_pow * problem.source_at(x_j, t_n);
        sys.rhs[j] += u_last[j + 1] + f;
    }
    sys.rhs.front() += s_n * problem.left_bc(t_n);
    sys.rhs.back() += s_n * problem.right_bc(t_n);
    return sys;
}

/// Thomas elimination; the system is consumed.
inline std::vector<double> thomas_solve(TridiagonalSystem sys) {
    const std::size_t n = sys.diag.size();
    if (n == 0) return {};
    if (sys.sub.size() + 1 != n || sys.super.size() + 1 != n || sys.rhs.size() != n)
        throw std::invalid_argument("thomas_solve: inconsistent diagonal lengths");
    for (std::size_t i = 1; i < n; ++i) {
        if (sys.diag[i - 1] == 0.0)
            throw std::domain_error("thomas_solve: zero pivot");
        const double w = sys.sub[i - 1] / sys.diag[i - 1];
        sys.diag[i] -= w * sys.super[i - 1];
        sys.rhs[i] -= w * sys.rhs[i - 1];
    }
    if (sys.diag[n - 1] == 0.0)
        throw std::domain_error("thomas_solve: zero pivot");
    std::vector<double> u(n);
    u[n - 1] = sys.rhs[n - 1] / sys.diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        u[i] = (sys.rhs[i] - sys.super[i] * u[i + 1]) / sys.diag[i];
    }
    return u;
}

/// One implicit step of size dt from the end of the history. Returns the full
/// node vector (boundary entries from the BCs at the new time); the history is
/// not touched.
inline std::vector<double> advance(const Problem& problem, const SpatialGrid& grid,
                                   HistoryView history, double dt,
                                   StepWork* work = nullptr) {
    if (!(dt > 0.0)) throw std::domain_error("advance: dt must be positive");
    const double t_n = history.last_time() + dt;
    auto interior = thomas_solve(assemble(problem, grid, history, t_n, work));
    std::vector<double> u(static_cast<std::size_t>(grid.node_count()));
    u.front() = problem.left_bc(t_n);
    u.back() = problem.right_bc(t_n);
    for (std::size_t j = 0; j < interior.size(); ++j) u[j + 1] = interior[j];
    return u;
}

/// Initial node vector sampled from the problem's initial condition. The
/// boundary nodes take the initial-condition values even when they disagree
/// with the t = 0 boundary data (reservoir case); the boundary functions take
/// over at every later time.
inline std::vector<double> initial_state(const Problem& problem, const SpatialGrid& grid) {
    std::vector<double> u(static_cast<std::size_t>(grid.node_count()));
    for (int j = 0; j < grid.node_count(); ++j) u[j] = problem.initial(grid.node(j));
    return u;
}

}  // namespace fracdiff
