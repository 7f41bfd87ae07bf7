#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fracdiff/specfun.hpp"

namespace fracdiff {

using TimeFn = std::function<double(double)>;        // t -> value
using SpaceFn = std::function<double(double)>;       // x -> value
using SpaceTimeFn = std::function<double(double, double)>;  // (x, t) -> value

/// Continuous problem: d^gamma u/dt^gamma = K u_xx + f on [x_lo, x_hi],
/// Dirichlet boundary data, Caputo derivative of order gamma in (0, 1].
struct Problem {
    double gamma = 0.5;
    double diffusivity = 1.0;
    double x_lo = 0.0;
    double x_hi = 1.0;
    TimeFn left_bc;
    TimeFn right_bc;
    SpaceFn initial;
    SpaceTimeFn source;  // may be null (treated as zero)

    void validate() const {
        if (!(gamma > 0.0) || gamma > 1.0)
            throw std::domain_error("Problem: gamma must lie in (0, 1]");
        if (!(diffusivity > 0.0))
            throw std::domain_error("Problem: diffusivity must be positive");
        if (!(x_lo < x_hi))
            throw std::domain_error("Problem: empty spatial domain");
    }

    double source_at(double x, double t) const {
        return source ? source(x, t) : 0.0;
    }

    /// Largest mismatch between the initial condition and the t = 0 boundary
    /// values. The reservoir problem is deliberately inconsistent here; callers
    /// log the gap instead of rejecting the problem.
    double boundary_consistency_gap() const {
        const double gl = std::abs(initial(x_lo) - left_bc(0.0));
        const double gr = std::abs(initial(x_hi) - right_bc(0.0));
        return std::max(gl, gr);
    }
};

/// Uniform spatial grid with J intervals (J + 1 nodes).
class SpatialGrid {
public:
    SpatialGrid(double x_lo, double x_hi, int divisions)
        : x_lo_(x_lo), x_hi_(x_hi), divisions_(divisions) {
        if (divisions < 2)
            throw std::domain_error("SpatialGrid: need at least 2 divisions");
        if (!(x_lo < x_hi))
            throw std::domain_error("SpatialGrid: empty domain");
        dx_ = (x_hi - x_lo) / divisions;
    }

    int divisions() const { return divisions_; }          // J
    int node_count() const { return divisions_ + 1; }     // J + 1
    int interior_count() const { return divisions_ - 1; }
    double dx() const { return dx_; }
    double node(int j) const { return j == divisions_ ? x_hi_ : x_lo_ + j * dx_; }
    double x_lo() const { return x_lo_; }
    double x_hi() const { return x_hi_; }

private:
    double x_lo_, x_hi_;
    int divisions_;
    double dx_;
};

enum class BenchmarkTag { testbed, steep_source, reservoir };

inline std::string to_string(BenchmarkTag tag) {
    switch (tag) {
        case BenchmarkTag::testbed: return "testbed";
        case BenchmarkTag::steep_source: return "steep_source";
        case BenchmarkTag::reservoir: return "reservoir";
    }
    return "?";
}

/// One of the three named benchmark problems, with its exact solution where
/// one is known in closed form.
struct NamedBenchmark {
    BenchmarkTag tag = BenchmarkTag::testbed;
    Problem problem;
    SpaceTimeFn exact;  // null when no closed form is carried
    // steep_source parameters
    double a = 0.0, p = 0.0;
    // reservoir parameters
    double u0 = 0.0, L = 0.0;
};

/// Subdiffusion on [0, pi] with sin x initial data; every Fourier mode decays
/// as a Mittag-Leffler function, here just the fundamental.
inline NamedBenchmark make_testbed(double gamma) {
    if (!(gamma > 0.0) || gamma > 1.0)
        throw std::domain_error("make_testbed: gamma must lie in (0, 1]");
    NamedBenchmark b;
    b.tag = BenchmarkTag::testbed;
    b.problem.gamma = gamma;
    b.problem.diffusivity = 1.0;
    b.problem.x_lo = 0.0;
    b.problem.x_hi = M_PI;
    b.problem.left_bc = [](double) { return 0.0; };
    b.problem.right_bc = [](double) { return 0.0; };
    b.problem.initial = [](double x) { return std::sin(x); };
    b.problem.source = nullptr;
    b.exact = [gamma](double x, double t) {
        return mittag_leffler(gamma, -std::pow(t, gamma)) * std::sin(x);
    };
    return b;
}

/// Testbed plus a source a*t^p*sin(x)-forcing whose exact solution adds a
/// steep late-time growth; three distinct time regimes for a = p = 20.
inline NamedBenchmark make_steep_source(double gamma, double a, double p) {
    if (!(gamma > 0.0) || gamma >= 1.0)
        throw std::domain_error("make_steep_source: gamma must lie in (0, 1)");
    if (!(p > gamma))
        throw std::domain_error("make_steep_source: requires p > gamma");
    if (!(a > 0.0))
        throw std::domain_error("make_steep_source: requires a > 0");
    NamedBenchmark b;
    b.tag = BenchmarkTag::steep_source;
    b.a = a;
    b.p = p;
    b.problem.gamma = gamma;
    b.problem.diffusivity = 1.0;
    b.problem.x_lo = 0.0;
    b.problem.x_hi = M_PI;
    b.problem.left_bc = [](double) { return 0.0; };
    b.problem.right_bc = [](double) { return 0.0; };
    b.problem.initial = [](double x) { return std::sin(x); };
    const double gamma_ratio = gamma_fn(1.0 + p) / gamma_fn(1.0 + p - gamma);
    b.problem.source = [a, p, gamma, gamma_ratio](double x, double t) {
        if (t <= 0.0) return 0.0;  // t^p and t^{p-gamma} both vanish (p > gamma > 0)
        return a * (std::pow(t, p) + gamma_ratio * std::pow(t, p - gamma)) * std::sin(x);
    };
    b.exact = [gamma, a, p](double x, double t) {
        const double ml = mittag_leffler(gamma, -detail::pow0(t, gamma));
        return (ml + a * detail::pow0(t, p)) * std::sin(x);
    };
    return b;
}

/// Constant-concentration reservoir at x = 0, absorbing wall at x = L,
/// initially empty medium. Exact solution is carried only for gamma = 1
/// (image series, see the bench module).
inline NamedBenchmark make_reservoir(double gamma, double K, double L, double u0) {
    if (!(gamma > 0.0) || gamma > 1.0)
        throw std::domain_error("make_reservoir: gamma must lie in (0, 1]");
    if (!(L > 0.0))
        throw std::domain_error("make_reservoir: requires L > 0");
    if (!(K > 0.0))
        throw std::domain_error("make_reservoir: requires K > 0");
    NamedBenchmark b;
    b.tag = BenchmarkTag::reservoir;
    b.u0 = u0;
    b.L = L;
    b.problem.gamma = gamma;
    b.problem.diffusivity = K;
    b.problem.x_lo = 0.0;
    b.problem.x_hi = L;
    b.problem.left_bc = [u0](double) { return u0; };
    b.problem.right_bc = [](double) { return 0.0; };
    b.problem.initial = [](double) { return 0.0; };
    b.problem.source = nullptr;
    // gamma = 1 closed form attached by the bench module when needed.
    return b;
}

inline NamedBenchmark make_benchmark(BenchmarkTag tag, double gamma,
                                     double K = 1.0, double a = 20.0, double p = 20.0,
                                     double L = 4.0, double u0 = 1.0) {
    switch (tag) {
        case BenchmarkTag::testbed: return make_testbed(gamma);
        case BenchmarkTag::steep_source: return make_steep_source(gamma, a, p);
        case BenchmarkTag::reservoir: return make_reservoir(gamma, K, L, u0);
    }
    throw std::domain_error("make_benchmark: unknown tag");
}

}  // namespace fracdiff
