#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracdiff/bench.hpp"
#include "fracdiff/stepdoubling.hpp"

namespace fracdiff {

inline std::string fmt_num(double v) {
    std::ostringstream os;
    os << std::scientific << std::setprecision(16) << v;
    return os.str();
}

/// Per-step CSV: '#'-prefixed metadata lines, then one row per committed step.
/// Everything except the wall column is deterministic for a given run spec.
inline void write_record_csv(const RunRecord& record, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_record_csv: cannot open " + path);
    os << "# benchmark=" << record.benchmark << "\n";
    os << "# controller=" << record.controller << "\n";
    os << "# gamma=" << fmt_num(record.gamma) << "\n";
    os << "# tolerance=" << fmt_num(record.tolerance) << "\n";
    os << "# theta=" << fmt_num(record.theta) << "\n";
    os << "# omega=" << fmt_num(record.omega) << "\n";
    os << "# dx=" << fmt_num(record.dx) << "\n";
    os << "# completed=" << (record.completed ? 1 : 0) << "\n";
    os << "n,t,dt,err,trials,work,wall\n";
    for (const auto& row : record.rows) {
        os << row.n << ',' << fmt_num(row.t) << ',' << fmt_num(row.dt) << ','
           << fmt_num(row.err) << ',' << row.trials << ',' << row.work << ','
           << fmt_num(row.wall) << "\n";
    }
}

/// Solution profiles at snapshot times, one column per snapshot.
inline void write_profile_csv(const SolutionHistory& history, const SpatialGrid& grid,
                              const std::vector<double>& snapshot_times,
                              const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_profile_csv: cannot open " + path);
    std::vector<std::vector<double>> profiles;
    os << "x";
    for (double t : snapshot_times) {
        profiles.push_back(profile_at(history, t));
        os << ",u(t=" << fmt_num(t) << ")";
    }
    os << "\n";
    for (int j = 0; j < grid.node_count(); ++j) {
        os << fmt_num(grid.node(j));
        for (const auto& p : profiles) os << ',' << fmt_num(p[j]);
        os << "\n";
    }
}

inline nlohmann::json record_summary_json(const RunRecord& record) {
    nlohmann::json j;
    j["benchmark"] = record.benchmark;
    j["controller"] = record.controller;
    j["gamma"] = record.gamma;
    j["tolerance"] = record.tolerance;
    j["theta"] = record.theta;
    j["omega"] = record.omega;
    j["dx"] = record.dx;
    j["steps"] = record.rows.size();
    j["completed"] = record.completed;
    j["omega_halvings"] = record.omega_halvings;
    j["out_of_band_accepts"] = record.out_of_band_accepts;
    if (!record.failure_reason.empty()) j["failure_reason"] = record.failure_reason;
    if (!record.rows.empty()) {
        j["t_final"] = record.rows.back().t;
        j["total_work"] = record.rows.back().work;
        j["total_wall_seconds"] = record.rows.back().wall;
    }
    return j;
}

inline nlohmann::json fit_json(const ScalingFit& fit) {
    return {{"exponent", fit.exponent},
            {"intercept", fit.intercept},
            {"residual", fit.residual},
            {"n_points", fit.n_points},
            {"range_lo", fit.range_lo},
            {"range_hi", fit.range_hi}};
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_json: cannot open " + path);
    os << j.dump(2) << "\n";
}

}  // namespace fracdiff
