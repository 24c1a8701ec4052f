#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tdelab/linalg.hpp"

namespace tdelab {

/// One grid row of a closed-loop manipulator run.
struct RobotRecord {
    double t = 0.0;
    Vec q, qd, qdd;
    Vec tau;
    Vec u;         // outer-loop command (tde_pd), else empty
    Vec d;         // external disturbance
    Vec estimate;  // d_hat or h_hat actually used by the controller
    Vec S;         // sliding variable (tracking laws), else empty
    Vec q_err;     // q - q_d
    Vec e;         // estimation error in the controller's own normalization
    double xi_norm = 0.0;
    double V = 0.0;  // Lyapunov function of the active law
    bool cold_start = false;
};

/// One grid row of a closed-loop port-Hamiltonian run.
struct PhRecord {
    double t = 0.0;
    Vec x, xdot;
    Vec u;
    Vec d;
    Vec estimate;
    double H = 0.0;
    bool cold_start = false;
};

template <class Record>
struct Trajectory {
    double dt = 0.0;
    std::vector<Record> records;
    bool diverged = false;
    double diverged_at = 0.0;
    std::string diagnostic;

    std::size_t size() const { return records.size(); }
    std::size_t cold_start_steps() const {
        std::size_t n = 0;
        for (const auto& r : records) n += r.cold_start ? 1 : 0;
        return n;
    }
    std::vector<double> times() const {
        std::vector<double> out;
        out.reserve(records.size());
        for (const auto& r : records) out.push_back(r.t);
        return out;
    }
    template <class F>
    std::vector<double> series(F&& f) const {
        std::vector<double> out;
        out.reserve(records.size());
        for (const auto& r : records) out.push_back(f(r));
        return out;
    }
};

using RobotTrajectory = Trajectory<RobotRecord>;
using PhTrajectory = Trajectory<PhRecord>;

}  // namespace tdelab
