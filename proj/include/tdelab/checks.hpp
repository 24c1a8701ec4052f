#pragma once

// Scenario verdicts: turns a simulated trajectory and the scenario's check
// spec into a RunReport.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tdelab/analysis.hpp"
#include "tdelab/sim.hpp"

namespace tdelab {

inline const char* to_string(CheckKind k) {
    switch (k) {
        case CheckKind::none: return "none";
        case CheckKind::asymptotic: return "asymptotic";
        case CheckKind::case1_bound: return "case1_bound";
        case CheckKind::case2_bound: return "case2_bound";
        case CheckKind::regulation_bound: return "regulation_bound";
        case CheckKind::ph_decay: return "ph_decay";
        case CheckKind::tde_identity: return "tde_identity";
        case CheckKind::energy: return "energy";
    }
    return "?";
}

struct RunReport {
    std::string scenario_id;
    std::string system;  // "robot" or "port_hamiltonian"
    std::string controller;
    std::string check;
    std::optional<BoundReport> bound;
    std::map<std::string, double> metrics;
    bool satisfied = false;
    bool diverged = false;
    double diverged_at = 0.0;
    std::string diagnostic;
    std::size_t cold_start_steps = 0;
    std::size_t steps = 0;
};

namespace detail {

inline double after_time(const CheckSpec& c, double horizon) {
    return c.after_s >= 0.0 ? c.after_s : c.settle_fraction * horizon;
}

inline std::vector<char> cold_mask(const RobotTrajectory& traj) {
    std::vector<char> m;
    m.reserve(traj.records.size());
    for (const auto& r : traj.records) m.push_back(r.cold_start ? 1 : 0);
    return m;
}

/// sup ||df/dt|| along the run by forward differences; zero for undamped models.
inline double observed_damping_rate(const RobotModel& model, const RobotTrajectory& traj) {
    double best = 0.0;
    for (std::size_t i = 1; i < traj.records.size(); ++i) {
        const auto& a = traj.records[i - 1];
        const auto& b = traj.records[i];
        const Vec df = model.damping_vector(b.q, b.qd) - model.damping_vector(a.q, a.qd);
        best = std::max(best, df.norm() / traj.dt);
    }
    return best;
}

/// Largest value of `values` at or after `after`, ignoring cold-start samples.
inline double max_after(const std::vector<double>& times, const std::vector<double>& values,
                        const std::vector<char>& cold, double after) {
    double best = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] + 1e-12 < after || cold[i]) continue;
        best = std::max(best, values[i]);
        any = true;
    }
    if (!any) throw std::invalid_argument("check window is empty");
    return best;
}

}  // namespace detail

/// Residuals of the TDE error recursion and of e = qdd - u along a tde_pd run,
/// each normalized by (1 + ||e||), over non-cold-start steps.
struct TdeIdentityResiduals {
    double recursion = 0.0;
    double closed_loop = 0.0;
    std::size_t steps = 0;
};

inline TdeIdentityResiduals tde_identity_residuals(const RobotScenario& sc, const RobotTrajectory& traj) {
    const RobotModel model = build_model(sc.model);
    const int delay = delay_steps(sc.rho, sc.dt);
    TdeIdentityResiduals out;
    for (std::size_t k = 0; k < traj.records.size(); ++k) {
        const RobotRecord& r = traj.records[k];
        if (r.cold_start || k < static_cast<std::size_t>(delay)) continue;
        const RobotRecord& p = traj.records[k - static_cast<std::size_t>(delay)];
        const LoopPoint now{{r.t, r.q, r.qd}, r.u, r.d, r.qdd};
        const LoopPoint past{{p.t, p.q, p.qd}, p.u, p.d, p.qdd};
        const Vec e_prev = p.qdd - p.u;
        const TdeErrorDecomposition dec = tde_error_decomposition(model, sc.m_bar, now, past, e_prev);
        const double scale = 1.0 + r.e.norm();
        out.recursion = std::max(out.recursion, (r.e - dec.e).norm() / scale);
        out.closed_loop = std::max(out.closed_loop, (r.e - (r.qdd - r.u)).norm() / scale);
        ++out.steps;
    }
    return out;
}

inline RunReport evaluate_checks(const RobotScenario& sc, const RobotTrajectory& traj) {
    RunReport rep;
    rep.scenario_id = sc.id;
    rep.system = "robot";
    rep.controller = to_string(sc.controller);
    rep.check = to_string(sc.check.kind);
    rep.diverged = traj.diverged;
    rep.diverged_at = traj.diverged_at;
    rep.diagnostic = traj.diagnostic;
    rep.cold_start_steps = traj.cold_start_steps();
    rep.steps = traj.size();
    if (traj.diverged) {
        rep.satisfied = false;
        return rep;
    }

    const RobotModel model = build_model(sc.model);
    const auto times = traj.times();
    const auto cold = detail::cold_mask(traj);
    const double eps_d = derivative_bound(sc.disturbance);
    const CheckSpec& c = sc.check;

    auto bound_constants = [&]() {
        const InertiaExtremes ext = inertia_extremes(model, 10000, sc.seed);
        const double eps_f = detail::observed_damping_rate(model, traj);
        rep.metrics["lambda_min_M"] = ext.lambda_min;
        rep.metrics["lambda_max_M"] = ext.lambda_max;
        rep.metrics["epsilon_disturbance"] = eps_d;
        rep.metrics["epsilon_damping_observed"] = eps_f;
        rep.metrics["epsilon"] = eps_d + eps_f;
        return std::make_pair(ext, eps_d + eps_f);
    };

    switch (c.kind) {
        case CheckKind::none: rep.satisfied = true; break;
        case CheckKind::asymptotic: {
            const double after = detail::after_time(c, sc.horizon);
            std::vector<double> sig;
            if (is_tracking(sc.controller)) {
                sig = traj.series([](const RobotRecord& r) { return r.S.norm(); });
            } else {
                sig = traj.series([](const RobotRecord& r) { return std::max(r.q_err.norm(), r.qd.norm()); });
            }
            BoundReport b;
            b.theoretical_bound = c.tolerance;
            b.observed_steady_max = detail::max_after(times, sig, cold, after);
            b.satisfied = b.observed_steady_max <= c.tolerance;
            b.margin_ratio = b.observed_steady_max / c.tolerance;
            b.settle_time = make_bound_report(times, sig, c.tolerance, 0.0, cold).settle_time;
            rep.metrics["after_s"] = after;
            rep.bound = b;
            rep.satisfied = b.satisfied;
            break;
        }
        case CheckKind::case1_bound:
        case CheckKind::case2_bound: {
            const auto [ext, eps] = bound_constants();
            const double lk = lambda_min(sc.tracking.K);
            double bound = 0.0;
            if (c.kind == CheckKind::case1_bound) {
                bound = ultimate_bound_case1(ext.lambda_min, ext.lambda_max, lk, sc.rho, eps, sc.tracking.beta);
            } else {
                const double kappa = gravity_bound(model);
                rep.metrics["kappa"] = kappa;
                bound = ultimate_bound_case2(ext.lambda_min, ext.lambda_max, lk, sc.rho, eps, kappa, sc.tracking.beta);
            }
            const auto sig = traj.series([](const RobotRecord& r) { return r.S.norm(); });
            rep.bound = make_bound_report(times, sig, bound, c.settle_fraction, cold);
            rep.satisfied = rep.bound->satisfied;
            break;
        }
        case CheckKind::regulation_bound: {
            const auto [ext, eps] = bound_constants();
            const double lkd = lambda_min(sc.regulation.Kd);
            const double kappa = sc.controller == ControllerKind::pd_reg_case2 ? gravity_bound(model) : 0.0;
            rep.metrics["kappa"] = kappa;
            const double band = ultimate_bound_case2(ext.lambda_min, ext.lambda_max, lkd, sc.rho, eps, kappa, 0.1 * lkd);
            const auto vel = traj.series([](const RobotRecord& r) { return r.qd.norm(); });
            rep.bound = make_bound_report(times, vel, band, c.settle_fraction, cold);
            // q_err must not grow: last-quarter max within 1% of third-quarter max.
            const auto err = traj.series([](const RobotRecord& r) { return r.q_err.norm(); });
            const double t_end = times.back();
            double q3 = 0.0, q4 = 0.0;
            for (std::size_t i = 0; i < times.size(); ++i) {
                if (times[i] >= 0.5 * t_end && times[i] < 0.75 * t_end) q3 = std::max(q3, err[i]);
                if (times[i] >= 0.75 * t_end) q4 = std::max(q4, err[i]);
            }
            rep.metrics["q_err_max_third_quarter"] = q3;
            rep.metrics["q_err_max_last_quarter"] = q4;
            const bool q_bounded = std::isfinite(q4) && q4 <= 1.01 * q3 + 1e-12;
            rep.metrics["q_err_bounded"] = q_bounded ? 1.0 : 0.0;
            rep.satisfied = rep.bound->satisfied && q_bounded;
            break;
        }
        case CheckKind::tde_identity: {
            if (sc.controller != ControllerKind::tde_pd) throw ConfigError("checks.kind", "tde_identity needs tde_pd");
            const TdeIdentityResiduals res = tde_identity_residuals(sc, traj);
            rep.metrics["recursion_residual"] = res.recursion;
            rep.metrics["closed_loop_residual"] = res.closed_loop;
            rep.metrics["checked_steps"] = static_cast<double>(res.steps);
            rep.satisfied = res.steps > 0 && res.recursion <= c.tolerance && res.closed_loop <= c.tolerance;
            break;
        }
        case CheckKind::energy: {
            // E(t) - E(0) = int qd^T (tau - f - d) dt, trapezoidal rule on the grid.
            double work = 0.0;
            double worst = 0.0;
            const double e0 = mechanical_energy(model, {0.0, traj.records[0].q, traj.records[0].qd});
            auto power = [&](const RobotRecord& r) {
                return r.qd.dot(r.tau - model.damping_vector(r.q, r.qd) - r.d);
            };
            for (std::size_t i = 1; i < traj.records.size(); ++i) {
                const auto& a = traj.records[i - 1];
                const auto& b = traj.records[i];
                work += 0.5 * traj.dt * (power(a) + power(b));
                const double e = mechanical_energy(model, {b.t, b.q, b.qd});
                worst = std::max(worst, std::abs(e - e0 - work));
            }
            rep.metrics["energy_balance_error"] = worst;
            rep.satisfied = worst <= c.tolerance * (1.0 + std::abs(e0));
            break;
        }
        case CheckKind::ph_decay: throw ConfigError("checks.kind", "ph_decay needs a port-Hamiltonian scenario");
    }
    return rep;
}

inline RunReport evaluate_checks(const PhScenario& sc, const PhTrajectory& traj) {
    RunReport rep;
    rep.scenario_id = sc.id;
    rep.system = "port_hamiltonian";
    rep.controller = to_string(sc.controller);
    rep.check = to_string(sc.check.kind);
    rep.diverged = traj.diverged;
    rep.diverged_at = traj.diverged_at;
    rep.diagnostic = traj.diagnostic;
    rep.cold_start_steps = traj.cold_start_steps();
    rep.steps = traj.size();
    if (traj.diverged) return rep;

    const PHModel model = make_ph_pendulum(sc.model);
    const auto times = traj.times();
    std::vector<char> cold;
    for (const auto& r : traj.records) cold.push_back(r.cold_start ? 1 : 0);
    const auto dist = traj.series([&](const PhRecord& r) { return (r.x - model.minimizer).norm(); });
    const CheckSpec& c = sc.check;
    const double eps = derivative_bound(sc.disturbance);

    switch (c.kind) {
        case CheckKind::none: rep.satisfied = true; break;
        case CheckKind::asymptotic: {
            const double after = detail::after_time(c, sc.horizon);
            BoundReport b;
            b.theoretical_bound = c.tolerance;
            b.observed_steady_max = detail::max_after(times, dist, cold, after);
            b.satisfied = b.observed_steady_max <= c.tolerance;
            b.margin_ratio = b.observed_steady_max / c.tolerance;
            b.settle_time = make_bound_report(times, dist, c.tolerance, 0.0, cold).settle_time;
            rep.metrics["after_s"] = after;
            rep.bound = b;
            rep.satisfied = b.satisfied;
            break;
        }
        case CheckKind::ph_decay: {
            if (sc.controller != ControllerKind::ph_case3) throw ConfigError("checks.kind", "ph_decay needs ph_case3");
            const PhDecayReport pr = ph_decay_check(model, traj, sc.K, sc.rho, eps, c.settle_fraction);
            rep.bound = pr.band;
            rep.metrics["epsilon"] = eps;
            rep.metrics["hdot_fraction"] = pr.hdot_fraction;
            rep.metrics["hdot_samples"] = static_cast<double>(pr.samples);
            rep.metrics["hdot_max_violation"] = pr.max_violation;
            rep.metrics["numeric_hdot_gap"] = pr.numeric_hdot_gap;
            rep.satisfied = pr.band.satisfied && pr.hdot_fraction >= 0.99;
            break;
        }
        default:
            throw ConfigError("checks.kind", std::string(to_string(c.kind)) + " is not available for port-Hamiltonian runs");
    }
    return rep;
}

}  // namespace tdelab
