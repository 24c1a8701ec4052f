#pragma once

// Fixed-step, delay-aware closed-loop simulation.
//
// The state is integrated with classical RK4 on the grid t_k = k dt. At every
// grid point the time-delay estimate is computed once from the history buffer
// and held over the four stages of the step; the rest of the control law is
// re-evaluated at each stage. History is written only at grid points, so
// lookups at t - rho and t - 2 rho always land on stored samples.

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>

#include "tdelab/analysis.hpp"
#include "tdelab/controllers.hpp"
#include "tdelab/dynamics.hpp"
#include "tdelab/errors.hpp"
#include "tdelab/signals.hpp"
#include "tdelab/tde.hpp"
#include "tdelab/trajectory.hpp"

namespace tdelab {

/// State norm above which a run is declared divergent.
inline constexpr double kDivergenceThreshold = 1e6;

template <class F>
Vec rk4_step(F&& f, double t, const Vec& x, double h) {
    const Vec k1 = f(t, x);
    const Vec k2 = f(t + h / 2, Vec(x + h / 2 * k1));
    const Vec k3 = f(t + h / 2, Vec(x + h / 2 * k2));
    const Vec k4 = f(t + h, Vec(x + h * k3));
    return x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

enum class ControllerKind { none, case1, case2, pd_reg_case1, pd_reg_case2, tde_pd, ph_case3 };
enum class EstimatorKind { tde, oracle, zero };

inline const char* to_string(ControllerKind k) {
    switch (k) {
        case ControllerKind::none: return "none";
        case ControllerKind::case1: return "case1";
        case ControllerKind::case2: return "case2";
        case ControllerKind::pd_reg_case1: return "pd_reg_case1";
        case ControllerKind::pd_reg_case2: return "pd_reg_case2";
        case ControllerKind::tde_pd: return "tde_pd";
        case ControllerKind::ph_case3: return "ph_case3";
    }
    return "?";
}

inline const char* to_string(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::tde: return "tde";
        case EstimatorKind::oracle: return "oracle";
        case EstimatorKind::zero: return "zero";
    }
    return "?";
}

inline bool is_tracking(ControllerKind k) {
    return k == ControllerKind::case1 || k == ControllerKind::case2 || k == ControllerKind::tde_pd;
}
inline bool is_regulation(ControllerKind k) {
    return k == ControllerKind::pd_reg_case1 || k == ControllerKind::pd_reg_case2;
}

enum class CheckKind {
    none,
    asymptotic,        // tracked signal below `tolerance` for t >= after_s
    case1_bound,       // steady ||S|| vs ultimate_bound_case1
    case2_bound,       // steady ||S|| vs ultimate_bound_case2
    regulation_bound,  // steady ||qd|| vs velocity band, q_err non-growing
    ph_decay,          // H_dot inequality + ||x - x*|| band
    tde_identity,      // e = D e_prev + xi and e = qdd - u
    energy,            // passive energy balance
};

struct CheckSpec {
    CheckKind kind = CheckKind::none;
    double settle_fraction = 0.5;
    double tolerance = 1e-6;
    double after_s = -1.0;  // negative: settle_fraction * horizon
};

enum class RobotModelKind { pendulum, two_link };

struct RobotModelSpec {
    RobotModelKind kind = RobotModelKind::two_link;
    PendulumParams pendulum;
    TwoLinkParams two_link;
};

inline RobotModel build_model(const RobotModelSpec& spec) {
    return spec.kind == RobotModelKind::pendulum ? make_pendulum(spec.pendulum) : make_two_link(spec.two_link);
}

struct RobotScenario {
    std::string id;
    RobotModelSpec model;
    ControllerKind controller = ControllerKind::case1;
    EstimatorKind estimator = EstimatorKind::tde;
    AccelMode accel_mode = AccelMode::exact;
    TrackingGains tracking;
    RegulationGains regulation;
    Mat m_bar;  // tde_pd only
    DisturbanceSpec disturbance;
    ReferenceSpec reference;
    double dt = 1e-3;
    double rho = 1e-2;
    double horizon = 10.0;
    Vec q0, qd0;
    std::uint64_t seed = 1;
    CheckSpec check;
};

struct PhScenario {
    std::string id;
    PendulumParams model;
    ControllerKind controller = ControllerKind::ph_case3;
    EstimatorKind estimator = EstimatorKind::tde;
    Mat K;
    DisturbanceSpec disturbance;
    double dt = 1e-3;
    double rho = 1e-2;
    double horizon = 10.0;
    Vec x0;
    std::uint64_t seed = 1;
    CheckSpec check;
};

using Scenario = std::variant<RobotScenario, PhScenario>;

namespace detail {

inline void validate_timing(double dt, double rho, double horizon) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt_s", "must be positive");
    try {
        delay_steps(rho, dt);
    } catch (const HistoryError& e) {
        throw ConfigError("rho_s", e.what());
    }
    if (!(horizon >= 10.0 * rho)) throw ConfigError("horizon_s", "must be at least 10 * rho_s");
    const double steps = horizon / dt;
    if (std::abs(steps - std::round(steps)) > 1e-6 * std::max(1.0, steps)) {
        throw ConfigError("horizon_s", "must be an integer multiple of dt_s");
    }
}

/// One RK4 step with divergence detection. A blown-up state that makes the
/// model itself fail (non-finite terms, singular inertia) counts as divergence.
template <class F, class Traj>
bool advance(F&& rhs, double t, Vec& x, double dt, Traj& traj) {
    std::string why;
    try {
        x = rk4_step(rhs, t, x, dt);
        if (!x.allFinite() || x.norm() > kDivergenceThreshold) {
            why = "state norm exceeded " + std::to_string(kDivergenceThreshold);
        }
    } catch (const ModelError& e) {
        why = std::string("model evaluation failed: ") + e.what();
    } catch (const ConditioningError& e) {
        why = std::string("ill-conditioned model: ") + e.what();
    }
    if (why.empty()) return true;
    traj.diverged = true;
    traj.diverged_at = t + dt;
    traj.diagnostic = why + " at t=" + std::to_string(traj.diverged_at) + " s";
    return false;
}

}  // namespace detail

inline void validate(const RobotScenario& sc) {
    detail::validate_timing(sc.dt, sc.rho, sc.horizon);
    RobotModel model;
    try {
        model = build_model(sc.model);
    } catch (const ModelError& e) {
        throw ConfigError("model", e.what());
    }
    const int n = model.dof;
    if (sc.q0.size() != n || !sc.q0.allFinite()) throw ConfigError("initial.q_rad", "expected " + std::to_string(n) + " finite entries");
    if (sc.qd0.size() != n || !sc.qd0.allFinite()) {
        throw ConfigError("initial.qd_rad_s", "expected " + std::to_string(n) + " finite entries");
    }
    if (sc.disturbance.dim != n) throw ConfigError("disturbance", "dimension must equal model dof");
    validate(sc.disturbance);
    const ReferenceSpec& r = sc.reference;
    if (r.offset.size() != n) throw ConfigError("reference.offset_rad", "expected " + std::to_string(n) + " entries");
    if (r.kind == ReferenceKind::sinusoid && r.amplitude.size() != n) {
        throw ConfigError("reference.amplitude_rad", "expected " + std::to_string(n) + " entries");
    }
    if (is_tracking(sc.controller)) validate(sc.tracking, n);
    if (is_regulation(sc.controller)) validate(sc.regulation, n);
    if (sc.controller == ControllerKind::tde_pd) {
        if (sc.m_bar.rows() != n || sc.m_bar.cols() != n) throw ConfigError("controller.m_bar", "wrong shape");
        if (Eigen::PartialPivLU<Mat>(sc.m_bar).rcond() <= kMinRcond) {
            throw ConfigError("controller.m_bar", "must be invertible");
        }
        if (sc.estimator == EstimatorKind::oracle) {
            throw ConfigError("controller.estimator", "oracle estimation is undefined for tde_pd (algebraic loop)");
        }
    }
    if (sc.controller == ControllerKind::ph_case3) throw ConfigError("controller.kind", "ph_case3 needs a port-Hamiltonian model");
}

inline void validate(const PhScenario& sc) {
    detail::validate_timing(sc.dt, sc.rho, sc.horizon);
    PHModel model;
    try {
        model = make_ph_pendulum(sc.model);
    } catch (const ModelError& e) {
        throw ConfigError("model", e.what());
    }
    if (sc.x0.size() != model.dim || !sc.x0.allFinite()) throw ConfigError("initial.x", "expected " + std::to_string(model.dim) + " finite entries");
    if (sc.disturbance.dim != model.input_dim) throw ConfigError("disturbance", "dimension must equal input dimension");
    validate(sc.disturbance);
    if (sc.controller == ControllerKind::ph_case3) {
        if (sc.K.rows() != model.input_dim || sc.K.cols() != model.input_dim) throw ConfigError("controller.K", "wrong shape");
        if (!is_positive_definite(sc.K)) throw ConfigError("controller.K", "must be symmetric positive definite");
    } else if (sc.controller != ControllerKind::none) {
        throw ConfigError("controller.kind", std::string(to_string(sc.controller)) + " is not a port-Hamiltonian law");
    }
}

namespace detail {

struct Command {
    Vec tau;
    Vec u;
};

/// Robot control law at (t, state) with the grid-held estimate.
inline Command robot_command(const RobotScenario& sc, const RobotModel& model, const Reference& ref, double t,
                             const RobotState& state, const Vec& held) {
    const int n = model.dof;
    auto lumped = [&](bool with_gravity) {
        Vec v = model.damping_vector(state.q, state.qd) + disturbance_eval(sc.disturbance, t).d;
        if (with_gravity) v += model.gravity_vector(state.q);
        return v;
    };
    auto estimate = [&](bool with_gravity) -> Vec {
        switch (sc.estimator) {
            case EstimatorKind::tde: return held;
            case EstimatorKind::oracle: return lumped(with_gravity);
            case EstimatorKind::zero: return Vec::Zero(n);
        }
        return Vec::Zero(n);
    };
    switch (sc.controller) {
        case ControllerKind::none: return {Vec::Zero(n), {}};
        case ControllerKind::case1: return {case1_torque(model, state, ref, sc.tracking, estimate(false)), {}};
        case ControllerKind::case2: return {case2_torque(model, state, ref, sc.tracking, estimate(true)), {}};
        case ControllerKind::pd_reg_case1:
            return {pd_reg_case1_torque(model, state, ref.q_d(t), sc.regulation, estimate(false)), {}};
        case ControllerKind::pd_reg_case2:
            return {pd_reg_case2_torque(state, ref.q_d(t), sc.regulation, estimate(true)), {}};
        case ControllerKind::tde_pd: {
            Vec u = tde_outer_command(state, ref, sc.tracking);
            const Vec h_hat = sc.estimator == EstimatorKind::tde ? held : Vec::Zero(n);
            return {tde_torque(sc.m_bar, u, h_hat), u};
        }
        case ControllerKind::ph_case3: break;
    }
    throw ConfigError("controller.kind", "unsupported controller for a manipulator");
}

inline Estimate robot_estimate(const RobotScenario& sc, const RobotModel& model, const RobotHistory& buffer,
                               double t) {
    switch (sc.controller) {
        case ControllerKind::case1:
        case ControllerKind::pd_reg_case1: return estimate_d_case1(buffer, model, t, sc.rho, sc.accel_mode);
        case ControllerKind::case2:
        case ControllerKind::pd_reg_case2: return estimate_h_case2(buffer, model, t, sc.rho, sc.accel_mode);
        case ControllerKind::tde_pd: return estimate_h(buffer, sc.m_bar, t, sc.rho, sc.accel_mode);
        default: return {Vec::Zero(model.dof), is_cold_start(buffer, t, sc.rho)};
    }
}

}  // namespace detail

/// Integrates a manipulator scenario. Divergence (non-finite state or state
/// norm above kDivergenceThreshold) ends the run early and is reported on the
/// trajectory rather than thrown.
inline RobotTrajectory simulate(const RobotScenario& sc) {
    validate(sc);
    const RobotModel model = build_model(sc.model);
    const Reference ref = make_reference(sc.reference);
    const int n = model.dof;
    const int delay = delay_steps(sc.rho, sc.dt);
    const auto steps = static_cast<std::int64_t>(std::llround(sc.horizon / sc.dt));

    RobotHistory buffer(sc.dt, RobotHistory::capacity_for(sc.dt, sc.rho));
    RobotTrajectory traj;
    traj.dt = sc.dt;
    traj.records.reserve(static_cast<std::size_t>(steps) + 1);

    Vec x(2 * n);
    x << sc.q0, sc.qd0;

    for (std::int64_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * sc.dt;
        const RobotState state{t, x.head(n), x.tail(n)};
        buffer.push(RobotSample{state.q, state.qd, {}, {}, {}});

        const Estimate est = detail::robot_estimate(sc, model, buffer, t);
        const Vec& held = est.value;
        const detail::Command cmd = detail::robot_command(sc, model, ref, t, state, held);
        const Vec d = disturbance_eval(sc.disturbance, t).d;
        const Vec qdd = forward_dynamics(model, state, cmd.tau, d);
        RobotSample& sample = buffer.back();
        sample.qdd = qdd;
        sample.tau = cmd.tau;
        sample.u = cmd.u;

        RobotRecord rec;
        rec.t = t;
        rec.q = state.q;
        rec.qd = state.qd;
        rec.qdd = qdd;
        rec.tau = cmd.tau;
        rec.u = cmd.u;
        rec.d = d;
        rec.cold_start = k < 2 * delay;
        rec.q_err = state.q - ref.q_d(t);
        const Vec f = model.damping_vector(state.q, state.qd);
        switch (sc.controller) {
            case ControllerKind::case1:
            case ControllerKind::pd_reg_case1:
                rec.estimate = sc.estimator == EstimatorKind::oracle ? Vec(f + d) : held;
                rec.e = rec.estimate - (f + d);
                break;
            case ControllerKind::case2:
            case ControllerKind::pd_reg_case2: {
                const Vec lumped = model.gravity_vector(state.q) + f + d;
                rec.estimate = sc.estimator == EstimatorKind::oracle ? lumped : held;
                rec.e = rec.estimate - lumped;
                break;
            }
            case ControllerKind::tde_pd:
                rec.estimate = held;
                rec.e = tde_error_direct(model, sc.m_bar, state, cmd.tau, d, held);
                if (k >= delay) {
                    const RobotRecord& past = traj.records[static_cast<std::size_t>(k - delay)];
                    const LoopPoint now_pt{state, cmd.u, d, qdd};
                    const LoopPoint past_pt{{past.t, past.q, past.qd}, past.u, past.d, past.qdd};
                    rec.xi_norm = tde_error_decomposition(model, sc.m_bar, now_pt, past_pt, past.e).xi.norm();
                }
                break;
            default: rec.estimate = Vec::Zero(n); break;
        }
        if (is_tracking(sc.controller)) {
            rec.S = sliding_vars(state, ref, sc.tracking).S;
            rec.V = lyapunov_tracking(model, state.q, rec.S);
        } else if (is_regulation(sc.controller)) {
            rec.V = lyapunov_regulation(model, state.q, rec.q_err, state.qd, sc.regulation.Kp);
        } else {
            rec.V = mechanical_energy(model, state);
        }
        traj.records.push_back(std::move(rec));
        if (k == steps) break;

        auto rhs = [&](double ts, const Vec& xs) {
            const RobotState s{ts, xs.head(n), xs.tail(n)};
            const detail::Command c = detail::robot_command(sc, model, ref, ts, s, held);
            Vec dx(2 * n);
            dx << s.qd, forward_dynamics(model, s, c.tau, disturbance_eval(sc.disturbance, ts).d);
            return dx;
        };
        if (!detail::advance(rhs, t, x, sc.dt, traj)) break;
    }
    return traj;
}

/// Integrates a port-Hamiltonian scenario; same grid and hold conventions.
inline PhTrajectory simulate_ph(const PhScenario& sc) {
    validate(sc);
    const PHModel model = make_ph_pendulum(sc.model);
    const int m = model.input_dim;
    const int delay = delay_steps(sc.rho, sc.dt);
    const auto steps = static_cast<std::int64_t>(std::llround(sc.horizon / sc.dt));

    PhHistory buffer(sc.dt, PhHistory::capacity_for(sc.dt, sc.rho));
    PhTrajectory traj;
    traj.dt = sc.dt;
    traj.records.reserve(static_cast<std::size_t>(steps) + 1);

    auto control = [&](double t, const Vec& x, const Vec& held) -> Vec {
        if (sc.controller == ControllerKind::none) return Vec::Zero(m);
        Vec d_hat = Vec::Zero(m);
        if (sc.estimator == EstimatorKind::tde) d_hat = held;
        if (sc.estimator == EstimatorKind::oracle) d_hat = disturbance_eval(sc.disturbance, t).d;
        return ph_case3_control(model, x, sc.K, d_hat);
    };

    Vec x = sc.x0;
    for (std::int64_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * sc.dt;
        buffer.push(PhSample{x, {}, {}});
        const Estimate est = ph_estimate_d(model, buffer, t, sc.rho);
        const Vec held = sc.estimator == EstimatorKind::tde ? est.value : Vec::Zero(m);
        const Vec u = control(t, x, held);
        const Vec d = disturbance_eval(sc.disturbance, t).d;
        const Vec xdot = ph_vector_field(model, x, u, d);
        PhSample& sample = buffer.back();
        sample.xdot = xdot;
        sample.u = u;

        PhRecord rec;
        rec.t = t;
        rec.x = x;
        rec.xdot = xdot;
        rec.u = u;
        rec.d = d;
        rec.estimate = sc.estimator == EstimatorKind::oracle ? d : held;
        rec.H = model.hamiltonian(x);
        rec.cold_start = k < 2 * delay;
        traj.records.push_back(std::move(rec));
        if (k == steps) break;

        auto rhs = [&](double ts, const Vec& xs) {
            return ph_vector_field(model, xs, control(ts, xs, held), disturbance_eval(sc.disturbance, ts).d);
        };
        if (!detail::advance(rhs, t, x, sc.dt, traj)) break;
    }
    return traj;
}

}  // namespace tdelab
