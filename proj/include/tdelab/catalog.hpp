#pragma once

// Built-in scenarios. The JSON files under scenarios/ are exported from here.

#include <string>
#include <utility>
#include <vector>

#include "tdelab/errors.hpp"
#include "tdelab/sim.hpp"

namespace tdelab {

namespace catalog {

inline Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

inline Mat diag2(double a, double b) { return vec2(a, b).asDiagonal(); }

/// Two-link arm tracking a smooth sinusoid from rest at the origin.
inline RobotScenario two_link_tracking(std::string id, ControllerKind controller) {
    RobotScenario sc;
    sc.id = std::move(id);
    sc.model.kind = RobotModelKind::two_link;
    sc.controller = controller;
    sc.tracking = tracking_gains(diag2(20, 20), diag2(5, 5));
    sc.reference.kind = ReferenceKind::sinusoid;
    sc.reference.offset = vec2(0.3, 0.3);
    sc.reference.amplitude = vec2(0.5, 0.5);
    sc.reference.frequency = 1.0;
    sc.q0 = Vec::Zero(2);
    sc.qd0 = Vec::Zero(2);
    sc.dt = 1e-3;
    sc.rho = 1e-2;
    sc.horizon = 30.0;
    return sc;
}

/// Two-link arm regulated to a fixed set point from rest at the origin.
inline RobotScenario two_link_regulation(std::string id, ControllerKind controller) {
    RobotScenario sc;
    sc.id = std::move(id);
    sc.model.kind = RobotModelKind::two_link;
    sc.controller = controller;
    sc.regulation.Kp = diag2(25, 25);
    sc.regulation.Kd = diag2(10, 10);
    sc.reference = {ReferenceKind::set_point, vec2(0.5, -0.3), {}, 0.0, 0.0};
    sc.q0 = Vec::Zero(2);
    sc.qd0 = Vec::Zero(2);
    sc.horizon = 30.0;
    return sc;
}

inline PhScenario ph_pendulum(std::string id) {
    PhScenario sc;
    sc.id = std::move(id);
    sc.controller = ControllerKind::ph_case3;
    sc.K = Mat::Constant(1, 1, 5.0);
    sc.x0 = vec2(1.0, 0.0);
    sc.horizon = 20.0;
    return sc;
}

inline Vec sinusoid_amplitude() { return vec2(1.0, 0.5); }
inline constexpr double kSinusoidFreq = 2.0;

inline Scenario case1_constant_d() {
    RobotScenario sc = two_link_tracking("case1_constant_d", ControllerKind::case1);
    sc.disturbance = constant_disturbance(vec2(1.0, 0.5));
    sc.check.kind = CheckKind::asymptotic;
    sc.check.after_s = 20.0;
    sc.check.tolerance = 1e-6;
    return sc;
}

inline Scenario case1_sinusoid_d() {
    RobotScenario sc = two_link_tracking("case1_sinusoid_d", ControllerKind::case1);
    sc.disturbance = sinusoid_disturbance(sinusoid_amplitude(), kSinusoidFreq);
    sc.check.kind = CheckKind::case1_bound;
    return sc;
}

inline Scenario case2_sinusoid_d() {
    RobotScenario sc = two_link_tracking("case2_sinusoid_d", ControllerKind::case2);
    sc.disturbance = sinusoid_disturbance(sinusoid_amplitude(), kSinusoidFreq);
    sc.check.kind = CheckKind::case2_bound;
    return sc;
}

inline Scenario pd_reg_case1_sinusoid_d() {
    RobotScenario sc = two_link_regulation("pd_reg_case1_sinusoid_d", ControllerKind::pd_reg_case1);
    sc.disturbance = sinusoid_disturbance(sinusoid_amplitude(), kSinusoidFreq);
    sc.check.kind = CheckKind::regulation_bound;
    return sc;
}

inline Scenario pd_reg_case2_sinusoid_d() {
    RobotScenario sc = two_link_regulation("pd_reg_case2_sinusoid_d", ControllerKind::pd_reg_case2);
    sc.disturbance = sinusoid_disturbance(sinusoid_amplitude(), kSinusoidFreq);
    sc.check.kind = CheckKind::regulation_bound;
    return sc;
}

/// Gravity switched off (kappa = 0): the lumped term is constant at rest.
inline Scenario pd_reg_case2_constant_d_no_gravity() {
    RobotScenario sc = two_link_regulation("pd_reg_case2_constant_d_no_gravity", ControllerKind::pd_reg_case2);
    sc.model.two_link.gravity = 0.0;
    sc.disturbance = constant_disturbance(vec2(1.0, 0.5));
    sc.check.kind = CheckKind::asymptotic;
    sc.check.after_s = 20.0;
    sc.check.tolerance = 1e-6;
    return sc;
}

inline Scenario ph_case3_constant_d() {
    PhScenario sc = ph_pendulum("ph_case3_constant_d");
    sc.disturbance = constant_disturbance(Vec::Constant(1, 0.5));
    sc.check.kind = CheckKind::asymptotic;
    sc.check.after_s = 15.0;
    sc.check.tolerance = 1e-6;
    return sc;
}

inline Scenario ph_case3_sinusoid_d() {
    PhScenario sc = ph_pendulum("ph_case3_sinusoid_d");
    sc.disturbance = sinusoid_disturbance(Vec::Constant(1, 0.5), 1.0);
    sc.check.kind = CheckKind::ph_decay;
    return sc;
}

/// Inner/outer TDE loop; the run's records feed the error-recursion audit.
inline Scenario tde_pd_two_link() {
    RobotScenario sc = two_link_tracking("tde_pd_two_link", ControllerKind::tde_pd);
    sc.m_bar = diag2(0.3, 0.3);
    sc.disturbance = sinusoid_disturbance(sinusoid_amplitude(), kSinusoidFreq);
    sc.horizon = 10.0;
    sc.check.kind = CheckKind::tde_identity;
    sc.check.tolerance = 1e-8;
    return sc;
}

inline Scenario passive_pendulum() {
    RobotScenario sc;
    sc.id = "passive_pendulum";
    sc.model.kind = RobotModelKind::pendulum;
    sc.controller = ControllerKind::none;
    sc.disturbance = zero_disturbance(1);
    sc.reference = {ReferenceKind::set_point, Vec::Zero(1), {}, 0.0, 0.0};
    sc.q0 = Vec::Constant(1, 1.0);
    sc.qd0 = Vec::Zero(1);
    sc.horizon = 10.0;
    sc.check.kind = CheckKind::energy;
    sc.check.tolerance = 1e-6;
    return sc;
}

/// Smooth closed loop (exact disturbance feedforward) for integrator order checks.
inline Scenario rk4_order_probe() {
    RobotScenario sc = two_link_tracking("rk4_order_probe", ControllerKind::case1);
    sc.estimator = EstimatorKind::oracle;
    sc.disturbance = sinusoid_disturbance(sinusoid_amplitude(), kSinusoidFreq);
    sc.q0 = vec2(0.2, -0.1);
    sc.dt = 1e-2;
    sc.rho = 1e-2;
    sc.horizon = 2.0;
    return sc;
}

struct Entry {
    const char* name;
    const char* description;
    Scenario (*make)();
};

inline const std::vector<Entry>& entries() {
    static const std::vector<Entry> all = {
        {"case1_constant_d", "Case 1 tracking, constant disturbance: asymptotic S -> 0", case1_constant_d},
        {"case1_sinusoid_d", "Case 1 tracking, sinusoidal disturbance: ultimate bound", case1_sinusoid_d},
        {"case2_sinusoid_d", "Case 2 tracking (gravity estimated), sinusoidal disturbance", case2_sinusoid_d},
        {"pd_reg_case1_sinusoid_d", "PD regulation with gravity compensation, sinusoidal disturbance",
         pd_reg_case1_sinusoid_d},
        {"pd_reg_case2_sinusoid_d", "PD regulation, gravity estimated, sinusoidal disturbance", pd_reg_case2_sinusoid_d},
        {"pd_reg_case2_constant_d_no_gravity", "PD regulation without gravity, constant disturbance: asymptotic",
         pd_reg_case2_constant_d_no_gravity},
        {"ph_case3_constant_d", "Port-Hamiltonian pendulum, constant disturbance: x -> x*", ph_case3_constant_d},
        {"ph_case3_sinusoid_d", "Port-Hamiltonian pendulum, sinusoidal disturbance: H-dot inequality",
         ph_case3_sinusoid_d},
        {"tde_pd_two_link", "Inner/outer TDE loop: error recursion and closed-loop identity", tde_pd_two_link},
        {"passive_pendulum", "Uncontrolled damped pendulum: energy balance", passive_pendulum},
        {"rk4_order_probe", "Smooth closed loop used for integrator order checks", rk4_order_probe},
    };
    return all;
}

}  // namespace catalog

inline std::vector<std::string> builtin_scenario_names() {
    std::vector<std::string> out;
    for (const auto& e : catalog::entries()) out.emplace_back(e.name);
    return out;
}

inline Scenario builtin_scenario(const std::string& name) {
    for (const auto& e : catalog::entries()) {
        if (name == e.name) return e.make();
    }
    throw ConfigError("scenario", "unknown built-in scenario '" + name + "'");
}

inline std::vector<Scenario> builtin_scenarios() {
    std::vector<Scenario> out;
    for (const auto& e : catalog::entries()) out.push_back(e.make());
    return out;
}

}  // namespace tdelab
