#pragma once

// Control laws.
//
// Tracking (known M, C):
//     tau = M nu_dot + C nu + g - K S + d_hat        (case 1, d_hat ~ f + d)
//     tau = M nu_dot + C nu     - K S + h_hat        (case 2, h_hat ~ g + f + d)
// with nu = qd_d - Gamma q_err and S = qd - nu.
// Regulation (no M, C):
//     tau = -Kp q_err - Kd qd + g + d_hat            (case 1)
//     tau = -Kp q_err - Kd qd + h_hat                (case 2)
// Generic TDE loop: tau = Mbar u + h_hat with outer command u = nu_dot - K S.
// Port-Hamiltonian: u = -K G^T grad H + d_hat.
// Super-twisting closed loops, as an abstract 2n-state system, in the
// published (disturbance rate in the integral channel) and corrected
// (disturbance in the sliding channel) forms.

#include <cmath>
#include <string>

#include "tdelab/dynamics.hpp"
#include "tdelab/errors.hpp"
#include "tdelab/history.hpp"
#include "tdelab/linalg.hpp"
#include "tdelab/signals.hpp"
#include "tdelab/tde.hpp"

namespace tdelab {

struct TrackingGains {
    Mat K;
    Mat Gamma;
    double beta = 0.0;  // Lyapunov margin, 0 < beta < lambda_min(K)
};

struct RegulationGains {
    Mat Kp;
    Mat Kd;
};

/// Diagonal super-twisting gains, stored as their diagonals.
struct StGains {
    Vec k1;
    Vec k2;
};

inline void validate(const TrackingGains& g, int n, const std::string& field = "controller") {
    if (g.K.rows() != n || g.K.cols() != n) throw ConfigError(field + ".K", "expected " + std::to_string(n) + "x" + std::to_string(n));
    if (g.Gamma.rows() != n || g.Gamma.cols() != n) {
        throw ConfigError(field + ".Gamma", "expected " + std::to_string(n) + "x" + std::to_string(n));
    }
    if (!is_positive_definite(g.K)) throw ConfigError(field + ".K", "must be symmetric positive definite");
    if (!is_positive_definite(g.Gamma)) throw ConfigError(field + ".Gamma", "must be symmetric positive definite");
    if (!(g.beta > 0.0) || !(g.beta < lambda_min(g.K))) {
        throw ConfigError(field + ".beta", "must satisfy 0 < beta < lambda_min(K)");
    }
}

inline void validate(const RegulationGains& g, int n, const std::string& field = "controller") {
    if (g.Kp.rows() != n || g.Kp.cols() != n) throw ConfigError(field + ".Kp", "wrong shape");
    if (g.Kd.rows() != n || g.Kd.cols() != n) throw ConfigError(field + ".Kd", "wrong shape");
    if (!is_positive_definite(g.Kp)) throw ConfigError(field + ".Kp", "must be symmetric positive definite");
    if (!is_positive_definite(g.Kd)) throw ConfigError(field + ".Kd", "must be symmetric positive definite");
}

inline void validate(const StGains& g, int n, const std::string& field = "gains") {
    if (g.k1.size() != n || g.k2.size() != n) throw ConfigError(field, "expected " + std::to_string(n) + " channels");
    if (!(g.k1.minCoeff() > 0.0)) throw ConfigError(field + ".K1", "must be positive");
    if (!(g.k2.minCoeff() > 0.0)) throw ConfigError(field + ".K2", "must be positive");
}

/// beta defaults to a tenth of lambda_min(K).
inline TrackingGains tracking_gains(Mat K, Mat Gamma) {
    const double beta = 0.1 * lambda_min(K);
    return {std::move(K), std::move(Gamma), beta};
}

// ---------------------------------------------------------------------------
// Manipulator laws

struct SlidingVars {
    Vec q_err;   // q - q_d
    Vec nu;      // qd_d - Gamma q_err
    Vec nu_dot;  // qdd_d - Gamma (qd - qd_d)
    Vec S;       // qd - nu
};

inline SlidingVars sliding_vars(const RobotState& state, const Reference& ref, const TrackingGains& gains) {
    const Vec qd_ref = ref.qd_d(state.t);
    SlidingVars v;
    v.q_err = state.q - ref.q_d(state.t);
    v.nu = qd_ref - gains.Gamma * v.q_err;
    v.nu_dot = ref.qdd_d(state.t) - gains.Gamma * (state.qd - qd_ref);
    v.S = state.qd - v.nu;
    return v;
}

inline Vec case1_torque(const RobotModel& model, const RobotState& state, const Reference& ref,
                        const TrackingGains& gains, const Vec& d_hat) {
    const SlidingVars v = sliding_vars(state, ref, gains);
    const DynamicsTerms t = eval_terms(model, state);
    return t.M * v.nu_dot + t.C * v.nu + t.g - gains.K * v.S + d_hat;
}

inline Vec case2_torque(const RobotModel& model, const RobotState& state, const Reference& ref,
                        const TrackingGains& gains, const Vec& h_hat) {
    const SlidingVars v = sliding_vars(state, ref, gains);
    const Mat M = model.mass_matrix(state.q);
    const Mat C = model.coriolis_matrix(state.q, state.qd);
    return M * v.nu_dot + C * v.nu - gains.K * v.S + h_hat;
}

inline Vec pd_reg_case1_torque(const RobotModel& model, const RobotState& state, const Vec& q_d,
                               const RegulationGains& gains, const Vec& d_hat) {
    return -gains.Kp * (state.q - q_d) - gains.Kd * state.qd + model.gravity_vector(state.q) + d_hat;
}

inline Vec pd_reg_case2_torque(const RobotState& state, const Vec& q_d, const RegulationGains& gains,
                               const Vec& h_hat) {
    return -gains.Kp * (state.q - q_d) - gains.Kd * state.qd + h_hat;
}

/// Outer-loop command of the generic TDE loop.
inline Vec tde_outer_command(const RobotState& state, const Reference& ref, const TrackingGains& gains) {
    const SlidingVars v = sliding_vars(state, ref, gains);
    return v.nu_dot - gains.K * v.S;
}

inline Vec tde_torque(const Mat& m_bar, const Vec& u, const Vec& h_hat) { return m_bar * u + h_hat; }

// ---------------------------------------------------------------------------
// Super-twisting closed loops

struct StRate {
    Vec s_dot;
    Vec omega_dot;
};

/// |s_i|^{1/2} sign(s_i), with sign(0) = 0.
inline Vec st_root_sign(const Vec& s) {
    Vec out(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) out(i) = std::sqrt(std::abs(s(i))) * sgn(s(i));
    return out;
}

inline Vec sign_vec(const Vec& s) {
    Vec out(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) out(i) = sgn(s(i));
    return out;
}

/// Published form: s_dot = -K1 Lambda(s) sign(s) + Omega, Omega_dot = -K2 sign(s) + e_dot.
inline StRate st_claimed_rhs(const Vec& s, const Vec& omega, const StGains& gains, const Vec& e_dot) {
    return {Vec(-gains.k1.cwiseProduct(st_root_sign(s)) + omega),
            Vec(-gains.k2.cwiseProduct(sign_vec(s)) + e_dot)};
}

/// Corrected form: s_dot = -K1 Lambda(s) sign(s) + Omega + e, Omega_dot = -K2 sign(s).
inline StRate st_corrected_rhs(const Vec& s, const Vec& omega, const StGains& gains, const Vec& e) {
    return {Vec(-gains.k1.cwiseProduct(st_root_sign(s)) + omega + e), Vec(-gains.k2.cwiseProduct(sign_vec(s)))};
}

// ---------------------------------------------------------------------------
// Port-Hamiltonian disturbance rejection

namespace detail {

inline void require_full_column_rank(const Mat& G) {
    Eigen::ColPivHouseholderQR<Mat> qr(G);
    if (qr.rank() < G.cols()) throw ConditioningError("input map is rank deficient");
}

}  // namespace detail

/// u = -K G^T grad H + d_hat.
inline Vec ph_case3_control(const PHModel& model, const Vec& x, const Mat& K, const Vec& d_hat) {
    const Mat G = model.input_map(x);
    detail::require_full_column_rank(G);
    if (K.rows() != model.input_dim || K.cols() != model.input_dim || d_hat.size() != model.input_dim) {
        throw DimensionError("case-3 gain/estimate dimension mismatch");
    }
    return -K * (G.transpose() * model.grad_h(x)) + d_hat;
}

struct PhSample {
    Vec x;
    Vec xdot;  // exact vector field at the grid point
    Vec u;
};

using PhHistory = HistoryBuffer<PhSample>;

/// d_hat(t) = G^+(t - rho) (-xdot(t - rho) + [J - R](t - rho) grad H(t - rho)) + u(t - rho).
inline Estimate ph_estimate_d(const PHModel& model, const PhHistory& buffer, double t, double rho) {
    delay_steps(rho, buffer.dt());
    if (is_cold_start(buffer, t, rho)) return {Vec::Zero(model.input_dim), true};
    const PhSample& past = buffer.at(t - rho);
    const Mat g_pinv = left_pseudo_inverse(model.input_map(past.x));
    const Vec drift = (model.interconnection(past.x) - model.damping(past.x)) * model.grad_h(past.x);
    return {g_pinv * (drift - past.xdot) + past.u, false};
}

}  // namespace tdelab
