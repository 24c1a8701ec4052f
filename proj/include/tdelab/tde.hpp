#pragma once

// Time-delay estimation of lumped dynamics and the algebra of its error.
//
// The estimator reuses the torque and acceleration one delay rho in the past:
//     h_hat(t) = tau(t - rho) - Mbar qdd(t - rho)
// and the error e = Mbar^{-1}(h_hat - h) obeys the delay recursion
//     e(t) = D e(t - rho) + xi,   D = I - M^{-1}(t) Mbar.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "tdelab/dynamics.hpp"
#include "tdelab/history.hpp"
#include "tdelab/linalg.hpp"

namespace tdelab {

enum class AccelMode { exact, second_difference };

inline const char* to_string(AccelMode m) { return m == AccelMode::exact ? "exact" : "second_difference"; }

/// One grid sample of a closed-loop robot run.
struct RobotSample {
    Vec q;
    Vec qd;
    Vec qdd;  // exact model acceleration at the grid point
    Vec tau;
    Vec u;    // outer-loop command (tde_pd only; empty otherwise)
};

using RobotHistory = HistoryBuffer<RobotSample>;

/// Estimator output. While `cold_start` is set the value is the zero vector.
struct Estimate {
    Vec value;
    bool cold_start = false;
};

/// Estimators report cold start until 2 rho of history exists.
template <class Sample>
bool is_cold_start(const HistoryBuffer<Sample>& buffer, double t, double rho) {
    const double elapsed = t - buffer.t0();
    return elapsed < 2.0 * rho - 1e-9 * buffer.dt() || !buffer.contains(t - rho);
}

/// (q(t) - 2 q(t - rho) + q(t - 2 rho)) / rho^2, or nullopt when the history
/// does not reach back to t - 2 rho.
inline std::optional<Vec> second_difference_accel(const RobotHistory& buffer, double t, double rho) {
    delay_steps(rho, buffer.dt());
    if (!buffer.contains(t) || !buffer.contains(t - rho) || !buffer.contains(t - 2.0 * rho)) return std::nullopt;
    const Vec& q0 = buffer.at(t).q;
    const Vec& q1 = buffer.at(t - rho).q;
    const Vec& q2 = buffer.at(t - 2.0 * rho).q;
    return Vec((q0 - 2.0 * q1 + q2) / (rho * rho));
}

/// qdd(t - rho) per the selected mode.
inline std::optional<Vec> delayed_accel(const RobotHistory& buffer, double t, double rho, AccelMode mode) {
    if (mode == AccelMode::second_difference) return second_difference_accel(buffer, t, rho);
    if (!buffer.contains(t - rho)) return std::nullopt;
    return buffer.at(t - rho).qdd;
}

namespace detail {

inline Estimate cold(int n) { return {Vec::Zero(n), true}; }

}  // namespace detail

/// Generic TDE: h_hat(t) = tau(t - rho) - Mbar qdd(t - rho).
inline Estimate estimate_h(const RobotHistory& buffer, const Mat& m_bar, double t, double rho,
                           AccelMode mode = AccelMode::exact) {
    delay_steps(rho, buffer.dt());
    const int n = static_cast<int>(m_bar.rows());
    if (is_cold_start(buffer, t, rho)) return detail::cold(n);
    const auto acc = delayed_accel(buffer, t, rho, mode);
    if (!acc) return detail::cold(n);
    const RobotSample& past = buffer.at(t - rho);
    return {past.tau - m_bar * *acc, false};
}

/// Known-model estimate of the lumped disturbance f + d one delay ago:
/// tau - M qdd - C qd - g, all at t - rho.
inline Estimate estimate_d_case1(const RobotHistory& buffer, const RobotModel& model, double t, double rho,
                                 AccelMode mode = AccelMode::exact) {
    delay_steps(rho, buffer.dt());
    if (is_cold_start(buffer, t, rho)) return detail::cold(model.dof);
    const auto acc = delayed_accel(buffer, t, rho, mode);
    if (!acc) return detail::cold(model.dof);
    const RobotSample& past = buffer.at(t - rho);
    const Vec& q = past.q;
    const Vec& qd = past.qd;
    return {past.tau - model.mass_matrix(q) * *acc - model.coriolis_matrix(q, qd) * qd - model.gravity_vector(q),
            false};
}

/// Gravity-free variant: tau - M qdd - C qd at t - rho, reconstructing g + f + d.
inline Estimate estimate_h_case2(const RobotHistory& buffer, const RobotModel& model, double t, double rho,
                                 AccelMode mode = AccelMode::exact) {
    delay_steps(rho, buffer.dt());
    if (is_cold_start(buffer, t, rho)) return detail::cold(model.dof);
    const auto acc = delayed_accel(buffer, t, rho, mode);
    if (!acc) return detail::cold(model.dof);
    const RobotSample& past = buffer.at(t - rho);
    const Vec& q = past.q;
    const Vec& qd = past.qd;
    return {past.tau - model.mass_matrix(q) * *acc - model.coriolis_matrix(q, qd) * qd, false};
}

/// True lumped term h = (M - Mbar) qdd + C qd + g + f + d for an applied torque.
inline Vec lumped_h(const RobotModel& model, const Mat& m_bar, const RobotState& state, const Vec& tau,
                    const Vec& d) {
    const DynamicsTerms terms = eval_terms(model, state);
    const Vec qdd = forward_dynamics(model, state, tau, d);
    return (terms.M - m_bar) * qdd + terms.C * state.qd + terms.g + terms.f + d;
}

/// e = Mbar^{-1}(h_hat - h), with h from the full model.
inline Vec tde_error_direct(const RobotModel& model, const Mat& m_bar, const RobotState& state, const Vec& tau,
                            const Vec& d, const Vec& h_hat) {
    const Vec h = lumped_h(model, m_bar, state, tau, d);
    return solve_checked(m_bar, h_hat - h, "Mbar");
}

/// N = d + f + g + C qd.
inline Vec nonlinear_terms(const RobotModel& model, const RobotState& state, const Vec& d) {
    const DynamicsTerms terms = eval_terms(model, state);
    return d + terms.f + terms.g + terms.C * state.qd;
}

/// Quantities of the closed loop at one grid time, as needed by the decomposition.
struct LoopPoint {
    RobotState state;
    Vec u;
    Vec d;
    Vec qdd;  // required for the delayed point only
};

struct TdeErrorDecomposition {
    Vec e;       // D e_prev + xi
    Mat D;
    Vec xi;
    Vec e_prev;
    Mat m_inv;   // M^{-1}(t)
    Mat m_bar;
};

/// D = I - M^{-1}(t) Mbar,
/// xi = -D (u - u(t-rho)) + M^{-1} [(M(t-rho) - M) qdd(t-rho) + N(t-rho) - N(t)].
/// The minus sign on the first term is what makes e = D e(t-rho) + xi an
/// identity of the closed loop (expand M e = tau - N - M u with the delayed
/// estimate and substitute qdd(t-rho) = e(t-rho) + u(t-rho)).
inline TdeErrorDecomposition tde_error_decomposition(const RobotModel& model, const Mat& m_bar,
                                                     const LoopPoint& now, const LoopPoint& past,
                                                     const Vec& e_prev) {
    const int n = model.dof;
    if (m_bar.rows() != n || m_bar.cols() != n || e_prev.size() != n || past.qdd.size() != n) {
        throw DimensionError("TDE decomposition: dimension mismatch");
    }
    const Mat M = model.mass_matrix(now.state.q);
    const Mat M_past = model.mass_matrix(past.state.q);
    TdeErrorDecomposition out;
    out.m_inv = inverse_checked(M, "mass matrix");
    out.m_bar = m_bar;
    out.D = Mat::Identity(n, n) - out.m_inv * m_bar;
    const Vec coupling = (M_past - M) * past.qdd + nonlinear_terms(model, past.state, past.d) -
                         nonlinear_terms(model, now.state, now.d);
    out.xi = -out.D * (now.u - past.u) + out.m_inv * coupling;
    out.e_prev = e_prev;
    out.e = out.D * e_prev + out.xi;
    return out;
}

struct DerivativeBound {
    double bound = 0.0;              // (||M^{-1}|| ||Mbar|| ||e(t-rho)|| + ||xi||) / rho
    double finite_difference = 0.0;  // ||(e(t) - e(t-rho)) / rho||
};

/// Spectral-norm bound on the TDE-error rate next to its finite-difference value.
inline DerivativeBound tde_error_derivative_bound(const TdeErrorDecomposition& dec, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("delay must be positive");
    DerivativeBound out;
    out.bound = (spectral_norm(dec.m_inv) * spectral_norm(dec.m_bar) * dec.e_prev.norm() + dec.xi.norm()) / rho;
    out.finite_difference = ((dec.e - dec.e_prev) / rho).norm();
    return out;
}

struct DVariation {
    std::vector<Mat> D;
    double max_pairwise_deviation = 0.0;  // max_{i,j} ||D(q_i) - D(q_j)||_2
    std::vector<double> spectral_radii;
};

/// D(q) = I - M(q)^{-1} Mbar over configuration samples.
inline DVariation d_variation_probe(const RobotModel& model, const Mat& m_bar, const std::vector<Vec>& q_samples) {
    if (q_samples.size() < 2) throw std::invalid_argument("d_variation_probe needs at least two samples");
    DVariation out;
    const int n = model.dof;
    for (const Vec& q : q_samples) {
        Mat D = Mat::Identity(n, n) - inverse_checked(model.mass_matrix(q), "mass matrix") * m_bar;
        out.spectral_radii.push_back(spectral_radius(D));
        out.D.push_back(std::move(D));
    }
    for (std::size_t i = 0; i < out.D.size(); ++i) {
        for (std::size_t j = i + 1; j < out.D.size(); ++j) {
            out.max_pairwise_deviation = std::max(out.max_pairwise_deviation, spectral_norm(out.D[i] - out.D[j]));
        }
    }
    return out;
}

/// ||xi|| for a constant-velocity motion through q0 with velocity v over one
/// delay (u and qdd zero, d zero). Isolates how xi scales with the state.
inline double constant_velocity_xi(const RobotModel& model, const Mat& m_bar, const Vec& q0, const Vec& v,
                                   double rho) {
    const int n = model.dof;
    LoopPoint past{{0.0, q0, v}, Vec::Zero(n), Vec::Zero(n), Vec::Zero(n)};
    LoopPoint now{{rho, q0 + rho * v, v}, Vec::Zero(n), Vec::Zero(n), Vec::Zero(n)};
    return tde_error_decomposition(model, m_bar, now, past, Vec::Zero(n)).xi.norm();
}

}  // namespace tdelab
