#pragma once

// Lyapunov functions, ultimate bounds and definiteness probes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tdelab/controllers.hpp"
#include "tdelab/dynamics.hpp"
#include "tdelab/errors.hpp"
#include "tdelab/linalg.hpp"
#include "tdelab/trajectory.hpp"

namespace tdelab {

/// Theory-vs-simulation verdict for one ultimate bound.
struct BoundReport {
    double theoretical_bound = 0.0;
    double observed_steady_max = 0.0;
    /// First time after which the signal stays within the bound; empty if it never settles.
    std::optional<double> settle_time;
    bool satisfied = false;
    double margin_ratio = 0.0;  // observed / theoretical
};

/// V = 1/2 S^T M(q) S.
inline double lyapunov_tracking(const RobotModel& model, const Vec& q, const Vec& S) {
    return 0.5 * S.dot(model.mass_matrix(q) * S);
}

/// V = 1/2 qd^T M(q) qd + 1/2 q_err^T Kp q_err.
inline double lyapunov_regulation(const RobotModel& model, const Vec& q, const Vec& q_err, const Vec& qd,
                                  const Mat& Kp) {
    return 0.5 * qd.dot(model.mass_matrix(q) * qd) + 0.5 * q_err.dot(Kp * q_err);
}

/// Second-order derivative of uniformly sampled values: central differences in
/// the interior, three-point one-sided stencils at the ends.
inline std::vector<double> numeric_vdot(std::span<const double> v, double dt) {
    if (v.size() < 3) throw std::invalid_argument("numeric_vdot needs at least 3 samples");
    if (!(dt > 0.0)) throw std::invalid_argument("numeric_vdot needs a positive step");
    const std::size_t n = v.size();
    std::vector<double> out(n);
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt);
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (v[i + 1] - v[i - 1]) / (2.0 * dt);
    out[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dt);
    return out;
}

namespace detail {

inline void check_margin(double lambda_min_m, double lambda_max_m, double lambda_min_k, double beta) {
    if (!(lambda_min_m > 0.0) || !(lambda_max_m >= lambda_min_m)) {
        throw InvalidMarginError("inertia eigenvalue extremes must satisfy 0 < lambda_min <= lambda_max");
    }
    if (!(beta > 0.0) || !(beta < lambda_min_k)) {
        throw InvalidMarginError("beta must satisfy 0 < beta < lambda_min(K)");
    }
}

}  // namespace detail

/// sqrt(lambda_max(M)/lambda_min(M)) * rho eps / (lambda_min(K) - beta).
inline double ultimate_bound_case1(double lambda_min_m, double lambda_max_m, double lambda_min_k, double rho,
                                   double eps, double beta) {
    detail::check_margin(lambda_min_m, lambda_max_m, lambda_min_k, beta);
    return std::sqrt(lambda_max_m / lambda_min_m) * rho * eps / (lambda_min_k - beta);
}

/// sqrt(lambda_max(M)/lambda_min(M)) * (2 kappa + rho eps) / (lambda_min(K) - beta).
inline double ultimate_bound_case2(double lambda_min_m, double lambda_max_m, double lambda_min_k, double rho,
                                   double eps, double kappa, double beta) {
    detail::check_margin(lambda_min_m, lambda_max_m, lambda_min_k, beta);
    if (!(kappa >= 0.0)) throw InvalidMarginError("kappa must be non-negative");
    return std::sqrt(lambda_max_m / lambda_min_m) * (2.0 * kappa + rho * eps) / (lambda_min_k - beta);
}

/// Maximum of `values` over samples with t >= t_first + settle_fraction (t_last - t_first),
/// skipping samples flagged in `excluded` (if given).
inline double steady_state_max(std::span<const double> times, std::span<const double> values,
                               double settle_fraction, std::span<const char> excluded = {}) {
    if (times.size() != values.size() || times.empty()) throw std::invalid_argument("steady_state_max: bad series");
    if (!(settle_fraction >= 0.0) || !(settle_fraction < 1.0)) {
        throw std::invalid_argument("settle_fraction must lie in [0, 1)");
    }
    const double start = times.front() + settle_fraction * (times.back() - times.front());
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < start - 1e-12 * std::max(1.0, std::abs(start))) continue;
        if (!excluded.empty() && excluded[i]) continue;
        best = std::max(best, values[i]);
        any = true;
    }
    if (!any) throw std::invalid_argument("steady_state_max: empty settle window");
    return best;
}

/// Builds a BoundReport from a signal series and its theoretical bound.
inline BoundReport make_bound_report(std::span<const double> times, std::span<const double> values, double bound,
                                     double settle_fraction, std::span<const char> excluded = {}) {
    BoundReport r;
    r.theoretical_bound = bound;
    r.observed_steady_max = steady_state_max(times, values, settle_fraction, excluded);
    r.satisfied = r.observed_steady_max <= bound;
    r.margin_ratio = bound > 0.0 ? r.observed_steady_max / bound
                                 : (r.observed_steady_max <= 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    std::size_t last_violation = times.size();
    for (std::size_t i = times.size(); i-- > 0;) {
        if (!excluded.empty() && excluded[i]) continue;
        if (values[i] > bound) {
            last_violation = i;
            break;
        }
    }
    if (last_violation == times.size()) {
        r.settle_time = times.front();
    } else if (last_violation + 1 < times.size()) {
        r.settle_time = times[last_violation + 1];
    }
    return r;
}

// ---------------------------------------------------------------------------
// Super-twisting definiteness probe

enum class StMode { claimed, corrected };

/// Exogenous signal fed into the super-twisting loop: e_dot for the claimed
/// form, e for the corrected form.
struct StInjection {
    enum class Kind { zero, constant, sinusoid } kind = Kind::zero;
    Vec value;               // constant value or sinusoid amplitude
    double frequency = 0.0;  // rad/s

    Vec at(double t, int n) const {
        switch (kind) {
            case Kind::zero: return Vec::Zero(n);
            case Kind::constant: return value;
            case Kind::sinusoid: return value * std::sin(frequency * t);
        }
        return Vec::Zero(n);
    }
};

/// Per channel P = 1/2 [[4 K2 + K1^2, -K1], [-K1, 2]], laid out for eta = [z; Omega]
/// with z = |s|^{1/2} sign(s).
inline Mat default_st_lyapunov_matrix(const StGains& gains) {
    const int n = static_cast<int>(gains.k1.size());
    Mat P = Mat::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        P(i, i) = 0.5 * (4.0 * gains.k2(i) + gains.k1(i) * gains.k1(i));
        P(i, n + i) = P(n + i, i) = -0.5 * gains.k1(i);
        P(n + i, n + i) = 1.0;
    }
    return P;
}

enum class StVerdict { negative_definite_band, sign_indefinite, positive };

inline const char* to_string(StVerdict v) {
    switch (v) {
        case StVerdict::negative_definite_band: return "negative_definite_band";
        case StVerdict::sign_indefinite: return "sign_indefinite";
        case StVerdict::positive: return "positive";
    }
    return "?";
}

struct StProbeOptions {
    std::vector<double> shell_radii{0.1, 0.5, 1.0, 2.0};
    int samples_per_shell = 720;
    double axis_tolerance = 1e-3;  // skip samples with |z_i| < tol * radius
    std::uint64_t seed = 7;
    double sim_dt = 1e-4;
    double sim_horizon = 5.0;
};

struct StProbeResult {
    std::vector<Vec> eta_samples;
    std::vector<double> vdot_normalized;  // numeric V_dot / ||eta||^2 per sample
    std::vector<double> vdot_analytic_normalized;
    double min_normalized = 0.0;
    double max_normalized = 0.0;
    StVerdict verdict = StVerdict::sign_indefinite;
    std::vector<double> trajectory_V;  // V along a simulated run from the first sample
    std::vector<double> trajectory_vdot;
};

namespace detail {

inline StRate st_rhs(StMode mode, const Vec& s, const Vec& omega, const StGains& gains, const Vec& injection) {
    return mode == StMode::claimed ? st_claimed_rhs(s, omega, gains, injection)
                                   : st_corrected_rhs(s, omega, gains, injection);
}

inline Vec st_eta(const Vec& s, const Vec& omega) {
    Vec eta(s.size() + omega.size());
    eta << st_root_sign(s), omega;
    return eta;
}

/// One RK4 step of the (s, Omega) system; h may be negative.
inline void st_rk4(StMode mode, const StGains& gains, const StInjection& inj, double t, double h, Vec& s,
                   Vec& omega) {
    const int n = static_cast<int>(s.size());
    auto f = [&](double tt, const Vec& ss, const Vec& oo) { return st_rhs(mode, ss, oo, gains, inj.at(tt, n)); };
    const StRate k1 = f(t, s, omega);
    const StRate k2 = f(t + h / 2, s + h / 2 * k1.s_dot, omega + h / 2 * k1.omega_dot);
    const StRate k3 = f(t + h / 2, s + h / 2 * k2.s_dot, omega + h / 2 * k2.omega_dot);
    const StRate k4 = f(t + h, s + h * k3.s_dot, omega + h * k3.omega_dot);
    s += h / 6 * (k1.s_dot + 2 * k2.s_dot + 2 * k3.s_dot + k4.s_dot);
    omega += h / 6 * (k1.omega_dot + 2 * k2.omega_dot + 2 * k3.omega_dot + k4.omega_dot);
}

}  // namespace detail

/// Samples eta on spherical shells, measures V_dot of V = eta^T P eta by
/// integrating the selected closed loop a short step forward and backward, and
/// classifies the sign pattern of V_dot / ||eta||^2.
inline StProbeResult st_definiteness_probe(const StGains& gains, const Mat& P, StMode mode,
                                           const StInjection& injection, const StProbeOptions& opt = {}) {
    const int n = static_cast<int>(gains.k1.size());
    validate(gains, n);
    if (P.rows() != 2 * n || P.cols() != 2 * n || !is_positive_definite(P)) {
        throw ConfigError("P", "must be a symmetric positive definite " + std::to_string(2 * n) + "x" +
                                   std::to_string(2 * n) + " matrix");
    }
    if (injection.kind != StInjection::Kind::zero && injection.value.size() != n) {
        throw DimensionError("injection dimension mismatch");
    }

    StProbeResult out;
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto V = [&](const Vec& eta) { return eta.dot(P * eta); };

    for (double r : opt.shell_radii) {
        for (int j = 0; j < opt.samples_per_shell; ++j) {
            Vec dir(2 * n);
            if (n == 1) {
                const double th = 2.0 * M_PI * (j + 0.5) / opt.samples_per_shell;
                dir << std::cos(th), std::sin(th);
            } else {
                for (int i = 0; i < 2 * n; ++i) dir(i) = gauss(rng);
                dir.normalize();
            }
            const Vec eta = r * dir;
            const Vec z = eta.head(n);
            if (z.cwiseAbs().minCoeff() < opt.axis_tolerance * r) continue;
            const Vec s0 = z.cwiseProduct(z.cwiseAbs());
            const Vec om0 = eta.tail(n);

            const StRate rate = detail::st_rhs(mode, s0, om0, gains, injection.at(0.0, n));
            // Keep the step small enough that no channel crosses s = 0.
            const double smin = s0.cwiseAbs().minCoeff();
            const double h = 1e-4 * smin / (1.0 + rate.s_dot.cwiseAbs().maxCoeff());
            Vec sp = s0, op = om0, sm = s0, om = om0;
            detail::st_rk4(mode, gains, injection, 0.0, h, sp, op);
            detail::st_rk4(mode, gains, injection, 0.0, -h, sm, om);
            const double vdot = (V(detail::st_eta(sp, op)) - V(detail::st_eta(sm, om))) / (2.0 * h);

            Vec eta_dot(2 * n);
            eta_dot << rate.s_dot.cwiseQuotient(2.0 * z.cwiseAbs()), rate.omega_dot;
            const double vdot_analytic = 2.0 * eta.dot(P * eta_dot);

            const double norm2 = eta.squaredNorm();
            out.eta_samples.push_back(eta);
            out.vdot_normalized.push_back(vdot / norm2);
            out.vdot_analytic_normalized.push_back(vdot_analytic / norm2);
        }
    }
    if (out.vdot_normalized.empty()) throw std::invalid_argument("st_definiteness_probe: no admissible samples");
    const auto [mn, mx] = std::minmax_element(out.vdot_normalized.begin(), out.vdot_normalized.end());
    out.min_normalized = *mn;
    out.max_normalized = *mx;
    out.verdict = out.max_normalized < 0.0   ? StVerdict::negative_definite_band
                  : out.min_normalized > 0.0 ? StVerdict::positive
                                             : StVerdict::sign_indefinite;

    // Closed-loop run from the first admissible sample, monitoring V.
    const Vec& eta0 = out.eta_samples.front();
    Vec s = eta0.head(n).cwiseProduct(eta0.head(n).cwiseAbs());
    Vec omega = eta0.tail(n);
    const int steps = static_cast<int>(std::lround(opt.sim_horizon / opt.sim_dt));
    out.trajectory_V.reserve(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) {
        out.trajectory_V.push_back(V(detail::st_eta(s, omega)));
        if (k < steps) detail::st_rk4(mode, gains, injection, k * opt.sim_dt, opt.sim_dt, s, omega);
    }
    out.trajectory_vdot = numeric_vdot(out.trajectory_V, opt.sim_dt);
    return out;
}

// ---------------------------------------------------------------------------
// Port-Hamiltonian decay check

/// Central-difference Hessian of H at x.
inline Mat ph_hessian(const PHModel& model, const Vec& x, double h = 1e-5) {
    const int n = model.dim;
    Mat Hs(n, n);
    for (int j = 0; j < n; ++j) {
        Vec xp = x, xm = x;
        xp(j) += h;
        xm(j) -= h;
        Hs.col(j) = (model.grad_h(xp) - model.grad_h(xm)) / (2.0 * h);
    }
    return 0.5 * (Hs + Hs.transpose());
}

/// Peak-to-peak gain from a matched input to x - x* for the closed loop
/// linearized at x*: integral of ||exp(A t) G(x*)||_2 dt with
/// A = (J - R - G K G^T) Hess H(x*). Infinite when A is not Hurwitz.
inline double ph_linearized_l1_gain(const PHModel& model, const Mat& K) {
    const Vec& xs = model.minimizer;
    const Mat G = model.input_map(xs);
    const Mat A = (model.interconnection(xs) - model.damping(xs) - G * K * G.transpose()) * ph_hessian(model, xs);
    const double max_re = A.eigenvalues().real().maxCoeff();
    if (!(max_re < 0.0)) return std::numeric_limits<double>::infinity();
    const double h = std::min(1e-3, 0.01 / std::max(1.0, spectral_norm(A)));
    const double t_max = 60.0 / -max_re;
    Mat phi = G;
    double prev = spectral_norm(phi);
    double integral = 0.0;
    for (double t = 0.0; t < t_max; t += h) {
        const Mat k1 = A * phi;
        const Mat k2 = A * (phi + h / 2 * k1);
        const Mat k3 = A * (phi + h / 2 * k2);
        const Mat k4 = A * (phi + h * k3);
        phi += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        const double cur = spectral_norm(phi);
        integral += 0.5 * h * (prev + cur);
        prev = cur;
    }
    return integral;
}

struct PhDecayReport {
    BoundReport band;             // ||x - x*|| against the ultimate band
    double hdot_fraction = 0.0;   // share of post-transient samples meeting the H_dot inequality
    std::size_t samples = 0;
    double max_violation = 0.0;   // largest H_dot - bound over checked samples
    double numeric_hdot_gap = 0.0;  // max |central-difference H_dot - grad H . xdot|
};

/// H_dot <= -grad H^T R grad H - ||grad H^T G|| (lambda_min(K) ||grad H^T G|| - rho eps)
/// at every post-transient grid sample, plus the ultimate band on ||x - x*||
/// given by the linearized peak-to-peak gain times rho eps.
inline PhDecayReport ph_decay_check(const PHModel& model, const PhTrajectory& traj, const Mat& K, double rho,
                                    double eps, double settle_fraction = 0.5) {
    if (traj.records.size() < 3) throw std::invalid_argument("ph_decay_check: trajectory too short");
    const double lk = lambda_min(K);
    const auto times = traj.times();
    const auto H = traj.series([](const PhRecord& r) { return r.H; });
    const auto dist = traj.series([&](const PhRecord& r) { return (r.x - model.minimizer).norm(); });
    std::vector<char> cold;
    for (const auto& r : traj.records) cold.push_back(r.cold_start ? 1 : 0);
    const auto hdot_num = numeric_vdot(H, traj.dt);

    PhDecayReport rep;
    rep.max_violation = -std::numeric_limits<double>::infinity();
    const double start = times.front() + settle_fraction * (times.back() - times.front());
    std::size_t ok = 0;
    for (std::size_t i = 0; i < traj.records.size(); ++i) {
        const PhRecord& r = traj.records[i];
        if (r.cold_start || r.t < start) continue;
        const Vec grad = model.grad_h(r.x);
        const double hdot = grad.dot(r.xdot);
        const double y = (model.input_map(r.x).transpose() * grad).norm();
        const double bound = -grad.dot(model.damping(r.x) * grad) - y * (lk * y - rho * eps);
        const double tol = 1e-9 * (1.0 + std::abs(bound) + std::abs(hdot));
        if (hdot <= bound + tol) ++ok;
        rep.max_violation = std::max(rep.max_violation, hdot - bound);
        rep.numeric_hdot_gap = std::max(rep.numeric_hdot_gap, std::abs(hdot_num[i] - hdot));
        ++rep.samples;
    }
    if (rep.samples == 0) throw std::invalid_argument("ph_decay_check: empty settle window");
    rep.hdot_fraction = static_cast<double>(ok) / static_cast<double>(rep.samples);
    const double band = ph_linearized_l1_gain(model, K) * rho * eps;
    rep.band = make_bound_report(times, dist, band, settle_fraction, cold);
    return rep;
}

}  // namespace tdelab
