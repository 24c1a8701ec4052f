#pragma once

// Manipulator and port-Hamiltonian models.
//
// A RobotModel is a bundle of callables for the terms of
//     M(q) qdd + C(q, qd) qd + g(q) + f(q, qd) + d = tau
// and a PHModel bundles H, grad H, J, R, G of
//     xdot = [J(x) - R(x)] grad H(x) + G(x) (u - d).
// Both are pure: evaluation never mutates the model.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tdelab/errors.hpp"
#include "tdelab/linalg.hpp"

namespace tdelab {

/// Axis-aligned box in (q, qd) used for invariant sampling and bound constants.
struct Workspace {
    Vec q_lo, q_hi;
    Vec qd_lo, qd_hi;
};

struct RobotModel {
    std::string name;
    int dof = 0;
    std::function<Mat(const Vec& q)> mass_matrix;
    std::function<Mat(const Vec& q, const Vec& qd)> coriolis_matrix;
    std::function<Vec(const Vec& q)> gravity_vector;
    std::function<Vec(const Vec& q, const Vec& qd)> damping_vector;
    /// dM/dt along a motion with velocity qd.
    std::function<Mat(const Vec& q, const Vec& qd)> mass_matrix_rate;
    /// Potential whose gradient is gravity_vector; used for energy audits.
    std::function<double(const Vec& q)> potential_energy;
    Workspace workspace;
};

struct RobotState {
    double t = 0.0;
    Vec q;
    Vec qd;
};

struct DynamicsTerms {
    Mat M;
    Mat C;
    Vec g;
    Vec f;
};

namespace detail {

inline void check_state(const RobotModel& model, const RobotState& state) {
    if (state.q.size() != model.dof || state.qd.size() != model.dof) {
        throw DimensionError("state dimension does not match model '" + model.name + "' (dof=" +
                             std::to_string(model.dof) + ")");
    }
}

}  // namespace detail

inline DynamicsTerms eval_terms(const RobotModel& model, const RobotState& state) {
    detail::check_state(model, state);
    DynamicsTerms terms{model.mass_matrix(state.q), model.coriolis_matrix(state.q, state.qd),
                        model.gravity_vector(state.q), model.damping_vector(state.q, state.qd)};
    if (!all_finite(terms.M) || !all_finite(terms.C) || !all_finite(terms.g) || !all_finite(terms.f)) {
        throw ModelError("non-finite dynamics term from model '" + model.name + "' at t=" +
                         std::to_string(state.t));
    }
    return terms;
}

/// qdd = M^{-1} (tau - C qd - g - f - d).
inline Vec forward_dynamics(const RobotModel& model, const RobotState& state, const Vec& tau, const Vec& d) {
    const DynamicsTerms terms = eval_terms(model, state);
    if (tau.size() != model.dof || d.size() != model.dof) {
        throw DimensionError("torque/disturbance dimension mismatch");
    }
    const Vec rhs = tau - terms.C * state.qd - terms.g - terms.f - d;
    Eigen::LDLT<Mat> ldlt(terms.M);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !(ldlt.rcond() > kMinRcond)) {
        throw ConditioningError("mass matrix of '" + model.name + "' is singular or ill-conditioned");
    }
    return ldlt.solve(rhs);
}

/// tau = M qdd + C qd + g + f + d.
inline Vec inverse_dynamics(const RobotModel& model, const RobotState& state, const Vec& qdd, const Vec& d) {
    const DynamicsTerms terms = eval_terms(model, state);
    if (qdd.size() != model.dof || d.size() != model.dof) {
        throw DimensionError("acceleration/disturbance dimension mismatch");
    }
    Vec tau = terms.M * qdd + terms.C * state.qd + terms.g + terms.f + d;
    if (!all_finite(tau)) throw ModelError("non-finite torque from inverse dynamics");
    return tau;
}

/// x^T (Mdot - 2C) x; zero when C comes from a Christoffel factorization.
inline double skew_symmetry_residual(const RobotModel& model, const RobotState& state, const Vec& x) {
    detail::check_state(model, state);
    const Mat n = model.mass_matrix_rate(state.q, state.qd) - 2.0 * model.coriolis_matrix(state.q, state.qd);
    return x.dot(n * x);
}

/// Mechanical energy 1/2 qd^T M qd + U(q).
inline double mechanical_energy(const RobotModel& model, const RobotState& state) {
    return 0.5 * state.qd.dot(model.mass_matrix(state.q) * state.qd) + model.potential_energy(state.q);
}

/// Uniform sample of a state inside the model workspace.
template <class Rng>
RobotState sample_state(const RobotModel& model, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Workspace& ws = model.workspace;
    RobotState s{0.0, Vec(model.dof), Vec(model.dof)};
    for (int i = 0; i < model.dof; ++i) {
        s.q(i) = ws.q_lo(i) + unit(rng) * (ws.q_hi(i) - ws.q_lo(i));
        s.qd(i) = ws.qd_lo(i) + unit(rng) * (ws.qd_hi(i) - ws.qd_lo(i));
    }
    return s;
}

struct InertiaExtremes {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

/// Extreme eigenvalues of M(q) over the workspace, estimated by uniform sampling
/// and widened by `safety` (deflate lambda_min, inflate lambda_max).
inline InertiaExtremes inertia_extremes(const RobotModel& model, int samples = 10000, std::uint64_t seed = 1,
                                        double safety = 0.01) {
    std::mt19937_64 rng(seed);
    InertiaExtremes out{std::numeric_limits<double>::infinity(), 0.0};
    for (int i = 0; i < samples; ++i) {
        const RobotState s = sample_state(model, rng);
        const Vec ev = sym_eigenvalues(model.mass_matrix(s.q));
        out.lambda_min = std::min(out.lambda_min, ev(0));
        out.lambda_max = std::max(out.lambda_max, ev(ev.size() - 1));
    }
    out.lambda_min *= (1.0 - safety);
    out.lambda_max *= (1.0 + safety);
    return out;
}

/// kappa >= sup ||g(q)|| over the workspace: maximum over a uniform grid with
/// `points_per_axis` nodes per joint (ends included), inflated by `inflation`.
inline double gravity_bound(const RobotModel& model, int points_per_axis = 181, double inflation = 0.01) {
    if (points_per_axis < 2) throw std::invalid_argument("gravity_bound needs >= 2 grid points per axis");
    const int n = model.dof;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    Vec q(n);
    double best = 0.0;
    for (;;) {
        for (int i = 0; i < n; ++i) {
            const double a = static_cast<double>(idx[static_cast<std::size_t>(i)]) / (points_per_axis - 1);
            q(i) = model.workspace.q_lo(i) + a * (model.workspace.q_hi(i) - model.workspace.q_lo(i));
        }
        best = std::max(best, model.gravity_vector(q).norm());
        int k = 0;
        while (k < n && ++idx[static_cast<std::size_t>(k)] == points_per_axis) {
            idx[static_cast<std::size_t>(k)] = 0;
            ++k;
        }
        if (k == n) break;
    }
    return best * (1.0 + inflation);
}

// ---------------------------------------------------------------------------
// Built-in manipulators

struct PendulumParams {
    double mass_kg = 1.0;
    double length_m = 1.0;
    double damping = 0.1;  // N*m*s/rad
    double gravity = 9.81;
    double qd_limit = 5.0;  // workspace half-width for velocity sampling
};

/// Point-mass pendulum, q measured from the downward vertical.
inline RobotModel make_pendulum(const PendulumParams& p = {}) {
    if (!(p.mass_kg > 0.0) || !(p.length_m > 0.0) || !(p.damping >= 0.0) || !(p.gravity >= 0.0)) {
        throw ModelError("pendulum parameters must satisfy m>0, l>0, b>=0, g0>=0");
    }
    const double inertia = p.mass_kg * p.length_m * p.length_m;
    const double mgl = p.mass_kg * p.gravity * p.length_m;
    RobotModel m;
    m.name = "pendulum";
    m.dof = 1;
    m.mass_matrix = [inertia](const Vec&) { return Mat::Constant(1, 1, inertia); };
    m.coriolis_matrix = [](const Vec&, const Vec&) { return Mat::Zero(1, 1); };
    m.gravity_vector = [mgl](const Vec& q) { return Vec::Constant(1, mgl * std::sin(q(0))); };
    m.damping_vector = [b = p.damping](const Vec&, const Vec& qd) { return Vec(b * qd); };
    m.mass_matrix_rate = [](const Vec&, const Vec&) { return Mat::Zero(1, 1); };
    m.potential_energy = [mgl](const Vec& q) { return mgl * (1.0 - std::cos(q(0))); };
    m.workspace = {Vec::Constant(1, -M_PI), Vec::Constant(1, M_PI), Vec::Constant(1, -p.qd_limit),
                   Vec::Constant(1, p.qd_limit)};
    return m;
}

struct TwoLinkParams {
    double m1_kg = 1.0;
    double m2_kg = 1.0;
    double l1_m = 1.0;
    double l2_m = 1.0;
    double b1 = 0.0;  // viscous damping per joint, N*m*s/rad
    double b2 = 0.0;
    double gravity = 9.81;
    double qd_limit = 3.0;
};

/// Planar two-link arm with point masses at the link tips, angles from the
/// horizontal (q2 relative to link 1), gravity along -y. C is the
/// Christoffel-symbol factorization, so Mdot - 2C is skew-symmetric.
inline RobotModel make_two_link(const TwoLinkParams& p = {}) {
    if (!(p.m1_kg > 0.0) || !(p.m2_kg > 0.0) || !(p.l1_m > 0.0) || !(p.l2_m > 0.0) || !(p.b1 >= 0.0) ||
        !(p.b2 >= 0.0) || !(p.gravity >= 0.0)) {
        throw ModelError("two-link parameters must satisfy m>0, l>0, b>=0, g0>=0");
    }
    const double a = p.m1_kg * p.l1_m * p.l1_m + p.m2_kg * (p.l1_m * p.l1_m + p.l2_m * p.l2_m);
    const double b = p.m2_kg * p.l1_m * p.l2_m;
    const double c = p.m2_kg * p.l2_m * p.l2_m;
    const double g1 = (p.m1_kg + p.m2_kg) * p.gravity * p.l1_m;
    const double g2 = p.m2_kg * p.gravity * p.l2_m;

    RobotModel m;
    m.name = "two_link";
    m.dof = 2;
    m.mass_matrix = [=](const Vec& q) {
        const double c2 = std::cos(q(1));
        Mat M(2, 2);
        M << a + 2.0 * b * c2, c + b * c2, c + b * c2, c;
        return M;
    };
    m.coriolis_matrix = [=](const Vec& q, const Vec& qd) {
        const double h = -b * std::sin(q(1));
        Mat C(2, 2);
        C << h * qd(1), h * (qd(0) + qd(1)), -h * qd(0), 0.0;
        return C;
    };
    m.gravity_vector = [=](const Vec& q) {
        const double c1 = std::cos(q(0));
        const double c12 = std::cos(q(0) + q(1));
        Vec g(2);
        g << g1 * c1 + g2 * c12, g2 * c12;
        return g;
    };
    m.damping_vector = [b1 = p.b1, b2 = p.b2](const Vec&, const Vec& qd) {
        Vec f(2);
        f << b1 * qd(0), b2 * qd(1);
        return f;
    };
    m.mass_matrix_rate = [=](const Vec& q, const Vec& qd) {
        const double h = -b * std::sin(q(1)) * qd(1);
        Mat Md(2, 2);
        Md << 2.0 * h, h, h, 0.0;
        return Md;
    };
    m.potential_energy = [=](const Vec& q) { return g1 * std::sin(q(0)) + g2 * std::sin(q(0) + q(1)); };
    m.workspace = {Vec::Constant(2, -M_PI), Vec::Constant(2, M_PI), Vec::Constant(2, -p.qd_limit),
                   Vec::Constant(2, p.qd_limit)};
    return m;
}

// ---------------------------------------------------------------------------
// Port-Hamiltonian systems

struct PHModel {
    std::string name;
    int dim = 0;
    int input_dim = 0;
    std::function<double(const Vec& x)> hamiltonian;
    std::function<Vec(const Vec& x)> grad_h;
    std::function<Mat(const Vec& x)> interconnection;  // J = -J^T
    std::function<Mat(const Vec& x)> damping;          // R >= 0
    std::function<Mat(const Vec& x)> input_map;        // G, dim x input_dim
    Vec minimizer;                                     // x* = arg min H
    Vec x_lo, x_hi;                                    // sampling box
};

/// [J(x) - R(x)] grad H(x) + G(x) (u - d).
inline Vec ph_vector_field(const PHModel& model, const Vec& x, const Vec& u, const Vec& d) {
    if (x.size() != model.dim || u.size() != model.input_dim || d.size() != model.input_dim) {
        throw DimensionError("port-Hamiltonian field: dimension mismatch (n=" + std::to_string(model.dim) +
                             ", m=" + std::to_string(model.input_dim) + ")");
    }
    const Mat G = model.input_map(x);
    if (G.rows() != model.dim || G.cols() != model.input_dim) {
        throw DimensionError("input map has wrong shape");
    }
    Vec xdot = (model.interconnection(x) - model.damping(x)) * model.grad_h(x) + G * (u - d);
    if (!all_finite(xdot)) throw ModelError("non-finite port-Hamiltonian vector field");
    return xdot;
}

/// Damped pendulum in (q, p) coordinates, p = m l^2 qd:
/// H = p^2/(2 m l^2) + m g0 l (1 - cos q), J canonical, R = diag(0, b), G = e2.
inline PHModel make_ph_pendulum(const PendulumParams& p = {}) {
    if (!(p.mass_kg > 0.0) || !(p.length_m > 0.0) || !(p.damping >= 0.0) || !(p.gravity >= 0.0)) {
        throw ModelError("pendulum parameters must satisfy m>0, l>0, b>=0, g0>=0");
    }
    const double inertia = p.mass_kg * p.length_m * p.length_m;
    const double mgl = p.mass_kg * p.gravity * p.length_m;
    PHModel m;
    m.name = "ph_pendulum";
    m.dim = 2;
    m.input_dim = 1;
    m.hamiltonian = [=](const Vec& x) { return 0.5 * x(1) * x(1) / inertia + mgl * (1.0 - std::cos(x(0))); };
    m.grad_h = [=](const Vec& x) {
        Vec g(2);
        g << mgl * std::sin(x(0)), x(1) / inertia;
        return g;
    };
    m.interconnection = [](const Vec&) {
        Mat J(2, 2);
        J << 0.0, 1.0, -1.0, 0.0;
        return J;
    };
    m.damping = [b = p.damping](const Vec&) {
        Mat R = Mat::Zero(2, 2);
        R(1, 1) = b;
        return R;
    };
    m.input_map = [](const Vec&) {
        Mat G(2, 1);
        G << 0.0, 1.0;
        return G;
    };
    m.minimizer = Vec::Zero(2);
    m.x_lo = Vec(2);
    m.x_hi = Vec(2);
    m.x_lo << -M_PI, -p.qd_limit * inertia;
    m.x_hi << M_PI, p.qd_limit * inertia;
    return m;
}

}  // namespace tdelab
