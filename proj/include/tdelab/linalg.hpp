#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "tdelab/errors.hpp"

namespace tdelab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Reciprocal condition number below which a matrix is treated as singular.
inline constexpr double kMinRcond = 1e-12;

inline bool all_finite(const Vec& v) { return v.allFinite(); }
inline bool all_finite(const Mat& m) { return m.allFinite(); }

inline double spectral_norm(const Mat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

inline double spectral_radius(const Mat& m) {
    if (m.size() == 0) return 0.0;
    return m.eigenvalues().cwiseAbs().maxCoeff();
}

/// Eigenvalues of the symmetric part of `m`, ascending.
inline Vec sym_eigenvalues(const Mat& m) {
    Mat sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline double lambda_min(const Mat& m) { return sym_eigenvalues(m)(0); }
inline double lambda_max(const Mat& m) {
    Vec ev = sym_eigenvalues(m);
    return ev(ev.size() - 1);
}

inline bool is_symmetric(const Mat& m, double tol = 1e-12) {
    return m.rows() == m.cols() &&
           (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * (1.0 + m.cwiseAbs().maxCoeff());
}

inline bool is_positive_definite(const Mat& m) {
    if (m.rows() != m.cols() || m.rows() == 0 || !is_symmetric(m, 1e-9)) return false;
    return lambda_min(m) > 0.0;
}

/// Solves `a x = b`, throwing ConditioningError when `a` is numerically singular.
inline Vec solve_checked(const Mat& a, const Vec& b, const char* what) {
    Eigen::PartialPivLU<Mat> lu(a);
    if (!(lu.rcond() > kMinRcond)) {
        throw ConditioningError(std::string(what) + " is singular or ill-conditioned (rcond=" +
                                std::to_string(lu.rcond()) + ")");
    }
    return lu.solve(b);
}

inline Mat inverse_checked(const Mat& a, const char* what) {
    Eigen::PartialPivLU<Mat> lu(a);
    if (!(lu.rcond() > kMinRcond)) {
        throw ConditioningError(std::string(what) + " is singular or ill-conditioned");
    }
    return lu.inverse();
}

/// Left pseudo-inverse (G^T G)^{-1} G^T; requires full column rank.
inline Mat left_pseudo_inverse(const Mat& g) {
    Eigen::ColPivHouseholderQR<Mat> qr(g);
    if (qr.rank() < g.cols()) {
        throw ConditioningError("input map is rank deficient; left pseudo-inverse undefined");
    }
    Mat gtg = g.transpose() * g;
    return inverse_checked(gtg, "G^T G") * g.transpose();
}

/// Componentwise sign with sign(0) = 0.
inline double sgn(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace tdelab
