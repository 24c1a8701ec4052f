#pragma once

// Exogenous signals: disturbances d(t) with a known rate bound and reference
// trajectories q_d(t).

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tdelab/errors.hpp"
#include "tdelab/linalg.hpp"

namespace tdelab {

enum class DisturbanceKind { zero, constant, sinusoid, ramp, composite };

inline const char* to_string(DisturbanceKind k) {
    switch (k) {
        case DisturbanceKind::zero: return "zero";
        case DisturbanceKind::constant: return "constant";
        case DisturbanceKind::sinusoid: return "sinusoid";
        case DisturbanceKind::ramp: return "ramp";
        case DisturbanceKind::composite: return "composite";
    }
    return "?";
}

/// constant:  d = amplitude
/// sinusoid:  d = amplitude * sin(frequency t + phase)
/// ramp:      d = amplitude + slope t
/// composite: sum of `components`
struct DisturbanceSpec {
    DisturbanceKind kind = DisturbanceKind::zero;
    int dim = 0;
    Vec amplitude;
    double frequency = 0.0;  // rad/s
    double phase = 0.0;      // rad
    Vec slope;
    std::vector<DisturbanceSpec> components;
    /// Optional user-declared epsilon; must dominate the analytic rate bound.
    std::optional<double> declared_epsilon;
};

struct DisturbanceValue {
    Vec d;
    Vec d_dot;
};

inline DisturbanceValue disturbance_eval(const DisturbanceSpec& spec, double t) {
    const int n = spec.dim;
    switch (spec.kind) {
        case DisturbanceKind::zero: return {Vec::Zero(n), Vec::Zero(n)};
        case DisturbanceKind::constant: return {spec.amplitude, Vec::Zero(n)};
        case DisturbanceKind::sinusoid: {
            const double arg = spec.frequency * t + spec.phase;
            return {spec.amplitude * std::sin(arg), spec.amplitude * (spec.frequency * std::cos(arg))};
        }
        case DisturbanceKind::ramp: return {spec.amplitude + spec.slope * t, spec.slope};
        case DisturbanceKind::composite: {
            DisturbanceValue sum{Vec::Zero(n), Vec::Zero(n)};
            for (const auto& c : spec.components) {
                const DisturbanceValue v = disturbance_eval(c, t);
                sum.d += v.d;
                sum.d_dot += v.d_dot;
            }
            return sum;
        }
    }
    return {Vec::Zero(n), Vec::Zero(n)};
}

/// Analytic sup ||d_dot||; composite uses the triangle inequality.
inline double analytic_rate_bound(const DisturbanceSpec& spec) {
    switch (spec.kind) {
        case DisturbanceKind::zero:
        case DisturbanceKind::constant: return 0.0;
        case DisturbanceKind::sinusoid: return spec.amplitude.norm() * std::abs(spec.frequency);
        case DisturbanceKind::ramp: return spec.slope.norm();
        case DisturbanceKind::composite: {
            double eps = 0.0;
            for (const auto& c : spec.components) eps += analytic_rate_bound(c);
            return eps;
        }
    }
    return 0.0;
}

/// Epsilon used in the bounds: the declared value when present, else analytic.
inline double derivative_bound(const DisturbanceSpec& spec) {
    return spec.declared_epsilon.value_or(analytic_rate_bound(spec));
}

/// Throws ConfigError on inconsistent sizes or an under-declared epsilon.
inline void validate(const DisturbanceSpec& spec, const std::string& field = "disturbance") {
    auto need = [&](const Vec& v, const char* name) {
        if (v.size() != spec.dim) {
            throw ConfigError(field + "." + name, "expected " + std::to_string(spec.dim) + " entries");
        }
        if (!v.allFinite()) throw ConfigError(field + "." + name, "non-finite entry");
    };
    switch (spec.kind) {
        case DisturbanceKind::zero: break;
        case DisturbanceKind::constant: need(spec.amplitude, "amplitude"); break;
        case DisturbanceKind::sinusoid:
            need(spec.amplitude, "amplitude");
            if (!std::isfinite(spec.frequency)) throw ConfigError(field + ".freq_rad_s", "non-finite");
            break;
        case DisturbanceKind::ramp:
            need(spec.amplitude, "amplitude");
            need(spec.slope, "slope_per_s");
            break;
        case DisturbanceKind::composite:
            if (spec.components.empty()) throw ConfigError(field + ".components", "composite needs components");
            for (std::size_t i = 0; i < spec.components.size(); ++i) {
                if (spec.components[i].dim != spec.dim) {
                    throw ConfigError(field + ".components[" + std::to_string(i) + "]", "dimension mismatch");
                }
                validate(spec.components[i], field + ".components[" + std::to_string(i) + "]");
            }
            break;
    }
    if (spec.declared_epsilon && *spec.declared_epsilon < analytic_rate_bound(spec) * (1.0 - 1e-12)) {
        throw ConfigError(field + ".epsilon", "declared epsilon is below the analytic rate bound " +
                                                  std::to_string(analytic_rate_bound(spec)));
    }
}

inline DisturbanceSpec zero_disturbance(int dim) {
    DisturbanceSpec s;
    s.dim = dim;
    return s;
}

inline DisturbanceSpec constant_disturbance(Vec value) {
    DisturbanceSpec s;
    s.kind = DisturbanceKind::constant;
    s.dim = static_cast<int>(value.size());
    s.amplitude = std::move(value);
    return s;
}

inline DisturbanceSpec sinusoid_disturbance(Vec amplitude, double frequency, double phase = 0.0) {
    DisturbanceSpec s;
    s.kind = DisturbanceKind::sinusoid;
    s.dim = static_cast<int>(amplitude.size());
    s.amplitude = std::move(amplitude);
    s.frequency = frequency;
    s.phase = phase;
    return s;
}

inline DisturbanceSpec ramp_disturbance(Vec offset, Vec slope) {
    DisturbanceSpec s;
    s.kind = DisturbanceKind::ramp;
    s.dim = static_cast<int>(offset.size());
    s.amplitude = std::move(offset);
    s.slope = std::move(slope);
    return s;
}

// ---------------------------------------------------------------------------

/// Desired joint trajectory with consistent derivatives.
struct Reference {
    std::function<Vec(double)> q_d;
    std::function<Vec(double)> qd_d;
    std::function<Vec(double)> qdd_d;
};

enum class ReferenceKind { set_point, sinusoid };

/// set_point: q_d = offset; sinusoid: q_d = offset + amplitude * sin(frequency t + phase).
struct ReferenceSpec {
    ReferenceKind kind = ReferenceKind::set_point;
    Vec offset;
    Vec amplitude;
    double frequency = 0.0;
    double phase = 0.0;
};

inline Reference make_reference(const ReferenceSpec& spec) {
    if (spec.kind == ReferenceKind::set_point) {
        const Vec c = spec.offset;
        const auto zero = Vec::Zero(c.size()).eval();
        return {[c](double) { return c; }, [zero](double) { return zero; }, [zero](double) { return zero; }};
    }
    const Vec c = spec.offset;
    const Vec a = spec.amplitude;
    const double w = spec.frequency;
    const double ph = spec.phase;
    return {[=](double t) { return Vec(c + a * std::sin(w * t + ph)); },
            [=](double t) { return Vec(a * (w * std::cos(w * t + ph))); },
            [=](double t) { return Vec(a * (-w * w * std::sin(w * t + ph))); }};
}

inline Reference set_point_reference(Vec q_d) {
    ReferenceSpec s;
    s.offset = std::move(q_d);
    return make_reference(s);
}

}  // namespace tdelab
