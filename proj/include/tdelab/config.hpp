#pragma once

// Scenario files (JSON), run reports (JSON) and trajectory CSV.
//
// Every physical quantity carries its unit in the key name (rho_s,
// freq_rad_s, ...). Gains accept either a list (diagonal) or a list of rows.
// Unknown keys are rejected so typos surface as config errors.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "tdelab/checks.hpp"
#include "tdelab/errors.hpp"
#include "tdelab/sim.hpp"

#ifndef TDELAB_VERSION
#define TDELAB_VERSION "0.1.0"
#endif

namespace tdelab {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = TDELAB_VERSION;

namespace cfg {

inline std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(path, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items()) {
        if (!ok.count(key)) throw ConfigError(join(path, key), "unknown field");
    }
}

inline const json& require(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) throw ConfigError(join(path, key), "missing required field");
    return obj.at(key);
}

inline double number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
    return x;
}

inline double number_or(const json& obj, const std::string& path, const char* key, double fallback) {
    return obj.contains(key) ? number(obj.at(key), join(path, key)) : fallback;
}

inline std::string string_of(const json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError(path, "expected a string");
    return v.get<std::string>();
}

inline Vec vector_of(const json& v, const std::string& path) {
    if (v.is_number()) return Vec::Constant(1, number(v, path));
    if (!v.is_array()) throw ConfigError(path, "expected a list of numbers");
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = number(v[i], path + "[" + std::to_string(i) + "]");
    return out;
}

/// A list of numbers is a diagonal; a list of lists is a full matrix.
inline Mat matrix_of(const json& v, const std::string& path) {
    if (v.is_number()) return Mat::Constant(1, 1, number(v, path));
    if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a list or a list of rows");
    if (!v[0].is_array()) return vector_of(v, path).asDiagonal();
    const auto rows = static_cast<Eigen::Index>(v.size());
    const auto cols = static_cast<Eigen::Index>(v[0].size());
    Mat out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = v[static_cast<std::size_t>(i)];
        const std::string rp = path + "[" + std::to_string(i) + "]";
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError(rp, "ragged matrix row");
        for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = number(row[static_cast<std::size_t>(j)], rp + "[" + std::to_string(j) + "]");
    }
    return out;
}

inline json to_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline json to_json(const Mat& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        a.push_back(row);
    }
    return a;
}

template <class Enum, std::size_t N>
Enum enum_of(const json& v, const std::string& path, const std::pair<const char*, Enum> (&table)[N]) {
    const std::string s = string_of(v, path);
    for (const auto& [name, value] : table) {
        if (s == name) return value;
    }
    std::string options;
    for (const auto& [name, _] : table) options += (options.empty() ? "" : ", ") + std::string(name);
    throw ConfigError(path, "unknown value '" + s + "' (expected one of: " + options + ")");
}

inline constexpr std::pair<const char*, ControllerKind> kControllers[] = {
    {"none", ControllerKind::none},           {"case1", ControllerKind::case1},
    {"case2", ControllerKind::case2},         {"pd_reg_case1", ControllerKind::pd_reg_case1},
    {"pd_reg_case2", ControllerKind::pd_reg_case2}, {"tde_pd", ControllerKind::tde_pd},
    {"ph_case3", ControllerKind::ph_case3}};
inline constexpr std::pair<const char*, EstimatorKind> kEstimators[] = {
    {"tde", EstimatorKind::tde}, {"oracle", EstimatorKind::oracle}, {"zero", EstimatorKind::zero}};
inline constexpr std::pair<const char*, AccelMode> kAccelModes[] = {
    {"exact", AccelMode::exact}, {"second_difference", AccelMode::second_difference}};
inline constexpr std::pair<const char*, DisturbanceKind> kDisturbances[] = {
    {"zero", DisturbanceKind::zero},   {"constant", DisturbanceKind::constant},
    {"sinusoid", DisturbanceKind::sinusoid}, {"ramp", DisturbanceKind::ramp},
    {"composite", DisturbanceKind::composite}};
inline constexpr std::pair<const char*, ReferenceKind> kReferences[] = {
    {"set_point", ReferenceKind::set_point}, {"sinusoid", ReferenceKind::sinusoid}};
inline constexpr std::pair<const char*, CheckKind> kChecks[] = {
    {"none", CheckKind::none},
    {"asymptotic", CheckKind::asymptotic},
    {"case1_bound", CheckKind::case1_bound},
    {"case2_bound", CheckKind::case2_bound},
    {"regulation_bound", CheckKind::regulation_bound},
    {"ph_decay", CheckKind::ph_decay},
    {"tde_identity", CheckKind::tde_identity},
    {"energy", CheckKind::energy}};

inline DisturbanceSpec parse_disturbance(const json& j, const std::string& path, int dim) {
    reject_unknown(j, path, {"kind", "amplitude_n_m", "freq_rad_s", "phase_rad", "slope_n_m_per_s", "components", "epsilon"});
    DisturbanceSpec s;
    s.dim = dim;
    s.kind = enum_of(require(j, path, "kind"), join(path, "kind"), kDisturbances);
    if (j.contains("amplitude_n_m")) s.amplitude = vector_of(j.at("amplitude_n_m"), join(path, "amplitude_n_m"));
    s.frequency = number_or(j, path, "freq_rad_s", 0.0);
    s.phase = number_or(j, path, "phase_rad", 0.0);
    if (j.contains("slope_n_m_per_s")) s.slope = vector_of(j.at("slope_n_m_per_s"), join(path, "slope_n_m_per_s"));
    if (j.contains("components")) {
        const json& c = j.at("components");
        if (!c.is_array()) throw ConfigError(join(path, "components"), "expected a list");
        for (std::size_t i = 0; i < c.size(); ++i) {
            s.components.push_back(parse_disturbance(c[i], join(path, "components") + "[" + std::to_string(i) + "]", dim));
        }
    }
    if (j.contains("epsilon")) s.declared_epsilon = number(j.at("epsilon"), join(path, "epsilon"));
    if (s.kind != DisturbanceKind::zero && s.kind != DisturbanceKind::composite && s.amplitude.size() == 0) {
        throw ConfigError(join(path, "amplitude_n_m"), "missing required field");
    }
    return s;
}

inline json disturbance_json(const DisturbanceSpec& s) {
    json j;
    j["kind"] = to_string(s.kind);
    if (s.amplitude.size()) j["amplitude_n_m"] = to_json(s.amplitude);
    if (s.kind == DisturbanceKind::sinusoid) {
        j["freq_rad_s"] = s.frequency;
        j["phase_rad"] = s.phase;
    }
    if (s.slope.size()) j["slope_n_m_per_s"] = to_json(s.slope);
    if (!s.components.empty()) {
        j["components"] = json::array();
        for (const auto& c : s.components) j["components"].push_back(disturbance_json(c));
    }
    if (s.declared_epsilon) j["epsilon"] = *s.declared_epsilon;
    return j;
}

inline CheckSpec parse_checks(const json& j, const std::string& path) {
    reject_unknown(j, path, {"kind", "settle_fraction", "tolerance", "after_s"});
    CheckSpec c;
    c.kind = enum_of(require(j, path, "kind"), join(path, "kind"), kChecks);
    c.settle_fraction = number_or(j, path, "settle_fraction", 0.5);
    if (!(c.settle_fraction >= 0.0 && c.settle_fraction < 1.0)) throw ConfigError(join(path, "settle_fraction"), "must lie in [0, 1)");
    c.tolerance = number_or(j, path, "tolerance", 1e-6);
    if (!(c.tolerance > 0.0)) throw ConfigError(join(path, "tolerance"), "must be positive");
    c.after_s = number_or(j, path, "after_s", -1.0);
    return c;
}

inline json checks_json(const CheckSpec& c) {
    return {{"kind", to_string(c.kind)}, {"settle_fraction", c.settle_fraction}, {"tolerance", c.tolerance}, {"after_s", c.after_s}};
}

inline PendulumParams parse_pendulum(const json& j, const std::string& path) {
    reject_unknown(j, path, {"kind", "mass_kg", "length_m", "damping_n_m_s_rad", "gravity_m_s2", "qd_limit_rad_s"});
    PendulumParams p;
    p.mass_kg = number_or(j, path, "mass_kg", p.mass_kg);
    p.length_m = number_or(j, path, "length_m", p.length_m);
    p.damping = number_or(j, path, "damping_n_m_s_rad", p.damping);
    p.gravity = number_or(j, path, "gravity_m_s2", p.gravity);
    p.qd_limit = number_or(j, path, "qd_limit_rad_s", p.qd_limit);
    return p;
}

inline json pendulum_json(const char* kind, const PendulumParams& p) {
    return {{"kind", kind},          {"mass_kg", p.mass_kg},       {"length_m", p.length_m},
            {"damping_n_m_s_rad", p.damping}, {"gravity_m_s2", p.gravity}, {"qd_limit_rad_s", p.qd_limit}};
}

inline TwoLinkParams parse_two_link(const json& j, const std::string& path) {
    reject_unknown(j, path, {"kind", "m1_kg", "m2_kg", "l1_m", "l2_m", "damping_n_m_s_rad", "gravity_m_s2", "qd_limit_rad_s"});
    TwoLinkParams p;
    p.m1_kg = number_or(j, path, "m1_kg", p.m1_kg);
    p.m2_kg = number_or(j, path, "m2_kg", p.m2_kg);
    p.l1_m = number_or(j, path, "l1_m", p.l1_m);
    p.l2_m = number_or(j, path, "l2_m", p.l2_m);
    if (j.contains("damping_n_m_s_rad")) {
        const Vec b = vector_of(j.at("damping_n_m_s_rad"), join(path, "damping_n_m_s_rad"));
        if (b.size() != 2) throw ConfigError(join(path, "damping_n_m_s_rad"), "expected 2 entries");
        p.b1 = b(0);
        p.b2 = b(1);
    }
    p.gravity = number_or(j, path, "gravity_m_s2", p.gravity);
    p.qd_limit = number_or(j, path, "qd_limit_rad_s", p.qd_limit);
    return p;
}

inline json two_link_json(const TwoLinkParams& p) {
    return {{"kind", "two_link"}, {"m1_kg", p.m1_kg}, {"m2_kg", p.m2_kg}, {"l1_m", p.l1_m}, {"l2_m", p.l2_m},
            {"damping_n_m_s_rad", {p.b1, p.b2}}, {"gravity_m_s2", p.gravity}, {"qd_limit_rad_s", p.qd_limit}};
}

inline std::uint64_t seed_of(const json& j) {
    if (!j.contains("seed")) return 1;
    const json& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
        throw ConfigError("seed", "expected a non-negative integer");
    }
    return s.get<std::uint64_t>();
}

}  // namespace cfg

/// Builds a scenario from its JSON form; throws ConfigError naming the field.
inline Scenario scenario_from_json(const json& j) {
    using namespace cfg;
    reject_unknown(j, "", {"id", "model", "controller", "disturbance", "reference", "initial", "dt_s", "rho_s",
                           "horizon_s", "seed", "checks"});
    const std::string id = j.contains("id") ? string_of(j.at("id"), "id") : "unnamed";
    const json& model = require(j, "", "model");
    const std::string model_kind = string_of(require(model, "model", "kind"), "model.kind");
    const json& ctl = require(j, "", "controller");
    reject_unknown(ctl, "controller", {"kind", "estimator", "accel_mode", "K", "Gamma", "beta", "Kp", "Kd", "m_bar"});
    const ControllerKind ck = enum_of(require(ctl, "controller", "kind"), "controller.kind", kControllers);
    const EstimatorKind ek = ctl.contains("estimator") ? enum_of(ctl.at("estimator"), "controller.estimator", kEstimators)
                                                       : EstimatorKind::tde;
    const double dt = number_or(j, "", "dt_s", 1e-3);
    const double rho = number_or(j, "", "rho_s", 10 * dt);
    const double horizon = number(require(j, "", "horizon_s"), "horizon_s");
    const CheckSpec checks = j.contains("checks") ? parse_checks(j.at("checks"), "checks") : CheckSpec{};
    const std::uint64_t seed = seed_of(j);

    if (model_kind == "ph_pendulum") {
        PhScenario sc;
        sc.id = id;
        sc.model = parse_pendulum(model, "model");
        sc.controller = ck;
        sc.estimator = ek;
        if (ctl.contains("K")) sc.K = matrix_of(ctl.at("K"), "controller.K");
        for (const char* k : {"Gamma", "beta", "Kp", "Kd", "m_bar", "accel_mode"}) {
            if (ctl.contains(k)) throw ConfigError(std::string("controller.") + k, "not used by port-Hamiltonian laws");
        }
        sc.disturbance = j.contains("disturbance") ? parse_disturbance(j.at("disturbance"), "disturbance", 1)
                                                   : zero_disturbance(1);
        const json& init = require(j, "", "initial");
        reject_unknown(init, "initial", {"x"});
        sc.x0 = vector_of(require(init, "initial", "x"), "initial.x");
        if (j.contains("reference")) throw ConfigError("reference", "not used by port-Hamiltonian scenarios");
        sc.dt = dt;
        sc.rho = rho;
        sc.horizon = horizon;
        sc.seed = seed;
        sc.check = checks;
        validate(sc);
        return sc;
    }

    RobotScenario sc;
    sc.id = id;
    if (model_kind == "pendulum") {
        sc.model.kind = RobotModelKind::pendulum;
        sc.model.pendulum = parse_pendulum(model, "model");
    } else if (model_kind == "two_link") {
        sc.model.kind = RobotModelKind::two_link;
        sc.model.two_link = parse_two_link(model, "model");
    } else {
        throw ConfigError("model.kind", "unknown model '" + model_kind + "' (expected pendulum, two_link, ph_pendulum)");
    }
    const int n = sc.model.kind == RobotModelKind::pendulum ? 1 : 2;
    sc.controller = ck;
    sc.estimator = ek;
    if (ctl.contains("accel_mode")) sc.accel_mode = enum_of(ctl.at("accel_mode"), "controller.accel_mode", kAccelModes);
    if (ctl.contains("K")) sc.tracking.K = matrix_of(ctl.at("K"), "controller.K");
    if (ctl.contains("Gamma")) sc.tracking.Gamma = matrix_of(ctl.at("Gamma"), "controller.Gamma");
    if (is_tracking(ck)) {
        if (!ctl.contains("K")) throw ConfigError("controller.K", "missing required field");
        if (!ctl.contains("Gamma")) throw ConfigError("controller.Gamma", "missing required field");
        if (sc.tracking.K.rows() != n || sc.tracking.K.cols() != n) throw ConfigError("controller.K", "expected " + std::to_string(n) + "x" + std::to_string(n));
        if (!is_positive_definite(sc.tracking.K)) throw ConfigError("controller.K", "must be symmetric positive definite");
        sc.tracking.beta = ctl.contains("beta") ? number(ctl.at("beta"), "controller.beta") : 0.1 * lambda_min(sc.tracking.K);
    }
    if (ctl.contains("Kp")) sc.regulation.Kp = matrix_of(ctl.at("Kp"), "controller.Kp");
    if (ctl.contains("Kd")) sc.regulation.Kd = matrix_of(ctl.at("Kd"), "controller.Kd");
    if (is_regulation(ck) && (!ctl.contains("Kp") || !ctl.contains("Kd"))) {
        throw ConfigError(ctl.contains("Kp") ? "controller.Kd" : "controller.Kp", "missing required field");
    }
    if (ctl.contains("m_bar")) sc.m_bar = matrix_of(ctl.at("m_bar"), "controller.m_bar");
    if (ck == ControllerKind::tde_pd && !ctl.contains("m_bar")) throw ConfigError("controller.m_bar", "missing required field");
    sc.disturbance = j.contains("disturbance") ? parse_disturbance(j.at("disturbance"), "disturbance", n)
                                               : zero_disturbance(n);
    if (j.contains("reference")) {
        const json& r = j.at("reference");
        reject_unknown(r, "reference", {"kind", "offset_rad", "amplitude_rad", "freq_rad_s", "phase_rad"});
        sc.reference.kind = enum_of(require(r, "reference", "kind"), "reference.kind", kReferences);
        sc.reference.offset = vector_of(require(r, "reference", "offset_rad"), "reference.offset_rad");
        if (r.contains("amplitude_rad")) sc.reference.amplitude = vector_of(r.at("amplitude_rad"), "reference.amplitude_rad");
        sc.reference.frequency = number_or(r, "reference", "freq_rad_s", 0.0);
        sc.reference.phase = number_or(r, "reference", "phase_rad", 0.0);
    } else {
        sc.reference.offset = Vec::Zero(n);
    }
    const json& init = require(j, "", "initial");
    reject_unknown(init, "initial", {"q_rad", "qd_rad_s"});
    sc.q0 = vector_of(require(init, "initial", "q_rad"), "initial.q_rad");
    sc.qd0 = init.contains("qd_rad_s") ? vector_of(init.at("qd_rad_s"), "initial.qd_rad_s") : Vec::Zero(n);
    sc.dt = dt;
    sc.rho = rho;
    sc.horizon = horizon;
    sc.seed = seed;
    sc.check = checks;
    validate(sc);
    return sc;
}

/// Fully resolved JSON form; parsing it back reproduces the scenario exactly.
inline json scenario_to_json(const Scenario& scenario) {
    using namespace cfg;
    return std::visit(
        [](const auto& sc) -> json {
            using T = std::decay_t<decltype(sc)>;
            json j;
            j["id"] = sc.id;
            j["dt_s"] = sc.dt;
            j["rho_s"] = sc.rho;
            j["horizon_s"] = sc.horizon;
            j["seed"] = sc.seed;
            j["checks"] = checks_json(sc.check);
            j["disturbance"] = disturbance_json(sc.disturbance);
            if constexpr (std::is_same_v<T, PhScenario>) {
                j["model"] = pendulum_json("ph_pendulum", sc.model);
                j["controller"] = {{"kind", to_string(sc.controller)}, {"estimator", to_string(sc.estimator)}};
                if (sc.K.size()) j["controller"]["K"] = to_json(sc.K);
                j["initial"] = {{"x", to_json(sc.x0)}};
            } else {
                j["model"] = sc.model.kind == RobotModelKind::pendulum ? pendulum_json("pendulum", sc.model.pendulum)
                                                                       : two_link_json(sc.model.two_link);
                json c{{"kind", to_string(sc.controller)},
                       {"estimator", to_string(sc.estimator)},
                       {"accel_mode", to_string(sc.accel_mode)}};
                if (is_tracking(sc.controller)) {
                    c["K"] = to_json(sc.tracking.K);
                    c["Gamma"] = to_json(sc.tracking.Gamma);
                    c["beta"] = sc.tracking.beta;
                }
                if (is_regulation(sc.controller)) {
                    c["Kp"] = to_json(sc.regulation.Kp);
                    c["Kd"] = to_json(sc.regulation.Kd);
                }
                if (sc.m_bar.size()) c["m_bar"] = to_json(sc.m_bar);
                j["controller"] = c;
                json r{{"kind", sc.reference.kind == ReferenceKind::set_point ? "set_point" : "sinusoid"},
                       {"offset_rad", to_json(sc.reference.offset)}};
                if (sc.reference.kind == ReferenceKind::sinusoid) {
                    r["amplitude_rad"] = to_json(sc.reference.amplitude);
                    r["freq_rad_s"] = sc.reference.frequency;
                    r["phase_rad"] = sc.reference.phase;
                }
                j["reference"] = r;
                j["initial"] = {{"q_rad", to_json(sc.q0)}, {"qd_rad_s", to_json(sc.qd0)}};
            }
            return j;
        },
        scenario);
}

inline Scenario parse_scenario_text(const std::string& text, const std::string& source = "<input>") {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(source, std::string("malformed JSON: ") + e.what());
    }
    return scenario_from_json(j);
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open scenario file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str(), path);
}

inline const std::string& scenario_id(const Scenario& s) {
    return std::visit([](const auto& sc) -> const std::string& { return sc.id; }, s);
}

// ---------------------------------------------------------------------------
// Reports

namespace cfg {

/// Finite numbers as-is; non-finite as the strings "inf", "-inf", "nan".
inline json number_json(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

}  // namespace cfg

inline json bound_report_json(const BoundReport& b) {
    json j{{"theoretical_bound", cfg::number_json(b.theoretical_bound)},
           {"observed_steady_max", cfg::number_json(b.observed_steady_max)},
           {"satisfied", b.satisfied},
           {"margin_ratio", cfg::number_json(b.margin_ratio)}};
    j["settle_time_s"] = b.settle_time ? json(*b.settle_time) : json("never");
    return j;
}

inline json report_json(const RunReport& r, const json& config_echo) {
    json j;
    j["tool"] = "tdelab";
    j["version"] = kToolVersion;
    j["scenario_id"] = r.scenario_id;
    j["system"] = r.system;
    j["controller"] = r.controller;
    j["check"] = r.check;
    j["satisfied"] = r.satisfied;
    j["diverged"] = r.diverged;
    j["diverged_at_s"] = r.diverged ? json(r.diverged_at) : json(nullptr);
    j["diagnostic"] = r.diagnostic;
    j["cold_start_steps_excluded"] = r.cold_start_steps;
    j["steps"] = r.steps;
    j["bound"] = r.bound ? bound_report_json(*r.bound) : json(nullptr);
    json m = json::object();
    for (const auto& [k, v] : r.metrics) m[k] = cfg::number_json(v);
    j["metrics"] = m;
    j["config"] = config_echo;
    return j;
}

// ---------------------------------------------------------------------------
// CSV

namespace cfg {

inline void put(std::string& line, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    line += buf;
}

inline void put_vec(std::string& line, const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) put(line, v(i));
}

inline void header_vec(std::string& line, const char* name, const char* unit, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) line += "," + std::string(name) + std::to_string(i + 1) + "_" + unit;
}

inline const char* error_unit(ControllerKind k) { return k == ControllerKind::tde_pd ? "rad_s2" : "n_m"; }

}  // namespace cfg

/// Header plus one row per grid step; numbers printed with 17 significant digits.
inline void write_csv(std::ostream& out, const RobotTrajectory& traj, ControllerKind controller) {
    if (traj.records.empty()) return;
    const RobotRecord& r0 = traj.records.front();
    const Eigen::Index n = r0.q.size();
    const bool has_u = r0.u.size() > 0;
    const bool has_s = r0.S.size() > 0;
    const bool has_e = r0.e.size() > 0;
    std::string line = "t_s";
    cfg::header_vec(line, "q", "rad", n);
    cfg::header_vec(line, "qd", "rad_s", n);
    cfg::header_vec(line, "qdd", "rad_s2", n);
    cfg::header_vec(line, "tau", "n_m", n);
    if (has_u) cfg::header_vec(line, "u", "rad_s2", n);
    cfg::header_vec(line, "d", "n_m", n);
    cfg::header_vec(line, "est", "n_m", n);
    if (has_s) cfg::header_vec(line, "S", "rad_s", n);
    cfg::header_vec(line, "q_err", "rad", n);
    if (has_e) cfg::header_vec(line, "e", cfg::error_unit(controller), n);
    line += ",xi_norm_rad_s2,V_j,cold_start\n";
    out << line;
    for (const RobotRecord& r : traj.records) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", r.t);
        line = buf;
        cfg::put_vec(line, r.q);
        cfg::put_vec(line, r.qd);
        cfg::put_vec(line, r.qdd);
        cfg::put_vec(line, r.tau);
        if (has_u) cfg::put_vec(line, r.u);
        cfg::put_vec(line, r.d);
        cfg::put_vec(line, r.estimate);
        if (has_s) cfg::put_vec(line, r.S);
        cfg::put_vec(line, r.q_err);
        if (has_e) cfg::put_vec(line, r.e);
        cfg::put(line, r.xi_norm);
        cfg::put(line, r.V);
        line += r.cold_start ? ",1\n" : ",0\n";
        out << line;
    }
}

inline void write_csv(std::ostream& out, const PhTrajectory& traj) {
    if (traj.records.empty()) return;
    const Eigen::Index n = traj.records.front().x.size();
    const Eigen::Index m = traj.records.front().u.size();
    std::string line = "t_s";
    cfg::header_vec(line, "x", "si", n);
    cfg::header_vec(line, "xdot", "si_s", n);
    cfg::header_vec(line, "u", "n_m", m);
    cfg::header_vec(line, "d", "n_m", m);
    cfg::header_vec(line, "est", "n_m", m);
    line += ",H_j,cold_start\n";
    out << line;
    for (const PhRecord& r : traj.records) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", r.t);
        line = buf;
        cfg::put_vec(line, r.x);
        cfg::put_vec(line, r.xdot);
        cfg::put_vec(line, r.u);
        cfg::put_vec(line, r.d);
        cfg::put_vec(line, r.estimate);
        cfg::put(line, r.H);
        line += r.cold_start ? ",1\n" : ",0\n";
        out << line;
    }
}

template <class Traj, class... Extra>
void emit_csv(const Traj& traj, const std::string& path, Extra&&... extra) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    write_csv(out, traj, std::forward<Extra>(extra)...);
    if (!out) throw Error("I/O error while writing " + path);
}

}  // namespace tdelab
