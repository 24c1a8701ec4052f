#pragma once

// Claim checks and named suites.
//
// A suite is a list of independent items, each producing a PASS/FAIL verdict
// and a one-line detail string. `paper-claims` covers the structural, TDE,
// closed-loop and super-twisting claims; `numerics` covers the integrator and
// estimator numerics; `demos` runs every built-in scenario against its own
// check.

#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tdelab/catalog.hpp"
#include "tdelab/runner.hpp"

namespace tdelab {

struct ClaimOutcome {
    bool pass = false;
    std::string detail;
};

struct SuiteItem {
    std::string id;
    std::string title;
    std::function<ClaimOutcome()> run;
};

struct Suite {
    std::string name;
    std::string description;
    std::vector<SuiteItem> items;
};

struct SuiteRow {
    std::string id;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

namespace claims {

inline std::string fmt(double x) {
    std::ostringstream os;
    os.precision(4);
    os << x;
    return os.str();
}

inline std::string describe(const RunReport& r) {
    if (r.diverged) return "diverged: " + r.diagnostic;
    if (r.bound) return "observed " + fmt(r.bound->observed_steady_max) + " <= " + fmt(r.bound->theoretical_bound);
    return r.satisfied ? "ok" : "check failed";
}

/// Skew-symmetry of Mdot - 2C and positive inertia over random workspace samples.
inline ClaimOutcome structural(int samples = 1000, std::uint64_t seed = 11) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double worst_rel = 0.0;
    double min_eig = std::numeric_limits<double>::infinity();
    TwoLinkParams damped;
    damped.b1 = 0.3;
    damped.b2 = 0.2;
    for (const RobotModel& model : {make_pendulum({}), make_two_link({}), make_two_link(damped)}) {
        for (int i = 0; i < samples; ++i) {
            const RobotState s = sample_state(model, rng);
            Vec x(model.dof);
            for (int j = 0; j < model.dof; ++j) x(j) = gauss(rng);
            const Mat N = model.mass_matrix_rate(s.q, s.qd) - 2.0 * model.coriolis_matrix(s.q, s.qd);
            const double scale = 1.0 + spectral_norm(N) * x.squaredNorm();
            worst_rel = std::max(worst_rel, std::abs(skew_symmetry_residual(model, s, x)) / scale);
            worst_rel = std::max(worst_rel, (N + N.transpose()).norm() / (1.0 + N.norm()));
            min_eig = std::min(min_eig, lambda_min(model.mass_matrix(s.q)));
        }
    }
    return {worst_rel <= 1e-9 && min_eig > 0.0,
            "max relative skew residual " + fmt(worst_rel) + ", min lambda(M) " + fmt(min_eig)};
}

inline ClaimOutcome tde_recursion() {
    const RobotScenario sc = std::get<RobotScenario>(catalog::tde_pd_two_link());
    const RobotTrajectory traj = simulate(sc);
    if (traj.diverged) return {false, "diverged: " + traj.diagnostic};
    const TdeIdentityResiduals r = tde_identity_residuals(sc, traj);
    return {r.steps > 0 && r.recursion <= 1e-8 && r.closed_loop <= 1e-8,
            "recursion residual " + fmt(r.recursion) + ", e = qdd - u residual " + fmt(r.closed_loop) + " over " +
                std::to_string(r.steps) + " steps"};
}

inline ClaimOutcome scenario_claim(const Scenario& sc) {
    const RunReport r = run_scenario(sc).report;
    return {r.satisfied && !r.diverged, describe(r)};
}

inline ClaimOutcome case1_sinusoid_with_rho_halving() {
    const RobotScenario base = std::get<RobotScenario>(catalog::case1_sinusoid_d());
    RobotScenario half = base;
    half.rho = base.rho / 2;
    const RunReport a = run_scenario(base).report;
    const RunReport b = run_scenario(half).report;
    if (!a.bound || !b.bound) return {false, describe(a) + "; " + describe(b)};
    const double ratio = a.bound->observed_steady_max / b.bound->observed_steady_max;
    const bool pass = a.satisfied && b.satisfied && ratio >= 1.5 && ratio <= 2.5;
    return {pass, describe(a) + "; halving rho shrinks steady ||S|| by " + fmt(ratio) + "x"};
}

inline ClaimOutcome all_of(const std::vector<Scenario>& scenarios) {
    ClaimOutcome out{true, ""};
    for (const auto& sc : scenarios) {
        const RunReport r = run_scenario(sc).report;
        out.pass = out.pass && r.satisfied && !r.diverged;
        out.detail += (out.detail.empty() ? "" : "; ") + r.scenario_id + ": " + describe(r);
    }
    return out;
}

inline ClaimOutcome super_twisting() {
    StGains g;
    g.k1 = Vec::Constant(1, 2.0);
    g.k2 = Vec::Constant(1, 2.0);
    const Mat P = default_st_lyapunov_matrix(g);
    const StProbeResult claimed = st_definiteness_probe(g, P, StMode::claimed, {});
    StInjection e;
    e.kind = StInjection::Kind::constant;
    e.value = Vec::Constant(1, 1.0);
    const StProbeResult corrected = st_definiteness_probe(g, P, StMode::corrected, e);
    const bool pass = claimed.verdict == StVerdict::negative_definite_band && corrected.max_normalized > 0.0;
    return {pass, std::string("claimed form, zero injection: ") + to_string(claimed.verdict) + " (max " +
                      fmt(claimed.max_normalized) + "); corrected form, constant e: " + to_string(corrected.verdict) +
                      " (max " + fmt(corrected.max_normalized) + ")"};
}

inline ClaimOutcome d_not_constant() {
    const RobotModel model = make_two_link({});
    const Vec q0 = Vec::Zero(2);
    const Mat m_bar = model.mass_matrix(q0);
    std::vector<Vec> qs;
    for (double q2 : {0.0, M_PI / 2, M_PI}) qs.push_back(catalog::vec2(0.0, q2));
    const DVariation dv = d_variation_probe(model, m_bar, qs);
    const Vec v = catalog::vec2(1.0, 1.0);
    const double rho = 1e-2;
    const double xi_slow = constant_velocity_xi(model, m_bar, q0, v, rho);
    const double xi_fast = constant_velocity_xi(model, m_bar, q0, Vec(10.0 * v), rho);
    const double ratio = xi_fast / xi_slow;
    return {dv.max_pairwise_deviation > 0.1 && ratio > 10.0,
            "max ||D(qi) - D(qj)|| " + fmt(dv.max_pairwise_deviation) + "; ||xi|| ratio at 10x velocity " +
                fmt(ratio)};
}

/// Terminal-state differences under dt halving on a smooth closed loop.
inline ClaimOutcome rk4_order() {
    RobotScenario sc = std::get<RobotScenario>(catalog::rk4_order_probe());
    std::vector<Vec> terminal;
    for (double dt : {1e-2, 5e-3, 2.5e-3}) {
        sc.dt = dt;
        const RobotTrajectory traj = simulate(sc);
        if (traj.diverged) return {false, "diverged: " + traj.diagnostic};
        Vec x(2 * traj.records.back().q.size());
        x << traj.records.back().q, traj.records.back().qd;
        terminal.push_back(x);
    }
    const double ratio = (terminal[0] - terminal[1]).norm() / (terminal[1] - terminal[2]).norm();
    return {ratio >= 8.0 && ratio <= 32.0, "error ratio under dt halving " + fmt(ratio) + " (4th order: 16)"};
}

/// Second difference of a sampled quadratic recovers its constant acceleration.
inline ClaimOutcome second_difference_exact() {
    const double dt = 1e-3, rho = 1e-2;
    RobotHistory buf(dt, RobotHistory::capacity_for(dt, rho));
    const Vec a = catalog::vec2(0.4, -1.3), b = catalog::vec2(2.0, 0.7), c = catalog::vec2(-3.1, 0.45);
    double worst = 0.0;
    for (int k = 0; k <= 200; ++k) {
        const double t = k * dt;
        buf.push(RobotSample{Vec(a + b * t + c * t * t), Vec(b + 2 * c * t), Vec(2 * c), Vec::Zero(2), Vec::Zero(2)});
        if (const auto acc = second_difference_accel(buf, t, rho)) worst = std::max(worst, (*acc - 2 * c).norm());
    }
    return {worst <= 1e-9, "max |second difference - exact| " + fmt(worst)};
}

inline bool same_bits(const RobotTrajectory& a, const RobotTrajectory& b) {
    if (a.records.size() != b.records.size()) return false;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        const RobotRecord& x = a.records[i];
        const RobotRecord& y = b.records[i];
        if (x.t != y.t || x.q != y.q || x.qd != y.qd || x.qdd != y.qdd || x.tau != y.tau || x.estimate != y.estimate ||
            x.S != y.S || x.V != y.V) {
            return false;
        }
    }
    return true;
}

/// Repeat runs, including runs issued concurrently and via a config round-trip, agree bit for bit.
inline ClaimOutcome determinism() {
    const Scenario sc = catalog::case1_sinusoid_d();
    const RobotTrajectory first = simulate(std::get<RobotScenario>(sc));
    const RobotTrajectory again = simulate(std::get<RobotScenario>(sc));
    const Scenario echoed = scenario_from_json(scenario_to_json(sc));
    const auto batch = run_batch({catalog::passive_pendulum(), echoed, sc}, 3);
    const bool pass = same_bits(first, again) && same_bits(first, std::get<RobotTrajectory>(batch[1].trajectory)) &&
                      same_bits(first, std::get<RobotTrajectory>(batch[2].trajectory));
    return {pass, pass ? "repeat, concurrent and config-echo runs are bit-identical" : "runs differ"};
}

}  // namespace claims

inline std::vector<Suite> suites() {
    using namespace claims;
    Suite paper{"paper-claims", "One row per analytical claim, each checked by simulation or sampling", {}};
    paper.items = {
        {"AC-1", "Mdot - 2C skew-symmetric, M positive definite", [] { return structural(); }},
        {"AC-2", "TDE error recursion e = D e(t-rho) + xi and e = qdd - u", tde_recursion},
        {"AC-3", "Case 1, constant disturbance: asymptotic tracking", [] { return scenario_claim(catalog::case1_constant_d()); }},
        {"AC-4", "Case 1, sinusoidal disturbance: ultimate bound and rho scaling", case1_sinusoid_with_rho_halving},
        {"AC-5", "Case 2, sinusoidal disturbance: ultimate bound with gravity bound",
         [] { return scenario_claim(catalog::case2_sinusoid_d()); }},
        {"AC-6", "PD regulation variants: bounded / asymptotic",
         [] {
             return all_of({catalog::pd_reg_case1_sinusoid_d(), catalog::pd_reg_case2_sinusoid_d(),
                            catalog::pd_reg_case2_constant_d_no_gravity()});
         }},
        {"AC-7", "Port-Hamiltonian pendulum: stabilization and H-dot inequality",
         [] { return all_of({catalog::ph_case3_constant_d(), catalog::ph_case3_sinusoid_d()}); }},
        {"AC-8", "Super-twisting: claimed form decreases V, corrected form does not", super_twisting},
        {"AC-9", "D varies with configuration, xi depends on the state", d_not_constant},
    };
    Suite numerics{"numerics", "Integrator order, finite-difference exactness and determinism", {}};
    numerics.items = {
        {"AC-10a", "RK4 terminal error shrinks ~16x per dt halving", rk4_order},
        {"AC-10b", "Second difference exact on quadratics", second_difference_exact},
        {"AC-10c", "Bit-identical repeat runs", determinism},
    };
    Suite demos{"demos", "Every built-in scenario against its own check", {}};
    for (const auto& e : catalog::entries()) {
        demos.items.push_back({e.name, e.description, [make = e.make] { return scenario_claim(make()); }});
    }
    return {paper, numerics, demos};
}

inline Suite find_suite(const std::string& name) {
    for (auto& s : suites()) {
        if (s.name == name) {
            if (s.items.empty()) throw ConfigError("suite", "suite '" + name + "' has no members");
            return s;
        }
    }
    throw ConfigError("suite", "unknown suite '" + name + "'");
}

/// Runs the items concurrently; rows come back in suite order. An exception
/// inside an item is reported as a failed row.
inline std::vector<SuiteRow> run_suite(const Suite& suite, unsigned jobs = 0) {
    if (suite.items.empty()) throw ConfigError("suite", "suite '" + suite.name + "' has no members");
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    std::vector<SuiteRow> rows(suite.items.size());
    for (std::size_t start = 0; start < suite.items.size(); start += jobs) {
        const std::size_t stop = std::min(suite.items.size(), start + jobs);
        std::vector<std::future<SuiteRow>> pending;
        for (std::size_t i = start; i < stop; ++i) {
            pending.push_back(std::async(std::launch::async, [&item = suite.items[i]] {
                SuiteRow row{item.id, item.title, false, "", 0.0};
                const auto t0 = std::chrono::steady_clock::now();
                try {
                    const ClaimOutcome o = item.run();
                    row.pass = o.pass;
                    row.detail = o.detail;
                } catch (const std::exception& e) {
                    row.detail = std::string("error: ") + e.what();
                }
                row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                return row;
            }));
        }
        for (std::size_t i = start; i < stop; ++i) rows[i] = pending[i - start].get();
    }
    return rows;
}

}  // namespace tdelab
