// Closed-loop integration, signals, batch execution and validation.

#include <gtest/gtest.h>

#include <algorithm>

#include "tdelab/catalog.hpp"
#include "tdelab/runner.hpp"

using namespace tdelab;

namespace {

RobotScenario robot(Scenario s) { return std::get<RobotScenario>(std::move(s)); }

}  // namespace

TEST(Signals, DisturbanceExamples) {
    const Vec c = (Vec(2) << 1.5, -2.0).finished();
    const DisturbanceValue cv = disturbance_eval(constant_disturbance(c), 3.7);
    EXPECT_EQ(cv.d, c);
    EXPECT_EQ(cv.d_dot.norm(), 0.0);

    const DisturbanceValue sv = disturbance_eval(sinusoid_disturbance(c, 4.0), 0.0);
    EXPECT_EQ(sv.d.norm(), 0.0);
    EXPECT_LT((sv.d_dot - 4.0 * c).norm(), 1e-15);

    const Vec r = (Vec(2) << 3.0, 4.0).finished();
    const DisturbanceSpec ramp = ramp_disturbance(Vec::Zero(2), r);
    for (double t : {0.0, 10.0, 1e6}) {
        const DisturbanceValue rv = disturbance_eval(ramp, t);
        EXPECT_DOUBLE_EQ(rv.d_dot.norm(), 5.0);
        EXPECT_LT((rv.d - t * r).norm(), 1e-9 * (1 + t));
    }
    EXPECT_DOUBLE_EQ(derivative_bound(ramp), 5.0);
    EXPECT_DOUBLE_EQ(derivative_bound(sinusoid_disturbance(c, 4.0)), 4.0 * c.norm());
    EXPECT_EQ(derivative_bound(constant_disturbance(c)), 0.0);
}

TEST(Signals, CompositeAndDeclaredEpsilon) {
    DisturbanceSpec comp;
    comp.kind = DisturbanceKind::composite;
    comp.dim = 1;
    comp.components = {constant_disturbance(Vec::Constant(1, 1.0)), sinusoid_disturbance(Vec::Constant(1, 2.0), 3.0)};
    const DisturbanceValue v = disturbance_eval(comp, 0.5);
    EXPECT_NEAR(v.d(0), 1.0 + 2.0 * std::sin(1.5), 1e-15);
    EXPECT_NEAR(v.d_dot(0), 6.0 * std::cos(1.5), 1e-15);
    EXPECT_DOUBLE_EQ(analytic_rate_bound(comp), 6.0);

    DisturbanceSpec low = sinusoid_disturbance(Vec::Constant(1, 2.0), 3.0);
    low.declared_epsilon = 1.0;  // below the analytic rate
    EXPECT_THROW(validate(low), ConfigError);
    low.declared_epsilon = 10.0;
    EXPECT_NO_THROW(validate(low));
    EXPECT_DOUBLE_EQ(derivative_bound(low), 10.0);
}

TEST(Simulate, StartingOnReferenceStaysOnSurface) {
    RobotScenario sc = robot(catalog::case1_constant_d());
    sc.disturbance = zero_disturbance(2);
    sc.horizon = 3.0;
    const Reference ref = make_reference(sc.reference);
    sc.q0 = ref.q_d(0.0);
    sc.qd0 = ref.qd_d(0.0);
    const RobotTrajectory traj = simulate(sc);
    ASSERT_FALSE(traj.diverged);
    double worst = 0.0;
    for (const auto& r : traj.records) worst = std::max(worst, r.S.norm());
    EXPECT_LE(worst, 1e-9);
}

TEST(Simulate, GridShapeAndColdStartPrefix) {
    RobotScenario sc = robot(catalog::case1_sinusoid_d());
    sc.horizon = 1.0;
    const RobotTrajectory traj = simulate(sc);
    ASSERT_EQ(traj.size(), 1001u);
    const std::size_t expected_cold = static_cast<std::size_t>(std::lround(2 * sc.rho / sc.dt));
    EXPECT_EQ(traj.cold_start_steps(), expected_cold);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        EXPECT_EQ(traj.records[i].cold_start, i < expected_cold);
        EXPECT_NEAR(traj.records[i].t, static_cast<double>(i) * sc.dt, 1e-12);
    }
    // During cold start the estimate is zero.
    EXPECT_EQ(traj.records[expected_cold - 1].estimate.norm(), 0.0);
    EXPECT_GT(traj.records[expected_cold].estimate.norm(), 0.0);
}

TEST(Simulate, PassivePendulumEnergyIsNonIncreasing) {
    const RobotScenario sc = robot(catalog::passive_pendulum());
    const RobotTrajectory traj = simulate(sc);
    ASSERT_FALSE(traj.diverged);
    for (std::size_t i = 1; i < traj.size(); ++i) EXPECT_LE(traj.records[i].V, traj.records[i - 1].V + 1e-12);
    EXPECT_LT(traj.records.back().V, traj.records.front().V);

    // Undamped: energy conserved to integrator accuracy.
    RobotScenario lossless = sc;
    lossless.model.pendulum.damping = 0.0;
    const RobotTrajectory t2 = simulate(lossless);
    for (const auto& r : t2.records) EXPECT_NEAR(r.V, t2.records.front().V, 1e-9);
}

TEST(Simulate, TdeEstimateTracksDelayedLumpedDisturbance) {
    // With exact acceleration the Case-1 estimate equals (f + d)(t - rho).
    RobotScenario sc = robot(catalog::case1_sinusoid_d());
    sc.model.two_link.b1 = 0.3;
    sc.model.two_link.b2 = 0.2;
    sc.horizon = 2.0;
    const RobotTrajectory traj = simulate(sc);
    const RobotModel model = build_model(sc.model);
    const int delay = delay_steps(sc.rho, sc.dt);
    for (std::size_t i = static_cast<std::size_t>(2 * delay); i < traj.size(); i += 97) {
        const RobotRecord& past = traj.records[i - static_cast<std::size_t>(delay)];
        const Vec lumped = past.d + model.damping_vector(past.q, past.qd);
        EXPECT_LT((traj.records[i].estimate - lumped).norm(), 1e-9);
    }
}

TEST(Simulate, ConstantDisturbancePortHamiltonianReachesMinimizer) {
    const PhScenario sc = std::get<PhScenario>(catalog::ph_case3_constant_d());
    const PhTrajectory traj = simulate_ph(sc);
    ASSERT_FALSE(traj.diverged);
    const PHModel model = make_ph_pendulum(sc.model);
    EXPECT_LT((traj.records.back().x - model.minimizer).norm(), 1e-6);
}

TEST(Simulate, DivergenceIsReportedNotThrown) {
    RobotScenario sc = robot(catalog::case1_sinusoid_d());
    sc.accel_mode = AccelMode::second_difference;
    sc.horizon = 10.0;
    RobotTrajectory traj;
    ASSERT_NO_THROW(traj = simulate(sc));
    EXPECT_TRUE(traj.diverged);
    EXPECT_GT(traj.diverged_at, 0.0);
    EXPECT_FALSE(traj.diagnostic.empty());
    EXPECT_LT(traj.size(), 10001u);

    const RunReport rep = evaluate_checks(sc, traj);
    EXPECT_TRUE(rep.diverged);
    EXPECT_FALSE(rep.satisfied);
}

TEST(Simulate, ValidationErrorsNameTheField) {
    auto field_of = [](RobotScenario sc) -> std::string {
        try {
            validate(sc);
        } catch (const ConfigError& e) {
            return e.what();
        }
        return "";
    };
    RobotScenario sc = robot(catalog::case1_sinusoid_d());
    RobotScenario bad = sc;
    bad.rho = 0.0015;
    EXPECT_NE(field_of(bad).find("rho_s"), std::string::npos);
    bad = sc;
    bad.dt = -1.0;
    EXPECT_NE(field_of(bad).find("dt_s"), std::string::npos);
    bad = sc;
    bad.horizon = 0.05;
    EXPECT_NE(field_of(bad).find("horizon_s"), std::string::npos);
    bad = sc;
    bad.horizon = 1.0005;
    EXPECT_NE(field_of(bad).find("horizon_s"), std::string::npos);
    bad = sc;
    bad.q0 = Vec::Zero(3);
    EXPECT_NE(field_of(bad).find("initial.q_rad"), std::string::npos);
    bad = sc;
    bad.tracking.K(1, 1) = 0.0;
    EXPECT_NE(field_of(bad).find("controller.K"), std::string::npos);
    bad = sc;
    bad.disturbance = zero_disturbance(1);
    EXPECT_NE(field_of(bad).find("disturbance"), std::string::npos);
    bad = sc;
    bad.model.two_link.m1_kg = -1.0;
    EXPECT_NE(field_of(bad).find("model"), std::string::npos);
    bad = robot(catalog::tde_pd_two_link());
    bad.m_bar = Mat::Zero(2, 2);
    EXPECT_NE(field_of(bad).find("controller.m_bar"), std::string::npos);
    bad = robot(catalog::tde_pd_two_link());
    bad.estimator = EstimatorKind::oracle;
    EXPECT_NE(field_of(bad).find("controller.estimator"), std::string::npos);
    EXPECT_THROW(simulate(bad), ConfigError);

    PhScenario ph = std::get<PhScenario>(catalog::ph_case3_constant_d());
    ph.K = -Mat::Identity(1, 1);
    EXPECT_THROW(validate(ph), ConfigError);
}

TEST(Runner, BatchOfOneEqualsSingleRun) {
    const Scenario sc = catalog::ph_case3_sinusoid_d();
    const RunOutcome single = run_scenario(sc);
    const auto batch = run_batch({sc}, 1);
    ASSERT_EQ(batch.size(), 1u);
    EXPECT_EQ(report_json(batch[0].report, batch[0].config).dump(), report_json(single.report, single.config).dump());
}

TEST(Runner, PermutedBatchGivesIdenticalReports) {
    std::vector<Scenario> scs = {catalog::passive_pendulum(), catalog::ph_case3_constant_d(),
                                 catalog::rk4_order_probe()};
    auto dump = [](const RunOutcome& o) { return report_json(o.report, o.config).dump(); };
    const auto a = run_batch(scs, 3);
    std::vector<Scenario> rev(scs.rbegin(), scs.rend());
    const auto b = run_batch(rev, 2);
    for (std::size_t i = 0; i < scs.size(); ++i) EXPECT_EQ(dump(a[i]), dump(b[scs.size() - 1 - i]));
}

TEST(Runner, FailingScenarioIsIsolated) {
    RobotScenario bad = robot(catalog::passive_pendulum());
    bad.id = "broken";
    bad.dt = 0.0;
    const auto out = run_batch({catalog::passive_pendulum(), bad, catalog::ph_case3_constant_d()}, 2);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_TRUE(out[0].error.empty());
    EXPECT_TRUE(out[0].report.satisfied);
    EXPECT_FALSE(out[1].error.empty());
    EXPECT_EQ(out[1].report.scenario_id, "broken");
    EXPECT_FALSE(out[1].report.satisfied);
    EXPECT_TRUE(out[2].error.empty());
    EXPECT_TRUE(out[2].report.satisfied);
}
