#pragma once

// Scenario execution: simulate, evaluate checks, package the result.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <future>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "tdelab/checks.hpp"
#include "tdelab/config.hpp"
#include "tdelab/sim.hpp"

namespace tdelab {

using AnyTrajectory = std::variant<RobotTrajectory, PhTrajectory>;

struct RunOutcome {
    RunReport report;
    AnyTrajectory trajectory;
    json config;        // resolved scenario echo
    std::string error;  // set when the run itself failed (batch isolation)
};

inline RunOutcome run_scenario(const Scenario& scenario) {
    return std::visit(
        [&](const auto& sc) -> RunOutcome {
            using T = std::decay_t<decltype(sc)>;
            RunOutcome out;
            out.config = scenario_to_json(scenario);
            if constexpr (std::is_same_v<T, PhScenario>) {
                PhTrajectory traj = simulate_ph(sc);
                out.report = evaluate_checks(sc, traj);
                out.trajectory = std::move(traj);
            } else {
                RobotTrajectory traj = simulate(sc);
                out.report = evaluate_checks(sc, traj);
                out.trajectory = std::move(traj);
            }
            return out;
        },
        scenario);
}

/// Runs scenarios concurrently (each owns all of its state) and returns the
/// outcomes in input order, so results never depend on scheduling. A failure
/// in one scenario is recorded on its outcome and does not affect the others.
inline std::vector<RunOutcome> run_batch(const std::vector<Scenario>& scenarios, unsigned jobs = 0) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    std::vector<RunOutcome> results(scenarios.size());
    for (std::size_t start = 0; start < scenarios.size(); start += jobs) {
        const std::size_t stop = std::min(scenarios.size(), start + jobs);
        std::vector<std::future<RunOutcome>> pending;
        for (std::size_t i = start; i < stop; ++i) {
            pending.push_back(std::async(std::launch::async, [&scenarios, i] {
                try {
                    return run_scenario(scenarios[i]);
                } catch (const std::exception& e) {
                    RunOutcome failed;
                    failed.report.scenario_id = scenario_id(scenarios[i]);
                    failed.report.diagnostic = e.what();
                    failed.error = e.what();
                    return failed;
                }
            }));
        }
        for (std::size_t i = start; i < stop; ++i) results[i] = pending[i - start].get();
    }
    return results;
}

inline void write_trajectory_csv(const RunOutcome& outcome, const std::string& path) {
    if (const auto* rt = std::get_if<RobotTrajectory>(&outcome.trajectory)) {
        const std::string kind = outcome.config.at("controller").at("kind").get<std::string>();
        ControllerKind ck = ControllerKind::none;
        for (const auto& [name, value] : cfg::kControllers) {
            if (kind == name) ck = value;
        }
        emit_csv(*rt, path, ck);
    } else {
        emit_csv(std::get<PhTrajectory>(outcome.trajectory), path);
    }
}

}  // namespace tdelab
