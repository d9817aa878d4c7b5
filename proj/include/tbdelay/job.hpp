/*
 * Copyright (C) 2026 The tbdelay Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include "tbdelay/ocp.hpp"
#include "tbdelay/schedule.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tbdelay {

/// Which equilibria the stability report covers.
enum class EquilibriumSelect { DiseaseFree, Endemic, Both };

struct StabilitySpec {
    EquilibriumSelect equilibrium = EquilibriumSelect::Both;
    std::optional<double> delay;  ///< defaults to delays.d_i
    double bracket_lo = -200.0;
    double bracket_hi = 200.0;
};

struct SweepSpec {
    double beta_min = 50.0;
    double beta_max = 150.0;
    int steps = 101;
};

struct SolverSpec {
    int max_iterations = 2000;
    double pg_tolerance = 1e-6;
    int memory = 10;
    bool sharpen = true;
    std::uint64_t seed = 1;  ///< for randomized test hooks; the solvers themselves are deterministic
    int nm_max_evaluations = 4000;
    double nm_initial_step = 0.05;
    double gradient_step = 1e-4;
    double hessian_step = 1e-3;
    int polish_iterations = 20;
};

/**
 * A fully resolved job. Every section is optional in the file; omitted
 * fields take the reference values (transmission coefficient 100,
 * population 30000, no delays, T = 5 with 2500 steps, L1 cost with
 * weights 50, and the (76, 36, 5, 2, 1)/120 initial split).
 */
struct JobSpec {
    std::string scenario = "custom";
    ModelParams params;
    DelayConfig delays;
    HistorySpec history;
    Grid grid;
    ObjectiveSpec objective;
    ControlVec lower{0.0, 0.0};
    ControlVec upper{1.0, 1.0};
    std::optional<ArcSchedule> schedule;  ///< fixed controls for simulate, start point for iop
    StabilitySpec stability;
    SweepSpec sweep;
    SolverSpec solver;

    OcpProblem problem() const;
    OcpOptions ocp_options() const;
    void validate() const;
};

/// Parses and validates a job. Malformed JSON, unknown keys and wrong types throw ParameterError.
JobSpec parse_job(const nlohmann::json& doc);
JobSpec parse_job_text(const std::string& text);
JobSpec load_job(const std::filesystem::path& path);

/// Every field of the resolved job, keys sorted; `parse_job(to_json(j))` reproduces `j`.
nlohmann::json to_json(const JobSpec& job);

/// 64-bit FNV-1a of the canonical (resolved, compact) job text, as 16 hex digits.
std::string job_hash(const JobSpec& job);

struct RunManifest {
    std::string command;
    std::string job_hash;
    std::string tool_version;
    std::string started_utc;
    std::string finished_utc;
    int exit_code = 0;
    std::vector<std::string> outputs;  ///< file names relative to the output directory

    nlohmann::json to_json() const;
};

/// Current UTC time as ISO 8601 with second resolution.
std::string utc_timestamp();

} // namespace tbdelay
