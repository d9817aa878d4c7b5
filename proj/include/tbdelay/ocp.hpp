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

#include "tbdelay/integrator.hpp"
#include "tbdelay/lbfgsb.hpp"
#include "tbdelay/objective.hpp"
#include "tbdelay/schedule.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace tbdelay {

struct OcpProblem {
    ModelParams params;
    DelayConfig delays;
    HistorySpec history;
    Grid grid;
    ObjectiveSpec objective;
    ControlVec lower{0.0, 0.0};
    ControlVec upper{1.0, 1.0};

    /// Reference scenario: the given weights, delays and transmission coefficient, T = 5.
    static OcpProblem reference(double beta, const DelayConfig& delays, double w, ObjectiveKind kind = ObjectiveKind::L1,
                                int n_steps = 2500);
    void validate() const;
};

/// Sensitivity of the cost to the state, dJ/dx (positive: more infected, more cost).
struct AdjointVec {
    double lam_s = 0.0;
    double lam_l1 = 0.0;
    double lam_i = 0.0;
    double lam_l2 = 0.0;

    Eigen::Vector4d vector() const { return {lam_s, lam_l1, lam_i, lam_l2}; }
};

/// phi_k = -W_k + eps_k lam_Lk(t + d_uk) L_k(t + d_uk), and -W_k on the last d_uk years; u_k = 1 where phi_k > 0.
struct SwitchingTrace {
    std::vector<double> phi1;
    std::vector<double> phi2;

    const std::vector<double>& operator[](int k) const { return k == 0 ? phi1 : phi2; }
};

struct OcpOptions {
    BoxLbfgsOptions solver;
    /// Replace the converged L1 controls by bang-bang arcs with switches at the zeros of phi.
    bool sharpen = true;
};

struct OcpDiagnostics {
    int iterations = 0;
    int evaluations = 0;
    double stationarity = 0.0;   ///< projected-gradient max-norm (per unit time)
    bool converged = false;
    std::string message;
    double raw_objective = 0.0;  ///< transcription optimum before sharpening
    bool sharpened = false;
    std::vector<double> objective_history;  ///< transcription objective after each accepted step
};

struct OcpSolution {
    Trajectory trajectory;
    std::vector<AdjointVec> adjoints;
    SwitchingTrace switching;
    double objective_value = 0.0;
    OcpDiagnostics diagnostics;
    std::optional<ArcSchedule> schedule;  ///< set when the controls were sharpened
};

struct BangBangReport {
    bool law_checked = false;
    bool law_satisfied = true;
    std::array<int, 2> law_violations{0, 0};
    std::array<int, 2> switch_count{0, 0};
    std::array<std::vector<double>, 2> crossings;       ///< zeros of phi_k (linear interpolation)
    std::array<std::vector<double>, 2> crossing_slopes; ///< finite-difference dphi_k/dt at each zero
    double min_abs_slope = 0.0;
    bool strict = false;                                ///< every crossing transversal
    std::string note;
};

/// Trapezoidal quadrature of the running cost over the stored nodes.
double trapezoid_objective(const OcpProblem& prob, const Trajectory& traj);

/**
 * Discretize-then-optimize: trapezoidal transcription in the node controls,
 * discrete-adjoint gradients and projected L-BFGS. An empty `init` starts
 * from u = 0.5. Returns NotConverged (diagnostics.converged = false) at the
 * iteration cap rather than throwing.
 */
OcpSolution solve(const OcpProblem& prob, const std::vector<ControlVec>& init = {}, const OcpOptions& opts = {});

/// Backward trapezoidal sweep of the continuous adjoint equations from lambda(T) = 0.
std::vector<AdjointVec> adjoint_backward(const OcpProblem& prob, const Trajectory& traj);

SwitchingTrace switching_trace(const OcpProblem& prob, const Trajectory& traj, const std::vector<AdjointVec>& adjoints);

/// Control-law consistency (|phi| > 1e-3 W_k), switch counting and transversality of the crossings.
BangBangReport verify_bang_bang(const OcpProblem& prob, const OcpSolution& sol);

} // namespace tbdelay
