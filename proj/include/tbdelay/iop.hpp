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

#include "tbdelay/nelder_mead.hpp"
#include "tbdelay/ocp.hpp"
#include "tbdelay/schedule.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace tbdelay {

struct ScheduleEvaluation {
    Trajectory trajectory;
    double objective = 0.0;
};

/**
 * Integrates the bang-bang schedule with the RK4 integrator (steps split at
 * every switch and delayed switch) and evaluates the cost: the integral of
 * I + L2 accumulated by the integration stages plus W_k times the exact time
 * u_k is on.
 */
ScheduleEvaluation simulate_schedule(const ArcSchedule& sched, const OcpProblem& prob);
double schedule_objective(const ArcSchedule& sched, const OcpProblem& prob);

struct IopOptions {
    NelderMeadOptions simplex;
    double gradient_step = 1e-4;  ///< central-difference step for the polish (yr)
    double hessian_step = 1e-3;
    int polish_iterations = 20;
    double gradient_tolerance = 1e-7;  ///< FD gradient max-norm relative to max(1, J)
    int threads = 1;
};

struct IopResult {
    ArcSchedule schedule;
    double objective = 0.0;
    std::vector<double> gradient;  ///< FD gradient in switch times at the result
    bool converged = false;
    int evaluations = 0;
    std::string message;
    Trajectory trajectory;
};

/// Nelder-Mead over the switch times followed by a finite-difference Newton polish.
IopResult optimize_switch_times(const ArcSchedule& init, const OcpProblem& prob, const IopOptions& opts = {});

struct HessianReport {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd eigenvalues;  ///< ascending
    bool positive_definite = false;
    double asymmetry = 0.0;       ///< |H - H^T|_max / |H|_max before symmetrisation
    std::string coordinates;
    std::string warning;
};

/// Central-difference Hessian of `fn` at `x`, symmetrised. `asymmetry` receives the relative defect before symmetrising.
Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& fn, const Eigen::VectorXd& x,
                           double step, double* asymmetry = nullptr, int threads = 1);

/// Central-difference gradient.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& fn, const Eigen::VectorXd& x,
                            double step, int threads = 1);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
Eigen::VectorXd jacobi_eigenvalues(const Eigen::MatrixXd& a, double tol = 1e-14, int max_sweeps = 100);

/**
 * FD Hessian of the switching-time objective in arc-duration coordinates:
 * all switch times merged in increasing order, xi_1 = tau_1 and
 * xi_j = tau_j - tau_{j-1}. These are the variables of the arc
 * parametrisation, in which the reference certificate is stated.
 */
HessianReport hessian_fd(const ArcSchedule& sched_opt, const OcpProblem& prob, double step = 1e-3, int threads = 1);

struct SweepRecord {
    double beta = 0.0;
    double objective = 0.0;
    StateVec terminal;
    std::vector<double> switches;  ///< u1 switches then u2 switches
    bool converged = false;
    bool law_satisfied = false;
};

struct SweepResult {
    std::vector<SweepRecord> records;

    int switch_columns() const;
};

/**
 * Ascending continuation in beta over `steps` equally spaced values:
 * each optimal control problem starts from the previous optimum. A record
 * that did not converge is flagged and the sweep continues.
 */
SweepResult beta_sweep(double beta_lo, double beta_hi, int steps, const OcpProblem& tmpl, const OcpOptions& opts = {},
                       const std::function<void(const SweepRecord&)>& progress = {});

/// Shape checks on a sweep: R(T) rises then falls, the other terminal values, J and switch times rise.
struct SweepChecks {
    bool r_unimodal = false;
    double r_peak_beta = 0.0;
    bool r_peak_interior = false;
    bool i_increasing = false;
    bool l1_increasing = false;
    bool l2_increasing = false;
    bool objective_increasing = false;
    bool switches_increasing = false;  ///< every switch column non-decreasing; false if the arc count changes
    bool all_converged = false;
    bool all_law_satisfied = false;

    bool passed() const
    {
        return r_unimodal && r_peak_interior && i_increasing && l1_increasing && l2_increasing &&
               objective_increasing && switches_increasing;
    }
};

/// `rel_tol` absorbs round-off: a step counts as decreasing only below -rel_tol * |value|.
SweepChecks check_sweep(const SweepResult& sweep, double rel_tol = 1e-9);

} // namespace tbdelay
