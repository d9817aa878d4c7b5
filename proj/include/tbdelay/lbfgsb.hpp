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

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace tbdelay {

/// Returns f(x) and writes the gradient into `grad` (already sized).
using GradObjective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct BoxLbfgsOptions {
    int memory = 10;
    int max_iterations = 2000;
    double pg_tolerance = 1e-6;   ///< stop when |projected_gradient|_inf < pg_tolerance * max(1, |f|)
    double armijo = 1e-4;
    int max_backtracks = 50;
    /// Relative reduction of f below which the run counts as stalled.
    double stall_tolerance = 1e-15;
    /**
     * Diagonal metric weights (empty = all ones). Stationarity and the
     * steepest-descent fallback use g / weight, the gradient with respect
     * to the weighted inner product; quadrature weights make it mesh independent.
     */
    Eigen::VectorXd metric;
};

struct BoxLbfgsResult {
    Eigen::VectorXd x;
    double f = 0.0;
    double pg_norm = 0.0;     ///< projected-gradient max-norm at x
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    std::string message;
    std::vector<double> history;  ///< objective at the start point and after each accepted step
};

/**
 * Projected limited-memory BFGS on a box. Variables sitting on a bound with
 * the gradient pointing outward are held fixed; the two-loop recursion
 * acts on the rest, and a projected Armijo search takes the step.
 * Accepted iterates never increase f.
 */
BoxLbfgsResult minimize_box(const GradObjective& fn, Eigen::VectorXd x0, const Eigen::VectorXd& lo,
                            const Eigen::VectorXd& hi, const BoxLbfgsOptions& opts = {});

/// g with components pushing against an active bound set to zero; the stationarity measure on the box.
Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Eigen::VectorXd& lo,
                                   const Eigen::VectorXd& hi);

} // namespace tbdelay
