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

#include <array>

namespace tbdelay {

/**
 * Epidemiological rates of the five-compartment TB model.
 *
 * Rates are per year, fractions and efficacies are dimensionless. The
 * defaults are the reference parameter set with a transmission
 * coefficient of 100.
 */
struct ModelParams {
    double beta    = 100.0;        ///< transmission coefficient
    double mu      = 1.0 / 70.0;   ///< birth and death rate
    double delta   = 12.0;         ///< rate of leaving early latency L1
    double phi     = 0.05;         ///< proportion of L1 progressing to I
    double omega   = 0.0002;       ///< endogenous reactivation of L2
    double omega_r = 0.00002;      ///< endogenous reactivation of R
    double sigma   = 0.25;         ///< reinfection factor for L2
    double sigma_r = 0.25;         ///< reinfection factor for R
    double tau0    = 2.0;          ///< treatment recovery rate of I
    double tau1    = 2.0;          ///< treatment recovery rate of L1
    double tau2    = 1.0;          ///< treatment recovery rate of L2
    double n_pop   = 30000.0;      ///< total population
    double eps1    = 0.5;          ///< efficacy of the u1 treatment
    double eps2    = 0.5;          ///< efficacy of the u2 treatment

    static ModelParams reference(double beta = 100.0)
    {
        ModelParams p;
        p.beta = beta;
        return p;
    }

    /// delta + tau1 + mu
    double c1() const { return delta + tau1 + mu; }
    /// omega + tau2 + mu
    double c2() const { return omega + tau2 + mu; }

    /// Throws ParameterError on negative/non-finite rates, fractions outside [0,1] or n_pop <= 0.
    void validate() const;
};

struct StateVec {
    double s  = 0.0;
    double l1 = 0.0;
    double i  = 0.0;
    double l2 = 0.0;
    double r  = 0.0;

    double sum() const { return s + l1 + i + l2 + r; }
    bool finite() const;

    Eigen::Matrix<double, 5, 1> vector() const { return {s, l1, i, l2, r}; }
    static StateVec from(const Eigen::Matrix<double, 5, 1>& v) { return {v[0], v[1], v[2], v[3], v[4]}; }

    /// (S, L1, I, L2); R is recovered from the population constraint.
    Eigen::Vector4d reduced() const { return {s, l1, i, l2}; }
    static StateVec from_reduced(const Eigen::Vector4d& x, double n_pop)
    {
        return {x[0], x[1], x[2], x[3], n_pop - x.sum()};
    }

    friend bool operator==(const StateVec&, const StateVec&) = default;
};

struct ControlVec {
    double u1 = 0.0;
    double u2 = 0.0;

    friend bool operator==(const ControlVec&, const ControlVec&) = default;
};

enum class EquilibriumKind { DiseaseFree, Endemic };

struct EquilibriumPoint {
    StateVec state;
    EquilibriumKind kind = EquilibriumKind::DiseaseFree;
    double residual_norm = 0.0;  ///< max-norm of the steady-state residual (individuals/yr)
};

struct R0Breakdown {
    double numerator   = 0.0;
    double denominator = 0.0;
    double value       = 0.0;
};

/**
 * Time derivative of the controlled five-compartment system.
 *
 * `i_delayed` is I(t - d_I); `v1`, `v2` are the delayed controls
 * u_k(t - d_uk). With v1 = v2 = 0 this is the uncontrolled model.
 * Throws DomainError on non-finite input.
 */
StateVec rhs_controlled(const StateVec& x, double i_delayed, double v1, double v2, const ModelParams& p);

/// Component sum of rhs_controlled; zero in exact arithmetic.
double sum_derivative_check(const StateVec& x, double i_delayed, double v1, double v2, const ModelParams& p);

/// Right-hand side of the four-equation system, R = N - S - L1 - I - L2 eliminated.
Eigen::Vector4d reduced_rhs(const Eigen::Vector4d& x, double i_delayed, double v1, double v2,
                            const ModelParams& p);

/// d(reduced_rhs)/dx with the delayed I held fixed; the delayed part is -tau0 on the I row.
Eigen::Matrix4d reduced_jacobian(const Eigen::Vector4d& x, double v1, double v2, const ModelParams& p);

R0Breakdown basic_reproduction_number(const ModelParams& p);

EquilibriumPoint disease_free_equilibrium(const ModelParams& p);

struct EndemicOptions {
    int max_iterations = 100;
    double tolerance = 1e-10;  ///< residual max-norm relative to n_pop
};

/**
 * Endemic steady state by damped Newton on the four-equation system,
 * falling back to a bracketed scan along the fixed-I steady-state curve.
 *
 * Steady states do not depend on the delays (a constant solution makes
 * I(t - d) = I(t)). Throws NoEndemicEquilibrium when R0 <= 1 and
 * ConvergenceFailure when no seed converges to a positive-I point.
 */
EquilibriumPoint endemic_equilibrium(const ModelParams& p, const EndemicOptions& opts = {});

/// Newton from a caller-chosen seed (S, L1, I, L2). Exposed for uniqueness checks.
EquilibriumPoint endemic_equilibrium_from(const ModelParams& p, const Eigen::Vector4d& seed,
                                          const EndemicOptions& opts = {});

/// Max-norm of the uncontrolled steady-state residual at `x` (delayed I = I).
double steady_state_residual(const StateVec& x, const ModelParams& p);

} // namespace tbdelay
