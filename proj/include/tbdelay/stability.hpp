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

#include "tbdelay/model.hpp"
#include "tbdelay/polynomial.hpp"

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace tbdelay {

/// x'(t) = a1 x(t) + a2 x(t - delay) in deviation coordinates (s, l1, i, l2).
struct LinearizedDDE {
    Eigen::Matrix4d a1 = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d a2 = Eigen::Matrix4d::Zero();  ///< diag(0, 0, -tau0, 0)
    double delay = 0.0;
};

/// Delta(lambda) = p(lambda) + q(lambda) exp(-lambda * delay).
struct QuasiPolynomial {
    Polynomial p;
    Polynomial q;
    double delay = 0.0;

    double operator()(double lambda) const;
    std::complex<double> operator()(std::complex<double> lambda) const;
    QuasiPolynomial derivative() const;
    /// p + q, the characteristic polynomial at zero delay.
    Polynomial zero_delay() const { return p + q; }
};

/// Coefficients of P(lambda) = lambda^4 + a3 lambda^3 + a2 lambda^2 + a1 lambda + a0 and the rate shorthands.
struct CharCoefficients {
    double a0 = 0, a1 = 0, a2 = 0, a3 = 0;
    double c1 = 0, c2 = 0, c3 = 0, c4 = 0, c5 = 0, c6 = 0;

    Polynomial polynomial() const { return Polynomial{a0, a1, a2, a3, 1.0}; }
};

/// z^4 + alpha3 z^3 + alpha2 z^2 + alpha1 z + alpha0 with z = b^2.
struct CrossingQuartic {
    double alpha0 = 0, alpha1 = 0, alpha2 = 0, alpha3 = 0;

    Polynomial polynomial() const { return Polynomial{alpha0, alpha1, alpha2, alpha3, 1.0}; }
};

/// Routh-Hurwitz conditions for a monic quartic.
struct RouthHurwitz {
    bool a0_positive = false;  ///< at the disease free point: R0 < 1
    bool a1_positive = false;
    bool a2_positive = false;
    bool a3_positive = false;
    bool a3a2_gt_a1 = false;
    bool a3a2a1_gt_a1sq_a3sqa0 = false;

    bool all() const
    {
        return a0_positive && a1_positive && a2_positive && a3_positive && a3a2_gt_a1 && a3a2a1_gt_a1sq_a3sqa0;
    }
};

enum class VerdictKind { StableZeroDelay, UnstableAnyDelay, CrossingExists, StableAtGivenDelay, Inconclusive };

const char* to_string(VerdictKind kind);

struct StabilityVerdict {
    VerdictKind kind = VerdictKind::Inconclusive;
    std::string details;                   ///< which criterion fired, or why it is inconclusive
    double delta_at_zero = 0.0;            ///< Delta(0)
    RouthHurwitz routh_hurwitz;            ///< of the zero-delay polynomial
    Polynomial zero_delay_polynomial;
    Polynomial modulus_polynomial;         ///< in z = b^2
    std::vector<double> crossing_b;        ///< b > 0 with |p(ib)| = |q(ib)|
    std::vector<double> real_roots;        ///< real zeros of Delta in the scan bracket
    std::vector<std::complex<double>> located_roots;  ///< zeros found by the argument-principle scan
    std::optional<int> right_half_plane_count;
    std::optional<double> rightmost_real_part;
};

struct RealRoots {
    std::vector<double> roots;
    std::vector<double> derivative_zeros;  ///< zeros of Delta' in the same bracket
};

struct Rect {
    double x0, x1, y0, y1;
};

struct ClassifyOptions {
    double bracket_lo = -200.0;
    double bracket_hi = 200.0;
    double scan_left = -0.5;  ///< left edge of the argument-principle rectangle
    int threads = 1;
};

/// A1 is the Jacobian of the four-equation system at `eq`; A2 = diag(0, 0, -tau0, 0).
LinearizedDDE linearize(const ModelParams& p, const EquilibriumPoint& eq, double delay = 0.0);

/// Expands det(lambda I - A1 - exp(-lambda d) A2) into p + q exp(-lambda d).
QuasiPolynomial characteristic_function(const LinearizedDDE& lin);

/// det(lambda I - A1 - exp(-lambda d) A2) by complex LU.
std::complex<double> char_eval(const LinearizedDDE& lin, std::complex<double> lambda, double d);

/// Closed-form coefficients of P at the disease free equilibrium.
CharCoefficients dfe_char_coefficients(const ModelParams& p);

RouthHurwitz routh_hurwitz_quartic(const CharCoefficients& cc);
/// Same conditions on a quartic, normalised by its leading coefficient.
RouthHurwitz routh_hurwitz_quartic(const Polynomial& quartic);

/// Closed-form alpha coefficients at the disease free equilibrium.
CrossingQuartic crossing_quartic(const CharCoefficients& cc, const ModelParams& p);

/// |p(ib)|^2 - |q(ib)|^2 as a polynomial in z = b^2.
Polynomial modulus_polynomial(const QuasiPolynomial& qp);

std::vector<double> quartic_real_roots(const CrossingQuartic& q);

/**
 * Real zeros of Delta on [lo, hi] by recursive derivative bracketing:
 * between consecutive zeros of Delta^(k+1) the function Delta^(k) is
 * monotone, so each piece holds at most one zero and is bisected. The
 * recursion ends when the polynomial part has been differentiated away.
 */
RealRoots real_root_isolation(const QuasiPolynomial& qp, double lo, double hi);
RealRoots real_root_isolation(const LinearizedDDE& lin, double d, double lo, double hi);

/// Number of zeros inside `r` from the winding of Delta along its boundary. Empty if a zero sits on the boundary.
std::optional<int> count_zeros(const QuasiPolynomial& qp, const Rect& r);

/// Zeros inside `r` by recursive subdivision and complex Newton.
std::vector<std::complex<double>> locate_zeros(const QuasiPolynomial& qp, const Rect& r, int threads = 1);

/// Radius containing every zero with Re(lambda) >= x_min.
double root_modulus_bound(const QuasiPolynomial& qp, double x_min = 0.0);

StabilityVerdict classify(const ModelParams& p, const EquilibriumPoint& eq, double d,
                          const ClassifyOptions& opts = {});

} // namespace tbdelay
