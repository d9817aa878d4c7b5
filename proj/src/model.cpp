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
#include "tbdelay/model.hpp"

#include "tbdelay/errors.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace tbdelay {

namespace {

void require_finite(double v, const char* name)
{
    if (!std::isfinite(v)) {
        throw DomainError(std::string("non-finite input: ") + name);
    }
}

void require_rate(double v, const char* name)
{
    if (!std::isfinite(v) || v < 0.0) {
        throw ParameterError(std::string("parameter '") + name + "' must be a finite non-negative rate");
    }
}

void require_fraction(double v, const char* name)
{
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw ParameterError(std::string("parameter '") + name + "' must lie in [0, 1]");
    }
}

} // namespace

void ModelParams::validate() const
{
    require_rate(beta, "beta");
    require_rate(mu, "mu");
    require_rate(delta, "delta");
    require_fraction(phi, "phi");
    require_rate(omega, "omega");
    require_rate(omega_r, "omega_r");
    require_rate(sigma, "sigma");
    require_rate(sigma_r, "sigma_r");
    require_rate(tau0, "tau0");
    require_rate(tau1, "tau1");
    require_rate(tau2, "tau2");
    require_fraction(eps1, "eps1");
    require_fraction(eps2, "eps2");
    if (!std::isfinite(n_pop) || n_pop <= 0.0) {
        throw ParameterError("parameter 'n_pop' must be positive");
    }
}

bool StateVec::finite() const
{
    return std::isfinite(s) && std::isfinite(l1) && std::isfinite(i) && std::isfinite(l2) && std::isfinite(r);
}

StateVec rhs_controlled(const StateVec& x, double i_delayed, double v1, double v2, const ModelParams& p)
{
    if (!x.finite()) {
        throw DomainError("non-finite state");
    }
    require_finite(i_delayed, "i_delayed");
    require_finite(v1, "v1");
    require_finite(v2, "v2");

    const double b = p.beta / p.n_pop;
    const double force = b * x.i;
    const double l1_out = (p.tau1 + p.eps1 * v1) * x.l1;
    const double l2_out = (p.tau2 + p.eps2 * v2) * x.l2;

    StateVec d;
    d.s  = p.mu * p.n_pop - force * x.s - p.mu * x.s;
    d.l1 = force * (x.s + p.sigma * x.l2 + p.sigma_r * x.r) - (p.delta + p.mu) * x.l1 - l1_out;
    d.i  = p.phi * p.delta * x.l1 + p.omega * x.l2 + p.omega_r * x.r - p.tau0 * i_delayed - p.mu * x.i;
    d.l2 = (1.0 - p.phi) * p.delta * x.l1 - p.sigma * force * x.l2 - (p.omega + p.mu) * x.l2 - l2_out;
    d.r  = p.tau0 * i_delayed + l1_out + l2_out - p.sigma_r * force * x.r - (p.omega_r + p.mu) * x.r;
    return d;
}

double sum_derivative_check(const StateVec& x, double i_delayed, double v1, double v2, const ModelParams& p)
{
    return rhs_controlled(x, i_delayed, v1, v2, p).sum();
}

Eigen::Vector4d reduced_rhs(const Eigen::Vector4d& x, double i_delayed, double v1, double v2,
                            const ModelParams& p)
{
    const double n = p.n_pop;
    const double b = p.beta / n;
    const double s = x[0], l1 = x[1], i = x[2], l2 = x[3];
    const double r = n - s - l1 - i - l2;
    return {
        p.mu * n - b * i * s - p.mu * s,
        b * i * (s + p.sigma * l2 + p.sigma_r * r) - (p.c1() + p.eps1 * v1) * l1,
        p.phi * p.delta * l1 + p.omega * l2 + p.omega_r * r - p.tau0 * i_delayed - p.mu * i,
        (1.0 - p.phi) * p.delta * l1 - p.sigma * b * i * l2 - (p.c2() + p.eps2 * v2) * l2,
    };
}

Eigen::Matrix4d reduced_jacobian(const Eigen::Vector4d& x, double v1, double v2, const ModelParams& p)
{
    const double n = p.n_pop;
    const double b = p.beta / n;
    const double s = x[0], l1 = x[1], i = x[2], l2 = x[3];
    const double r = n - s - l1 - i - l2;

    Eigen::Matrix4d a;
    a << -(b * i + p.mu), 0.0, -b * s, 0.0,
         b * i * (1.0 - p.sigma_r), -(b * i * p.sigma_r + p.c1() + p.eps1 * v1),
         b * (s + p.sigma * l2 + p.sigma_r * (r - i)), b * i * (p.sigma - p.sigma_r),
         -p.omega_r, p.phi * p.delta - p.omega_r, -p.omega_r - p.mu, p.omega - p.omega_r,
         0.0, (1.0 - p.phi) * p.delta, -p.sigma * b * l2, -(b * i * p.sigma + p.c2() + p.eps2 * v2);
    return a;
}

R0Breakdown basic_reproduction_number(const ModelParams& p)
{
    p.validate();
    const double c1 = p.c1();
    const double c2 = p.c2();
    const double c3 = p.tau0 + p.mu + p.omega_r;
    const double bracket = p.omega_r * c2 * p.tau1
        + p.delta * ((p.omega_r + p.mu) * (p.phi * p.mu + p.omega) + (p.omega_r + p.phi * p.mu) * p.tau2);

    R0Breakdown out;
    out.numerator = p.beta * bracket;
    out.denominator = p.mu * c3 * c2 * c1;
    if (!(out.denominator > 0.0)) {
        throw ParameterError("basic reproduction number: denominator mu*(tau0+mu+omega_r)*c1*c2 must be positive");
    }
    out.value = out.numerator / out.denominator;
    return out;
}

EquilibriumPoint disease_free_equilibrium(const ModelParams& p)
{
    p.validate();
    return {StateVec{p.n_pop, 0.0, 0.0, 0.0, 0.0}, EquilibriumKind::DiseaseFree, 0.0};
}

double steady_state_residual(const StateVec& x, const ModelParams& p)
{
    const StateVec d = rhs_controlled(x, x.i, 0.0, 0.0, p);
    return d.vector().cwiseAbs().maxCoeff();
}

namespace {

Eigen::Vector4d steady_residual(const Eigen::Vector4d& x, const ModelParams& p)
{
    return reduced_rhs(x, x[2], 0.0, 0.0, p);
}

Eigen::Matrix4d steady_jacobian(const Eigen::Vector4d& x, const ModelParams& p)
{
    Eigen::Matrix4d j = reduced_jacobian(x, 0.0, 0.0, p);
    j(2, 2) -= p.tau0;
    return j;
}

struct NewtonResult {
    Eigen::Vector4d x;
    double residual = 0.0;
    bool converged = false;
};

// Damped Newton on F(x) = 0. With `deflate` the iteration runs on
// m(x) F(x), m = 1/|x - E0|^2 + 1 (scaled by N), which removes the
// disease free root from the basin.
NewtonResult newton(const ModelParams& p, Eigen::Vector4d x, bool deflate, const EndemicOptions& opts)
{
    const double n = p.n_pop;
    const Eigen::Vector4d dfe(n, 0.0, 0.0, 0.0);

    auto merit_map = [&](const Eigen::Vector4d& y) {
        Eigen::Vector4d f = steady_residual(y, p);
        if (deflate) {
            const Eigen::Vector4d r = (y - dfe) / n;
            f *= 1.0 / r.squaredNorm() + 1.0;
        }
        return f;
    };

    NewtonResult out;
    out.x = x;
    for (int it = 0; it < opts.max_iterations; ++it) {
        const Eigen::Vector4d f = steady_residual(x, p);
        out.x = x;
        out.residual = f.cwiseAbs().maxCoeff();
        if (out.residual <= opts.tolerance * n) {
            out.converged = true;
            return out;
        }

        Eigen::Matrix4d jac = steady_jacobian(x, p);
        Eigen::Vector4d g = f;
        if (deflate) {
            const Eigen::Vector4d r = (x - dfe) / n;
            const double q = r.squaredNorm();
            const double m = 1.0 / q + 1.0;
            const Eigen::Vector4d grad_m = -2.0 / (n * q * q) * r;
            jac = m * jac + f * grad_m.transpose();
            g = m * f;
        }
        const Eigen::Vector4d step = -jac.partialPivLu().solve(g);
        if (!step.allFinite()) {
            return out;
        }

        // Keep the iterate inside the admissible box [0, N]^4.
        double alpha = 1.0;
        for (int k = 0; k < 4; ++k) {
            if (x[k] + alpha * step[k] < 0.0) {
                alpha = std::min(alpha, 0.9 * x[k] / -step[k]);
            }
        }
        const double merit = merit_map(x).norm();
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            const Eigen::Vector4d trial = x + alpha * step;
            if (trial.allFinite() && merit_map(trial).norm() <= (1.0 - 1e-4 * alpha) * merit) {
                x = trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            x += alpha * step;
        }
    }
    out.x = x;
    out.residual = steady_residual(x, p).cwiseAbs().maxCoeff();
    out.converged = out.residual <= opts.tolerance * n;
    return out;
}

bool is_endemic(const Eigen::Vector4d& x, double n)
{
    return x[2] > 1e-9 * n && (x.array() >= -1e-9 * n).all() && x.sum() <= n * (1.0 + 1e-12);
}

std::optional<EquilibriumPoint> try_seed(const ModelParams& p, const Eigen::Vector4d& seed,
                                         const EndemicOptions& opts, Eigen::Vector4d& last)
{
    for (bool deflate : {false, true}) {
        const NewtonResult res = newton(p, seed, deflate, opts);
        last = res.x;
        if (res.converged && is_endemic(res.x, p.n_pop)) {
            EquilibriumPoint ep;
            ep.state = StateVec::from_reduced(res.x, p.n_pop);
            ep.kind = EquilibriumKind::Endemic;
            ep.residual_norm = steady_state_residual(ep.state, p);
            return ep;
        }
    }
    return std::nullopt;
}

// Steady state with I held fixed: S from its own equation, L1 and L2 from
// the 2x2 linear system left after eliminating R through the population.
Eigen::Vector4d state_at_infected(const ModelParams& p, double i)
{
    const double n = p.n_pop;
    const double f = p.beta / n * i;
    const double s = p.mu * n / (f + p.mu);
    // f (S + sigma L2 + sigma_r (N - S - L1 - I - L2)) = c1 L1
    // (1 - phi) delta L1 = (sigma f + c2) L2
    Eigen::Matrix2d a;
    a << p.c1() + f * p.sigma_r, -f * (p.sigma - p.sigma_r),
        -(1.0 - p.phi) * p.delta, p.sigma * f + p.c2();
    const Eigen::Vector2d rhs(f * (s + p.sigma_r * (n - s - i)), 0.0);
    const Eigen::Vector2d l = a.partialPivLu().solve(rhs);
    return {s, l[0], i, l[1]};
}

// Residual of the I equation along the curve above.
double infected_balance(const ModelParams& p, double i)
{
    const Eigen::Vector4d x = state_at_infected(p, i);
    const double r = p.n_pop - x.sum();
    return p.phi * p.delta * x[1] + p.omega * x[3] + p.omega_r * r - (p.tau0 + p.mu) * i;
}

// Bracketing fallback for parameter sets where Newton loses the endemic
// basin: scan I on a log grid for the first admissible sign change of the
// balance, then bisect.
std::optional<Eigen::Vector4d> reduced_seed(const ModelParams& p)
{
    const double n = p.n_pop;
    double lo = 1e-12 * n;
    double g_lo = infected_balance(p, lo);
    for (int k = 1; k <= 240; ++k) {
        const double hi = n * std::pow(10.0, -12.0 + 12.0 * k / 240.0) * (1.0 - 1e-12);
        const double g_hi = infected_balance(p, hi);
        if (std::isfinite(g_lo) && std::isfinite(g_hi) && g_lo > 0.0 && g_hi <= 0.0) {
            double a = lo, b = hi;
            for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
                const double m = 0.5 * (a + b);
                (infected_balance(p, m) > 0.0 ? a : b) = m;
            }
            const Eigen::Vector4d x = state_at_infected(p, 0.5 * (a + b));
            if (is_endemic(x, n) && n - x.sum() >= -1e-9 * n) return x;
        }
        lo = hi;
        g_lo = g_hi;
    }
    return std::nullopt;
}

} // namespace

EquilibriumPoint endemic_equilibrium_from(const ModelParams& p, const Eigen::Vector4d& seed,
                                          const EndemicOptions& opts)
{
    p.validate();
    Eigen::Vector4d last = seed;
    if (auto ep = try_seed(p, seed, opts, last)) {
        return *ep;
    }
    throw ConvergenceFailure("endemic equilibrium: Newton did not converge to a positive-I point",
                             {last[0], last[1], last[2], last[3]});
}

EquilibriumPoint endemic_equilibrium(const ModelParams& p, const EndemicOptions& opts)
{
    const R0Breakdown r0 = basic_reproduction_number(p);
    if (!(r0.value > 1.0)) {
        throw NoEndemicEquilibrium("no endemic equilibrium: R0 = " + std::to_string(r0.value) + " <= 1");
    }
    const double n = p.n_pop;
    const std::array<Eigen::Vector4d, 4> seeds = {
        Eigen::Vector4d(0.9 * n, 0.01 * n, 0.01 * n, 0.05 * n),
        Eigen::Vector4d(0.5 * n, 0.001 * n, 0.001 * n, 0.02 * n),
        Eigen::Vector4d(0.99 * n, 1e-4 * n, 1e-4 * n, 1e-3 * n),
        Eigen::Vector4d(0.2 * n, 0.01 * n, 0.001 * n, 0.1 * n),
    };
    Eigen::Vector4d last = seeds[0];
    for (const auto& seed : seeds) {
        if (auto ep = try_seed(p, seed, opts, last)) {
            return *ep;
        }
    }
    if (const auto seed = reduced_seed(p)) {
        if (auto ep = try_seed(p, *seed, opts, last)) {
            return *ep;
        }
    }
    throw ConvergenceFailure("endemic equilibrium: no seed converged", {last[0], last[1], last[2], last[3]});
}

} // namespace tbdelay
