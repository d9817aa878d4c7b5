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
#include "tbdelay/integrator.hpp"

#include "tbdelay/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace tbdelay {

double DelayConfig::max() const
{
    return std::max({d_i, d_u1, d_u2});
}

void DelayConfig::validate(bool reference_range) const
{
    for (double d : {d_i, d_u1, d_u2}) {
        if (!std::isfinite(d) || d < 0.0) {
            throw ParameterError("delays must be finite and non-negative");
        }
    }
    if (reference_range) {
        for (double d : {d_u1, d_u2}) {
            if (d < 0.05 || d > 0.2) {
                throw ParameterError("control delays must lie in [0.05, 0.2]");
            }
        }
    }
}

HistorySpec HistorySpec::reference(double n_pop)
{
    HistorySpec h;
    h.i_history = 5.0 / 120.0 * n_pop;
    h.initial_state = {76.0 / 120.0 * n_pop, 36.0 / 120.0 * n_pop, 5.0 / 120.0 * n_pop,
                       2.0 / 120.0 * n_pop, 1.0 / 120.0 * n_pop};
    h.control_history = {0.0, 0.0};
    return h;
}

void HistorySpec::validate(double n_pop) const
{
    const auto& x = initial_state;
    if (!x.finite() || !std::isfinite(i_history)) {
        throw DomainError("history: non-finite value");
    }
    if (x.s < 0 || x.l1 < 0 || x.i < 0 || x.l2 < 0 || x.r < 0 || i_history < 0) {
        throw ParameterError("history: compartments must be non-negative");
    }
    if (std::abs(x.sum() - n_pop) > 1e-9 * n_pop) {
        throw ParameterError("history: initial compartments must sum to n_pop");
    }
    for (double u : {control_history.u1, control_history.u2}) {
        if (!(u >= 0.0 && u <= 1.0)) {
            throw ParameterError("history: controls must lie in [0, 1]");
        }
    }
}

void Grid::validate() const
{
    if (!std::isfinite(t0) || !std::isfinite(t_f) || t_f < t0) {
        throw GridError("grid: need finite t0 <= t_f");
    }
    if (n_steps < 0 || (t_f > t0 && n_steps == 0)) {
        throw GridError("grid: n_steps must be positive for a non-empty horizon");
    }
}

int Grid::lag_steps(double delay) const
{
    if (delay == 0.0) {
        return 0;
    }
    const double h = step();
    if (h <= 0.0) {
        return 0;
    }
    const double ratio = delay / h;
    const double k = std::round(ratio);
    if (k < 1.0 || std::abs(ratio - k) > 1e-9 * std::max(1.0, ratio)) {
        throw GridError("grid: step " + std::to_string(h) + " does not divide delay " + std::to_string(delay));
    }
    return static_cast<int>(k);
}

ControlSource ControlSource::zero()
{
    return constant({0.0, 0.0});
}

ControlSource ControlSource::constant(ControlVec u)
{
    return {[u](double) { return u; }, {}};
}

ControlSource ControlSource::nodal(const Grid& grid, std::vector<ControlVec> values)
{
    if (static_cast<int>(values.size()) != grid.nodes()) {
        throw GridError("nodal control: value count does not match grid nodes");
    }
    return {[grid, values = std::move(values)](double t) {
                if (grid.n_steps == 0) {
                    return values.front();
                }
                const double h = grid.step();
                const double k = std::clamp((t - grid.t0) / h, 0.0, static_cast<double>(grid.n_steps));
                const int j = std::min(static_cast<int>(std::floor(k)), grid.n_steps - 1);
                const double w = k - j;
                return ControlVec{(1.0 - w) * values[j].u1 + w * values[j + 1].u1,
                                  (1.0 - w) * values[j].u2 + w * values[j + 1].u2};
            },
            {}};
}

namespace {

// Cubic Hermite basis on [0, 1].
double hermite(double y0, double y1, double dy0, double dy1, double h, double s)
{
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * dy0 + (-2 * s3 + 3 * s2) * y1
        + (s3 - s2) * h * dy1;
}

// Locates t on the grid: returns node index j and fraction in [0, 1).
// Snaps to a node when within 1e-9 steps of it.
std::pair<int, double> locate(const Grid& g, double t)
{
    const double k = (t - g.t0) / g.step();
    const double kr = std::round(k);
    if (std::abs(k - kr) < 1e-9) {
        return {static_cast<int>(kr), 0.0};
    }
    const int j = static_cast<int>(std::floor(k));
    return {j, k - j};
}

class MethodOfSteps {
public:
    MethodOfSteps(const ModelParams& p, const DelayConfig& delays, const HistorySpec& hist, const Grid& grid,
                  const ControlSource& control, Trajectory& out)
        : p_(p), delays_(delays), hist_(hist), grid_(grid), control_(control), out_(out)
    {
    }

    void run()
    {
        const int n = grid_.n_steps;
        out_.states.reserve(n + 1);
        out_.derivatives.reserve(n + 1);
        out_.controls.reserve(n + 1);
        out_.states.push_back(hist_.initial_state);
        out_.infected_integral.reserve(n + 1);
        out_.infected_integral.push_back(0.0);
        out_.controls.push_back(control_(grid_.t0));

        const double h = grid_.step();
        const std::vector<double> jumps = discontinuities();
        auto next_jump = jumps.begin();

        for (int k = 0; k < n; ++k) {
            const double a = grid_.time(k);
            const double b = grid_.time(k + 1);
            const StateVec x0 = out_.states[k];

            // Right derivative at node k; needed for Hermite reads of later steps.
            out_.derivatives.push_back(rhs(a, x0, a, b));

            std::vector<double> cuts{a};
            while (next_jump != jumps.end() && *next_jump <= a + 1e-9 * h) {
                ++next_jump;
            }
            for (auto it = next_jump; it != jumps.end() && *it < b - 1e-9 * h; ++it) {
                cuts.push_back(*it);
            }
            cuts.push_back(b);

            StateVec x = x0;
            double q = out_.infected_integral.back();
            for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
                x = rk4(cuts[c], cuts[c + 1], x, c == 0 ? &out_.derivatives.back() : nullptr, q);
            }
            if (!x.finite()) {
                throw BlowupError("integration produced a non-finite state at t = " + std::to_string(b), b);
            }
            out_.states.push_back(x);
            out_.infected_integral.push_back(q);
            out_.controls.push_back(control_(b));
        }
        if (n == 0) {
            out_.derivatives.push_back(rhs(grid_.t0, out_.states[0], grid_.t0, grid_.t0));
        }
        else {
            const double tf = grid_.t_f;
            out_.derivatives.push_back(rhs(tf, out_.states.back(), grid_.time(n - 1), tf));
        }
    }

private:
    std::vector<double> discontinuities() const
    {
        std::vector<double> out;
        for (double bp : control_.breakpoints) {
            for (double d : {delays_.d_u1, delays_.d_u2}) {
                const double t = bp + d;
                if (t > grid_.t0 && t < grid_.t_f) {
                    out.push_back(t);
                }
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    // One RK4 step over [a, b] containing no control discontinuity in its interior.
    // `quad` accumulates the integral of I + L2 with the same stage weights,
    // as if it were a sixth state.
    StateVec rk4(double a, double b, const StateVec& x, const StateVec* k1_known, double& quad) const
    {
        const double h = b - a;
        const double m = a + 0.5 * h;
        using V = Eigen::Matrix<double, 5, 1>;
        const V x0 = x.vector();
        const V k1 = k1_known ? k1_known->vector() : rhs(a, x, a, b).vector();
        const V k2 = rhs(m, StateVec::from(x0 + 0.5 * h * k1), a, b).vector();
        const V k3 = rhs(m, StateVec::from(x0 + 0.5 * h * k2), a, b).vector();
        const V k4 = rhs(b, StateVec::from(x0 + h * k3), a, b).vector();
        auto infected = [](const V& v) { return v[2] + v[3]; };
        quad += h / 6.0 *
                (infected(x0) + 2.0 * infected(x0 + 0.5 * h * k1) + 2.0 * infected(x0 + 0.5 * h * k2) +
                 infected(x0 + h * k3));
        return StateVec::from(x0 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    }

    // Derivative at time t for state x; controls are sampled strictly inside
    // [a, b] so that a jump at either end takes the value of this sub-interval.
    StateVec rhs(double t, const StateVec& x, double a, double b) const
    {
        const double eta = 1e-9 * std::max(b - a, 1e-300);
        const double tc = b > a ? std::clamp(t, a + eta, b - eta) : t;
        const double v1 = delayed_control(tc - delays_.d_u1).u1;
        const double v2 = delayed_control(tc - delays_.d_u2).u2;
        // a stage state overflowing is a blowup of the run, not a bad argument
        if (!x.finite()) {
            throw BlowupError("integration produced a non-finite state at t = " + std::to_string(t), t);
        }
        const double y = delays_.d_i > 0.0 ? delayed_i(t - delays_.d_i) : x.i;
        return rhs_controlled(x, y, v1, v2, p_);
    }

    ControlVec delayed_control(double t) const
    {
        return t < grid_.t0 ? hist_.control_history : control_(t);
    }

    double delayed_i(double t) const
    {
        const double h = grid_.step();
        if (t < grid_.t0 - 1e-9 * h) {
            return hist_.i_history;
        }
        const auto [j, frac] = locate(grid_, t);
        if (frac == 0.0) {
            return out_.states.at(j).i;
        }
        return hermite(out_.states.at(j).i, out_.states.at(j + 1).i, out_.derivatives.at(j).i,
                       out_.derivatives.at(j + 1).i, h, frac);
    }

    const ModelParams& p_;
    const DelayConfig& delays_;
    const HistorySpec& hist_;
    const Grid& grid_;
    const ControlSource& control_;
    Trajectory& out_;
};

} // namespace

Trajectory integrate(const ModelParams& p, const DelayConfig& delays, const HistorySpec& hist,
                     const Grid& grid, const ControlSource& control)
{
    p.validate();
    delays.validate();
    grid.validate();
    hist.validate(p.n_pop);
    for (double d : {delays.d_i, delays.d_u1, delays.d_u2}) {
        grid.lag_steps(d);
    }

    Trajectory out;
    out.grid = grid;
    out.delays = delays;
    out.history = hist;
    MethodOfSteps(p, delays, hist, grid, control, out).run();
    return out;
}

StateVec dense_eval(const Trajectory& traj, double t)
{
    const Grid& g = traj.grid;
    const double lo = g.t0 - traj.delays.max();
    const double tol = 1e-12 * std::max(1.0, std::abs(g.t_f));
    if (!(t >= lo - tol && t <= g.t_f + tol)) {
        throw RangeError("dense_eval: t = " + std::to_string(t) + " outside trajectory domain");
    }
    if (t < g.t0) {
        StateVec x = traj.history.initial_state;
        x.i = traj.history.i_history;
        return x;
    }
    if (g.n_steps == 0) {
        return traj.states.front();
    }
    auto [j, frac] = locate(g, std::min(t, g.t_f));
    if (frac == 0.0) {
        return traj.states.at(std::min(j, g.n_steps));
    }
    const double h = g.step();
    const auto y0 = traj.states[j].vector();
    const auto y1 = traj.states[j + 1].vector();
    const auto d0 = traj.derivatives[j].vector();
    const auto d1 = traj.derivatives[j + 1].vector();
    Eigen::Matrix<double, 5, 1> y;
    for (int c = 0; c < 5; ++c) {
        y[c] = hermite(y0[c], y1[c], d0[c], d1[c], h, frac);
    }
    return StateVec::from(y);
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os)
{
    os << "t,S,L1,I,L2,R,u1,u2\n";
    char buf[512];
    for (int k = 0; k < traj.nodes(); ++k) {
        const StateVec& x = traj.states[k];
        const ControlVec u = traj.controls.empty() ? ControlVec{} : traj.controls[k];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", traj.time(k), x.s,
                      x.l1, x.i, x.l2, x.r, u.u1, u.u2);
        os << buf;
    }
}

} // namespace tbdelay
