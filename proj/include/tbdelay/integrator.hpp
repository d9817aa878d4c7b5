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

#include <functional>
#include <iosfwd>
#include <vector>

namespace tbdelay {

/// Constant lags (years): state delay on I and the two control delays.
struct DelayConfig {
    double d_i  = 0.0;
    double d_u1 = 0.0;
    double d_u2 = 0.0;

    double max() const;
    /// Non-negative and finite; `reference_range` additionally bounds the control delays to [0.05, 0.2].
    void validate(bool reference_range = false) const;
};

/**
 * Constant pre-initial data. I is held at `i_history` on [-d_i, 0), the
 * controls at `control_history` on [-d_uk, 0); `initial_state` is the
 * state at t = 0.
 */
struct HistorySpec {
    double i_history = 0.0;
    StateVec initial_state;
    ControlVec control_history;

    /// (76, 36, 5, 2, 1)/120 split of the population with I held constant and zero control history.
    static HistorySpec reference(double n_pop);
    void validate(double n_pop) const;
};

struct Grid {
    double t0 = 0.0;
    double t_f = 5.0;
    int n_steps = 2500;

    double step() const { return n_steps > 0 ? (t_f - t0) / n_steps : 0.0; }
    double time(int k) const { return k == n_steps ? t_f : t0 + k * step(); }
    int nodes() const { return n_steps + 1; }

    /// Number of steps spanned by `delay`; throws GridError unless delay/step is integral.
    int lag_steps(double delay) const;
    void validate() const;
};

/**
 * Control input u(t) on [0, T]. `breakpoints` lists the times where u may
 * jump; the integrator splits steps there (after shifting by the control
 * delays) so piecewise-constant inputs are integrated without quantisation.
 */
struct ControlSource {
    std::function<ControlVec(double)> eval;
    std::vector<double> breakpoints;

    ControlVec operator()(double t) const { return eval(t); }

    static ControlSource zero();
    static ControlSource constant(ControlVec u);
    /// Piecewise-linear interpolation of per-node values on `grid`.
    static ControlSource nodal(const Grid& grid, std::vector<ControlVec> values);
};

/// Node samples of an integration with dense (cubic Hermite) evaluation support.
struct Trajectory {
    Grid grid;
    DelayConfig delays;
    HistorySpec history;
    std::vector<StateVec> states;       ///< one per node
    std::vector<StateVec> derivatives;  ///< right derivative at each node (left at the last)
    std::vector<ControlVec> controls;   ///< undelayed u(t_k); may be empty
    /// Integral of I + L2 from t0 to each node, accumulated with the integration stages.
    std::vector<double> infected_integral;

    double time(int k) const { return grid.time(k); }
    int nodes() const { return static_cast<int>(states.size()); }
};

/**
 * Classic fourth-order Runge-Kutta by the method of steps.
 *
 * Delayed I values at node-aligned stage times are read from stored
 * nodes, mid-step values from cubic Hermite interpolation of the stored
 * solution. Delayed controls are u_k(t - d_uk), with the control history
 * before t = 0. Steps containing a control discontinuity are split there.
 *
 * Throws GridError when the step does not divide a positive delay and
 * BlowupError when the state becomes non-finite.
 */
Trajectory integrate(const ModelParams& p, const DelayConfig& delays, const HistorySpec& hist,
                     const Grid& grid, const ControlSource& control);

/// State at time t in [t0 - max delay, t_f]; history values before t0, node values at nodes.
StateVec dense_eval(const Trajectory& traj, double t);

/// `t,S,L1,I,L2,R,u1,u2`, one row per node, 17 significant digits.
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

} // namespace tbdelay
