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
#include "tbdelay/objective.hpp"

#include <Eigen/Dense>

#include <vector>

namespace tbdelay {

/**
 * Reduced transcription of the delayed control problem on a uniform grid.
 *
 * The decision vector holds node controls, u1 at nodes 0..n then u2 at
 * nodes 0..n. States follow the implicit trapezoidal rule on the
 * four-equation system,
 *
 *   x[k+1] = x[k] + h/2 (F[k] + F[k+1]),
 *   F[k]   = F(x[k], I[k - m], u1[k - m1], u2[k - m2]),
 *
 * with lags m, m1, m2 in steps and history values for negative indices.
 * The cost is the trapezoidal sum of the running cost. Gradients come from
 * the exact discrete adjoint of this scheme.
 */
class TrapezoidalTranscription {
public:
    TrapezoidalTranscription(const ModelParams& p, const DelayConfig& delays, const HistorySpec& hist, const Grid& grid,
                             const ObjectiveSpec& objective);

    int nodes() const { return n_steps_ + 1; }
    int variables() const { return 2 * nodes(); }

    /// Node states (S, L1, I, L2).
    std::vector<Eigen::Vector4d> forward(const Eigen::VectorXd& u) const;

    double objective(const Eigen::VectorXd& u) const;
    double objective(const Eigen::VectorXd& u, const std::vector<Eigen::Vector4d>& states) const;
    double objective_and_gradient(const Eigen::VectorXd& u, Eigen::VectorXd& grad) const;

    /// Node controls as a trajectory-ready list.
    std::vector<ControlVec> controls(const Eigen::VectorXd& u) const;
    Eigen::VectorXd pack(const std::vector<ControlVec>& u) const;

    /// Full trajectory record (five compartments, right-hand sides, node controls).
    Trajectory trajectory(const Eigen::VectorXd& u) const;

private:
    double delayed_i(const std::vector<Eigen::Vector4d>& x, int k) const;
    double delayed_u(const Eigen::VectorXd& u, int ctrl, int k) const;
    double weight(int k) const { return (k == 0 || k == n_steps_) ? 0.5 * h_ : h_; }

    ModelParams p_;
    DelayConfig delays_;
    HistorySpec hist_;
    Grid grid_;
    ObjectiveSpec obj_;
    int n_steps_;
    double h_;
    int m_i_, m_u1_, m_u2_;
};

} // namespace tbdelay
