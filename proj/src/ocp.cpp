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
#include "tbdelay/ocp.hpp"

#include "tbdelay/errors.hpp"
#include "tbdelay/transcription.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tbdelay {

namespace {

int control_lag(const OcpProblem& prob, int k)
{
    return prob.grid.lag_steps(k == 0 ? prob.delays.d_u1 : prob.delays.d_u2);
}

double delayed_control(const OcpProblem& prob, const Trajectory& traj, int k, int node)
{
    const int j = node - control_lag(prob, k);
    if (j < 0) return k == 0 ? prob.history.control_history.u1 : prob.history.control_history.u2;
    const ControlVec& c = traj.controls.at(static_cast<std::size_t>(j));
    return k == 0 ? c.u1 : c.u2;
}

void check_trajectory(const OcpProblem& prob, const Trajectory& traj)
{
    if (traj.nodes() != prob.grid.nodes() || traj.grid.n_steps != prob.grid.n_steps ||
        traj.grid.t0 != prob.grid.t0 || traj.grid.t_f != prob.grid.t_f)
        throw GridError("trajectory grid does not match the problem grid");
    if (static_cast<int>(traj.controls.size()) != traj.nodes())
        throw GridError("trajectory carries no node controls");
}

// Zero of the piecewise-linear phi closest to `centre` whose sign change goes from `from_level` to its opposite.
std::optional<double> zero_near(const std::vector<double>& phi, const Grid& grid, int centre, int from_level,
                                int window)
{
    const int n = static_cast<int>(phi.size());
    for (int off = 0; off <= window; ++off) {
        for (int i : {centre - off, centre + off}) {
            if (i < 0 || i + 1 >= n) continue;
            const double a = phi[i], b = phi[i + 1];
            const bool match = from_level == 1 ? (a > 0.0 && b <= 0.0) : (a < 0.0 && b >= 0.0);
            if (!match) continue;
            // bisection on the linear interpolant reduces to its root
            return grid.time(i) + grid.step() * a / (a - b);
        }
    }
    return std::nullopt;
}

ArcSchedule schedule_from(const OcpProblem& prob, const std::vector<ControlVec>& u, const SwitchingTrace& phi)
{
    const Grid& g = prob.grid;
    ArcSchedule s;
    for (int k = 0; k < 2; ++k) {
        auto value = [&](int j) { return k == 0 ? u[j].u1 : u[j].u2; };
        auto level = [&](int j) { return value(j) >= 0.5 ? 1 : 0; };
        s.controls[k].initial_level = level(0);
        s.controls[k].switches.clear();
        for (int j = 0; j + 1 < g.nodes(); ++j) {
            if (level(j) == level(j + 1)) continue;
            double tau;
            if (auto z = zero_near(phi[k], g, j, level(j), 50)) {
                tau = *z;
            } else {
                const double a = value(j) - 0.5, b = value(j + 1) - 0.5;
                tau = g.time(j) + g.step() * a / (a - b);
            }
            s.controls[k].switches.push_back(std::clamp(tau, g.t0, g.t_f));
        }
        std::sort(s.controls[k].switches.begin(), s.controls[k].switches.end());
    }
    return s;
}

} // namespace

OcpProblem OcpProblem::reference(double beta, const DelayConfig& delays, double w, ObjectiveKind kind, int n_steps)
{
    OcpProblem prob;
    prob.params = ModelParams::reference(beta);
    prob.delays = delays;
    prob.history = HistorySpec::reference(prob.params.n_pop);
    prob.grid = Grid{0.0, 5.0, n_steps};
    prob.objective = ObjectiveSpec{kind, w, w};
    return prob;
}

void OcpProblem::validate() const
{
    params.validate();
    delays.validate();
    history.validate(params.n_pop);
    grid.validate();
    objective.validate();
    if (grid.n_steps < 1) throw GridError("optimal control needs at least one step");
    grid.lag_steps(delays.d_i);
    grid.lag_steps(delays.d_u1);
    grid.lag_steps(delays.d_u2);
    for (double b : {lower.u1, lower.u2, upper.u1, upper.u2})
        if (!std::isfinite(b)) throw DomainError("control bounds must be finite");
    if (lower.u1 > upper.u1 || lower.u2 > upper.u2) throw DomainError("control lower bound exceeds upper bound");
    if (lower.u1 < 0.0 || lower.u2 < 0.0 || upper.u1 > 1.0 || upper.u2 > 1.0)
        throw DomainError("control bounds must lie within [0, 1]");
}

double trapezoid_objective(const OcpProblem& prob, const Trajectory& traj)
{
    if (static_cast<int>(traj.controls.size()) != traj.nodes()) throw GridError("trajectory carries no node controls");
    const int n = traj.nodes();
    if (n == 1) return 0.0;
    const double h = traj.grid.step();
    double j = 0.0;
    for (int k = 0; k < n; ++k) {
        const double w = (k == 0 || k == n - 1) ? 0.5 * h : h;
        j += w * running_cost(traj.states[k], traj.controls[k], prob.objective);
    }
    return j;
}

std::vector<AdjointVec> adjoint_backward(const OcpProblem& prob, const Trajectory& traj)
{
    prob.validate();
    check_trajectory(prob, traj);
    const ModelParams& p = prob.params;
    const int n = traj.grid.n_steps;
    const int m = prob.grid.lag_steps(prob.delays.d_i);
    const double h = prob.grid.step();
    const Eigen::Vector4d cost_grad(0.0, 0.0, 1.0, 1.0);

    auto jac = [&](int k) {
        Eigen::Matrix4d a = reduced_jacobian(traj.states[k].reduced(), delayed_control(prob, traj, 0, k),
                                             delayed_control(prob, traj, 1, k), p);
        if (m == 0) a(2, 2) -= p.tau0;
        return a;
    };

    std::vector<Eigen::Vector4d> lam(static_cast<std::size_t>(n + 1), Eigen::Vector4d::Zero());
    // advanced term: lam_I(t + d) on [0, T - d], zero beyond
    auto advanced = [&](int k) { return (m > 0 && k + m <= n) ? lam[k + m][2] : 0.0; };

    Eigen::Matrix4d a_next = jac(n);
    for (int k = n - 1; k >= 0; --k) {
        const Eigen::Matrix4d a = jac(k);
        Eigen::Vector4d rhs = lam[k + 1] + 0.5 * h * a_next.transpose() * lam[k + 1] + h * cost_grad;
        rhs[2] -= 0.5 * h * p.tau0 * (advanced(k) + advanced(k + 1));
        lam[k] = (Eigen::Matrix4d::Identity() - 0.5 * h * a.transpose()).partialPivLu().solve(rhs);
        a_next = a;
    }

    std::vector<AdjointVec> out(lam.size());
    for (std::size_t k = 0; k < lam.size(); ++k) out[k] = {lam[k][0], lam[k][1], lam[k][2], lam[k][3]};
    return out;
}

SwitchingTrace switching_trace(const OcpProblem& prob, const Trajectory& traj, const std::vector<AdjointVec>& adjoints)
{
    check_trajectory(prob, traj);
    if (static_cast<int>(adjoints.size()) != traj.nodes()) throw GridError("adjoint count does not match the trajectory");
    const int n = traj.grid.n_steps;
    SwitchingTrace tr;
    tr.phi1.resize(static_cast<std::size_t>(n + 1));
    tr.phi2.resize(static_cast<std::size_t>(n + 1));
    for (int k = 0; k < 2; ++k) {
        const int lag = control_lag(prob, k);
        const double w = k == 0 ? prob.objective.w1 : prob.objective.w2;
        const double eps = k == 0 ? prob.params.eps1 : prob.params.eps2;
        std::vector<double>& phi = k == 0 ? tr.phi1 : tr.phi2;
        for (int j = 0; j <= n; ++j) {
            const int at = j + lag;
            // lambda(T) = 0, so the second branch also covers t + d_uk = T
            if (at >= n) {
                phi[j] = -w;
                continue;
            }
            const double lam_l = k == 0 ? adjoints[at].lam_l1 : adjoints[at].lam_l2;
            const double l = k == 0 ? traj.states[at].l1 : traj.states[at].l2;
            phi[j] = -w + eps * lam_l * l;
        }
    }
    return tr;
}

OcpSolution solve(const OcpProblem& prob, const std::vector<ControlVec>& init, const OcpOptions& opts)
{
    prob.validate();
    const TrapezoidalTranscription tr(prob.params, prob.delays, prob.history, prob.grid, prob.objective);
    const int nodes = tr.nodes();

    Eigen::VectorXd lo(tr.variables()), hi(tr.variables());
    lo.head(nodes).setConstant(prob.lower.u1);
    lo.tail(nodes).setConstant(prob.lower.u2);
    hi.head(nodes).setConstant(prob.upper.u1);
    hi.tail(nodes).setConstant(prob.upper.u2);

    Eigen::VectorXd u0;
    if (init.empty()) {
        u0 = Eigen::VectorXd::Constant(tr.variables(), 0.5);
    } else {
        u0 = tr.pack(init);
        if ((u0.array() < lo.array()).any() || (u0.array() > hi.array()).any())
            throw DomainError("initial control guess outside the bounds");
    }
    u0 = u0.cwiseMax(lo).cwiseMin(hi);

    BoxLbfgsOptions sopts = opts.solver;
    if (sopts.metric.size() == 0) {
        // trapezoidal weights: stationarity is measured per unit time
        const double h = prob.grid.step();
        sopts.metric = Eigen::VectorXd::Constant(tr.variables(), h);
        for (int k : {0, nodes - 1, nodes, 2 * nodes - 1}) sopts.metric[k] = 0.5 * h;
    }
    const BoxLbfgsResult res = minimize_box(
        [&](const Eigen::VectorXd& u, Eigen::VectorXd& g) { return tr.objective_and_gradient(u, g); }, u0, lo, hi,
        sopts);

    OcpSolution sol;
    sol.diagnostics.iterations = res.iterations;
    sol.diagnostics.evaluations = res.evaluations;
    sol.diagnostics.stationarity = res.pg_norm;
    sol.diagnostics.converged = res.converged;
    sol.diagnostics.message = res.message;
    sol.diagnostics.raw_objective = res.f;
    sol.diagnostics.objective_history = res.history;

    sol.trajectory = tr.trajectory(res.x);
    sol.adjoints = adjoint_backward(prob, sol.trajectory);
    sol.switching = switching_trace(prob, sol.trajectory, sol.adjoints);
    sol.objective_value = res.f;

    const bool unit_box = prob.lower.u1 == 0.0 && prob.lower.u2 == 0.0 && prob.upper.u1 == 1.0 && prob.upper.u2 == 1.0;
    if (opts.sharpen && prob.objective.kind == ObjectiveKind::L1 && unit_box) {
        // The zeros of phi move slightly once the controls are exactly 0/1, so the
        // switch nodes are re-derived until they no longer change.
        Eigen::VectorXd prev;
        for (int pass = 0; pass < 8; ++pass) {
            ArcSchedule sched = schedule_from(prob, sol.trajectory.controls, sol.switching);
            std::vector<ControlVec> u(static_cast<std::size_t>(nodes));
            for (int k = 0; k < nodes; ++k) u[k] = sched.at(prob.grid.time(k));
            const Eigen::VectorXd us = tr.pack(u);
            const bool settled = prev.size() == us.size() && prev == us;
            sol.schedule = std::move(sched);
            if (settled) break;
            sol.trajectory = tr.trajectory(us);
            sol.adjoints = adjoint_backward(prob, sol.trajectory);
            sol.switching = switching_trace(prob, sol.trajectory, sol.adjoints);
            sol.objective_value = tr.objective(us);
            prev = us;
        }
        sol.diagnostics.sharpened = true;
    }
    return sol;
}

BangBangReport verify_bang_bang(const OcpProblem& prob, const OcpSolution& sol)
{
    check_trajectory(prob, sol.trajectory);
    const Grid& g = prob.grid;
    const int n = g.nodes();
    BangBangReport rep;
    rep.law_checked = true;
    rep.min_abs_slope = std::numeric_limits<double>::infinity();

    for (int k = 0; k < 2; ++k) {
        const double w = k == 0 ? prob.objective.w1 : prob.objective.w2;
        const double tol = 1e-3 * w;
        const double lo = k == 0 ? prob.lower.u1 : prob.lower.u2;
        const double hi = k == 0 ? prob.upper.u1 : prob.upper.u2;
        const std::vector<double>& phi = sol.switching[k];
        for (int j = 0; j < n; ++j) {
            const double u = k == 0 ? sol.trajectory.controls[j].u1 : sol.trajectory.controls[j].u2;
            double expected;
            if (prob.objective.kind == ObjectiveKind::L1) {
                if (std::abs(phi[j]) <= tol) continue;
                expected = phi[j] > 0.0 ? hi : lo;
            } else {
                // minimiser of W u^2 - (phi + W) u over the box
                expected = std::clamp((phi[j] + w) / (2.0 * w), lo, hi);
            }
            if (std::abs(u - expected) > 0.02) ++rep.law_violations[k];
        }
        for (int j = 0; j + 1 < n; ++j) {
            const double a = phi[j], b = phi[j + 1];
            if ((a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0)) {
                rep.crossings[k].push_back(g.time(j) + g.step() * a / (a - b));
                const double slope = (b - a) / g.step();
                rep.crossing_slopes[k].push_back(slope);
                rep.min_abs_slope = std::min(rep.min_abs_slope, std::abs(slope));
            }
        }
        if (sol.schedule)
            rep.switch_count[k] = static_cast<int>(sol.schedule->controls[k].switches.size());
        else
            rep.switch_count[k] = static_cast<int>(rep.crossings[k].size());
    }
    rep.law_satisfied = rep.law_violations[0] == 0 && rep.law_violations[1] == 0;
    if (!std::isfinite(rep.min_abs_slope)) rep.min_abs_slope = 0.0;
    rep.strict = rep.min_abs_slope > 1e-6 &&
                 (rep.crossings[0].size() + rep.crossings[1].size() > 0);
    if (prob.objective.kind == ObjectiveKind::L2)
        rep.note = "quadratic cost: controls are continuous; checked against the projection law u = clamp((phi + W)/(2W))";
    else
        rep.note = "bang-bang law checked where |phi| > 1e-3 W";
    if (!sol.diagnostics.converged) rep.note += "; solver did not converge";
    return rep;
}

} // namespace tbdelay
