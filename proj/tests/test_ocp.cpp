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
#include "tbdelay/errors.hpp"
#include "tbdelay/lbfgsb.hpp"
#include "tbdelay/ocp.hpp"
#include "tbdelay/transcription.hpp"

#include <doctest.h>

#include <random>

using namespace tbdelay;

namespace {

const DelayConfig kNoDelay{0, 0, 0};
const DelayConfig kDelayed{0.1, 0.2, 0.2};

const OcpSolution& nondelayed_w50()
{
    static const OcpSolution sol = solve(OcpProblem::reference(100, kNoDelay, 50));
    return sol;
}

const OcpSolution& delayed_w50()
{
    static const OcpSolution sol = solve(OcpProblem::reference(100, kDelayed, 50));
    return sol;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

/// Worst relative error of the adjoint directional derivative against central differences.
double gradient_check(const OcpProblem& prob, unsigned seed)
{
    const TrapezoidalTranscription tr(prob.params, prob.delays, prob.history, prob.grid, prob.objective);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> inner(0.2, 0.8), dir(-1.0, 1.0);
    Eigen::VectorXd u(tr.variables());
    for (int k = 0; k < u.size(); ++k) u[k] = inner(rng);
    Eigen::VectorXd g;
    tr.objective_and_gradient(u, g);
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd d(u.size());
        for (int k = 0; k < d.size(); ++k) d[k] = dir(rng);
        const double eps = 1e-4;
        const double fd = (tr.objective(u + eps * d) - tr.objective(u - eps * d)) / (2 * eps);
        worst = std::max(worst, std::abs(fd - g.dot(d)) / std::abs(g.dot(d)));
    }
    return worst;
}

} // namespace

TEST_SUITE("ocp")
{
    TEST_CASE("running cost")
    {
        const StateVec x{100, 20, 30, 40, 10};
        const ObjectiveSpec l1{ObjectiveKind::L1, 50, 50}, l2{ObjectiveKind::L2, 50, 50};
        CHECK(running_cost(x, {0, 0}, l1) == 70);
        CHECK(running_cost(x, {0, 0}, l2) == 70);
        CHECK(running_cost(x, {1, 1}, l1) == 170);
        CHECK(running_cost(x, {1, 1}, l2) == 170);
        CHECK(running_cost(x, {0.5, 0.5}, l1) == 120);
        CHECK(running_cost(x, {0.5, 0.5}, l2) == 95);
        CHECK(running_cost_du(0.5, 50, ObjectiveKind::L1) == 50);
        CHECK(running_cost_du(0.5, 50, ObjectiveKind::L2) == 50);
        CHECK_THROWS_AS((ObjectiveSpec{ObjectiveKind::L1, 0, 50}.validate()), ParameterError);
    }

    TEST_CASE("box L-BFGS on a separable quadratic with active bounds")
    {
        const Eigen::VectorXd c = (Eigen::VectorXd(5) << -1, 0.3, 2, 0.7, 0.5).finished();
        auto fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
            Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(5, 1, 5);
            g = 2 * w.cwiseProduct(x - c);
            return (w.array() * (x - c).array().square()).sum();
        };
        const Eigen::VectorXd lo = Eigen::VectorXd::Zero(5), hi = Eigen::VectorXd::Ones(5);
        const BoxLbfgsResult r = minimize_box(fn, Eigen::VectorXd::Constant(5, 0.5), lo, hi, {});
        CHECK(r.converged);
        const Eigen::VectorXd expect = c.cwiseMax(lo).cwiseMin(hi);
        CHECK((r.x - expect).lpNorm<Eigen::Infinity>() < 1e-6);
        for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k] <= r.history[k - 1]);
        // projected gradient vanishes on an outward-pointing active bound
        const Eigen::VectorXd pg = projected_gradient(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2),
                                                      Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2));
        CHECK(pg.norm() == 0.0);
        // an interior point keeps the full gradient, however narrow the box
        const Eigen::VectorXd big = projected_gradient(Eigen::VectorXd::Constant(2, 0.5), Eigen::VectorXd::Constant(2, 1e6),
                                                       Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2));
        CHECK(big.lpNorm<Eigen::Infinity>() == 1e6);
    }

    TEST_CASE("adjoint gradient against central differences")
    {
        const double nd = gradient_check(OcpProblem::reference(100, kNoDelay, 50), 1);
        const double dl = gradient_check(OcpProblem::reference(100, kDelayed, 50), 2);
        const double l2 = gradient_check(OcpProblem::reference(100, kDelayed, 50, ObjectiveKind::L2), 3);
        INFO("non-delayed " << nd << ", delayed " << dl << ", quadratic " << l2);
        CHECK(nd < 1e-5);
        CHECK(dl < 1e-4);
        CHECK(l2 < 1e-4);
    }

    TEST_CASE("non-delayed L1 optimum with weights 50")
    {
        const OcpSolution& s = nondelayed_w50();
        CHECK(s.diagnostics.converged);
        CHECK(rel(s.objective_value, 28390.73) < 0.005);
        REQUIRE(s.schedule.has_value());
        REQUIRE(s.schedule->controls[0].switches.size() == 1);
        REQUIRE(s.schedule->controls[1].switches.size() == 1);
        CHECK(s.schedule->controls[0].initial_level == 1);
        CHECK(s.schedule->controls[1].initial_level == 1);
        CHECK(std::abs(s.schedule->controls[0].switches[0] - 3.677250) < 0.05);
        CHECK(std::abs(s.schedule->controls[1].switches[0] - 4.866993) < 0.05);
        const StateVec& x = s.trajectory.states.back();
        CHECK(rel(x.s, 1034.634) < 0.01);
        CHECK(rel(x.l1, 53.59586) < 0.01);
        CHECK(rel(x.i, 25.89556) < 0.01);
        CHECK(rel(x.l2, 780.7667) < 0.01);
        CHECK(rel(x.r, 28105.11) < 0.01);
        const AdjointVec& l0 = s.adjoints.front();
        CHECK(std::abs(l0.lam_s - 0.376159) < 1e-2);
        CHECK(std::abs(l0.lam_l1 - 0.452761) < 1e-2);
        CHECK(std::abs(l0.lam_i - 4.03059) < 1e-2);
        CHECK(std::abs(l0.lam_l2 - 0.394839) < 1e-2);
    }

    TEST_CASE("stored objective equals trapezoidal quadrature of the stored trajectory")
    {
        const OcpProblem prob = OcpProblem::reference(100, kNoDelay, 50);
        const OcpSolution& s = nondelayed_w50();
        CHECK(rel(s.objective_value, trapezoid_objective(prob, s.trajectory)) < 1e-10);
        const OcpSolution& d = delayed_w50();
        CHECK(rel(d.objective_value, trapezoid_objective(OcpProblem::reference(100, kDelayed, 50), d.trajectory)) < 1e-10);
    }

    TEST_CASE("solver objective never increases")
    {
        for (const OcpSolution* s : {&nondelayed_w50(), &delayed_w50()}) {
            const auto& h = s->diagnostics.objective_history;
            REQUIRE(h.size() > 2);
            for (std::size_t k = 1; k < h.size(); ++k) CHECK(h[k] <= h[k - 1]);
        }
    }

    TEST_CASE("transversality and terminal switching values")
    {
        for (const auto& [sol, prob] : {std::pair{&nondelayed_w50(), OcpProblem::reference(100, kNoDelay, 50)},
                                        std::pair{&delayed_w50(), OcpProblem::reference(100, kDelayed, 50)}}) {
            const AdjointVec& lt = sol->adjoints.back();
            CHECK(lt.lam_s == 0.0);
            CHECK(lt.lam_l1 == 0.0);
            CHECK(lt.lam_i == 0.0);
            CHECK(lt.lam_l2 == 0.0);
            CHECK(sol->switching.phi1.back() == -prob.objective.w1);
            CHECK(sol->switching.phi2.back() == -prob.objective.w2);
            // constant -W_k on [T - d_uk, T]
            const int lag = prob.grid.lag_steps(prob.delays.d_u1);
            const int n = prob.grid.n_steps;
            for (int j = n - lag; j <= n; ++j) {
                CHECK(sol->switching.phi1[j] == -prob.objective.w1);
                CHECK(sol->switching.phi2[j] == -prob.objective.w2);
            }
        }
    }

    TEST_CASE("continuous adjoint sweep reproduces the stored adjoints")
    {
        const OcpProblem prob = OcpProblem::reference(100, kDelayed, 50);
        const OcpSolution& s = delayed_w50();
        const auto lam = adjoint_backward(prob, s.trajectory);
        CHECK(lam.front().lam_i == s.adjoints.front().lam_i);
        Trajectory other = s.trajectory;
        other.grid.n_steps = 100;
        CHECK_THROWS_AS(adjoint_backward(prob, other), GridError);
    }

    TEST_CASE("bang-bang law and strict switching")
    {
        for (const auto& [sol, prob] : {std::pair{&nondelayed_w50(), OcpProblem::reference(100, kNoDelay, 50)},
                                        std::pair{&delayed_w50(), OcpProblem::reference(100, kDelayed, 50)}}) {
            const BangBangReport r = verify_bang_bang(prob, *sol);
            CHECK(r.law_satisfied);
            CHECK(r.switch_count[0] == 1);
            CHECK(r.switch_count[1] == 1);
            CHECK(r.strict);
            for (int k = 0; k < 2; ++k) {
                REQUIRE(r.crossings[k].size() == 1);
                CHECK(r.crossing_slopes[k][0] < 0.0);
                CHECK(std::abs(r.crossings[k][0] - sol->schedule->controls[k].switches[0]) < 0.05);
            }
        }
    }

    TEST_CASE("delayed L1 optimum with weights 50")
    {
        const OcpSolution& s = delayed_w50();
        CHECK(s.diagnostics.converged);
        CHECK(rel(s.objective_value, 26784.60) < 0.005);
        CHECK(std::abs(s.schedule->controls[0].switches.at(0) - 3.108) < 0.05);
        CHECK(std::abs(s.schedule->controls[1].switches.at(0) - 4.581) < 0.05);
        const StateVec& x = s.trajectory.states.back();
        CHECK(rel(x.s, 1234.598) < 0.01);
        CHECK(rel(x.l1, 24.93928) < 0.01);
        CHECK(rel(x.i, 11.71451) < 0.01);
        CHECK(rel(x.l2, 469.8865) < 0.01);
        CHECK(rel(x.r, 28258.86) < 0.01);
        const AdjointVec& l0 = s.adjoints.front();
        CHECK(std::abs(l0.lam_s - 0.3789) < 1e-2);
        CHECK(std::abs(l0.lam_l1 - 0.4682) < 1e-2);
        CHECK(std::abs(l0.lam_i - 3.6412) < 1e-2);
        CHECK(std::abs(l0.lam_l2 - 0.4263) < 1e-2);
    }

    TEST_CASE("delays lower the optimum below the replayed non-delayed control")
    {
        const OcpProblem delayed = OcpProblem::reference(100, kDelayed, 50);
        const TrapezoidalTranscription tr(delayed.params, delayed.delays, delayed.history, delayed.grid,
                                          delayed.objective);
        const double replay = tr.objective(tr.pack(nondelayed_w50().trajectory.controls));
        CHECK(delayed_w50().objective_value < replay);
        CHECK(delayed_w50().objective_value < nondelayed_w50().objective_value);
    }

    TEST_CASE("quadratic cost stays within 0.1% of the linear cost")
    {
        const OcpProblem prob = OcpProblem::reference(100, kNoDelay, 50, ObjectiveKind::L2);
        const OcpSolution s = solve(prob);
        CHECK(s.diagnostics.converged);
        CHECK_FALSE(s.schedule.has_value());
        CHECK(std::abs(s.objective_value - nondelayed_w50().objective_value) / nondelayed_w50().objective_value < 1e-3);
        const BangBangReport r = verify_bang_bang(prob, s);
        CHECK(r.law_satisfied);
        CHECK(r.note.find("continuous") != std::string::npos);
        // intermediate control values appear
        int interior = 0;
        for (const auto& u : s.trajectory.controls)
            if (u.u1 > 0.05 && u.u1 < 0.95) ++interior;
        CHECK(interior > 10);
    }

    TEST_CASE("weights 150: u2 starts with a short zero arc")
    {
        const OcpProblem prob = OcpProblem::reference(100, kNoDelay, 150);
        const OcpSolution s = solve(prob);
        CHECK(rel(s.objective_value, 29175.97) < 0.005);
        REQUIRE(s.schedule.has_value());
        const auto& u1 = s.schedule->controls[0];
        const auto& u2 = s.schedule->controls[1];
        CHECK(u1.initial_level == 1);
        REQUIRE(u1.switches.size() == 1);
        CHECK(std::abs(u1.switches[0] - 2.662) < 0.02);
        CHECK(u2.initial_level == 0);
        REQUIRE(u2.switches.size() == 2);
        CHECK(std::abs(u2.switches[0] - 0.00260) < 0.02);
        CHECK(std::abs(u2.switches[1] - 4.633) < 0.02);
        CHECK(verify_bang_bang(prob, s).law_satisfied);
    }

    TEST_CASE("bounds fixed at zero reproduce the uncontrolled quadrature")
    {
        OcpProblem prob = OcpProblem::reference(100, kDelayed, 50);
        prob.upper = {0, 0};
        const OcpSolution s = solve(prob);
        const TrapezoidalTranscription tr(prob.params, prob.delays, prob.history, prob.grid, prob.objective);
        CHECK(s.objective_value == tr.objective(Eigen::VectorXd::Zero(tr.variables())));
        for (const auto& u : s.trajectory.controls) CHECK(u == ControlVec{0, 0});
    }

    TEST_CASE("a dominant weight switches the control off")
    {
        OcpProblem prob = OcpProblem::reference(100, kNoDelay, 50);
        prob.objective.w1 = 1e6;
        const OcpSolution s = solve(prob);
        for (double phi : s.switching.phi1) CHECK(phi < 0.0);
        for (const auto& u : s.trajectory.controls) CHECK(u.u1 == 0.0);
    }

    TEST_CASE("problem validation")
    {
        OcpProblem prob = OcpProblem::reference(100, kDelayed, 50);
        prob.grid.n_steps = 2499;
        CHECK_THROWS_AS(solve(prob), GridError);
        prob = OcpProblem::reference(100, kDelayed, 50);
        prob.lower = {0.5, 0};
        prob.upper = {0.2, 1};
        CHECK_THROWS_AS(solve(prob), DomainError);
        prob = OcpProblem::reference(100, kDelayed, 50);
        CHECK_THROWS_AS(solve(prob, std::vector<ControlVec>(2501, ControlVec{2, 0})), DomainError);
    }
}
