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
#include "oracles.hpp"
#include "tbdelay/errors.hpp"
#include "tbdelay/integrator.hpp"
#include "tbdelay/schedule.hpp"

#include <doctest.h>

#include <sstream>

using namespace tbdelay;

namespace {

Trajectory run(double beta, DelayConfig d, double t_f, int n, const ControlSource& u = ControlSource::zero())
{
    const ModelParams p = ModelParams::reference(beta);
    return integrate(p, d, HistorySpec::reference(p.n_pop), Grid{0.0, t_f, n}, u);
}

double min_component(const Trajectory& t)
{
    double m = INFINITY;
    for (const auto& x : t.states) m = std::min({m, x.s, x.l1, x.i, x.l2, x.r});
    return m;
}

double conservation(const Trajectory& t, double n)
{
    double m = 0;
    for (const auto& x : t.states) m = std::max(m, std::abs(x.sum() - n));
    return m;
}

} // namespace

TEST_SUITE("integrator")
{
    TEST_CASE("reference history is the (76, 36, 5, 2, 1)/120 split")
    {
        const HistorySpec h = HistorySpec::reference(30000);
        CHECK(h.initial_state.s == doctest::Approx(76.0 / 120 * 30000));
        CHECK(h.initial_state.l1 == doctest::Approx(36.0 / 120 * 30000));
        CHECK(h.initial_state.i == doctest::Approx(5.0 / 120 * 30000));
        CHECK(h.initial_state.l2 == doctest::Approx(2.0 / 120 * 30000));
        CHECK(h.initial_state.r == doctest::Approx(1.0 / 120 * 30000));
        CHECK(h.i_history == doctest::Approx(5.0 / 120 * 30000));
        CHECK(h.control_history == ControlVec{0, 0});
    }

    TEST_CASE("zero horizon gives the initial state only")
    {
        const Trajectory t = run(100, {}, 0.0, 0);
        REQUIRE(t.nodes() == 1);
        CHECK(t.states[0] == HistorySpec::reference(30000).initial_state);
    }

    TEST_CASE("undelayed run matches a plain RK4 at half the step")
    {
        const Trajectory t = run(100, {}, 5.0, 2500);
        const auto ref = oracle::plain_rk4(ModelParams::reference(100),
                                           oracle::to_array(HistorySpec::reference(30000).initial_state), 5.0, 5000);
        double worst = 0;
        for (int k = 0; k <= 2500; k += 50)
            worst = std::max(worst, oracle::max_abs(oracle::to_array(t.states[k]), ref[2 * k]) / 30000);
        CHECK(worst < 1e-6);
    }

    TEST_CASE("fourth-order convergence: error ratio under step halving")
    {
        const ModelParams p = ModelParams::reference(100);
        const auto ref = oracle::to_array(run(100, {}, 5.0, 1600).states.back());
        const double e1 = oracle::max_abs(oracle::to_array(run(100, {}, 5.0, 100).states.back()), ref);
        const double e2 = oracle::max_abs(oracle::to_array(run(100, {}, 5.0, 200).states.back()), ref);
        const double ratio = e1 / e2;
        INFO("error ratio " << ratio);
        CHECK(ratio >= 12.0);
        CHECK(ratio <= 20.0);
        (void)p;
    }

    TEST_CASE("step must divide every positive delay")
    {
        CHECK_THROWS_AS(run(100, {0.1, 0, 0}, 5.0, 2499), GridError);
        CHECK_THROWS_AS(run(100, {0, 0.05, 0}, 5.0, 30), GridError);
        CHECK_NOTHROW(run(100, {0.1, 0.2, 0.2}, 5.0, 500));
    }

    TEST_CASE("dense evaluation: nodes exact, history before t0, range errors")
    {
        const Trajectory t = run(100, {0.1, 0.2, 0.2}, 5.0, 2500);
        for (int k : {0, 1, 777, 2500}) CHECK(dense_eval(t, t.time(k)) == t.states[k]);
        const StateVec pre = dense_eval(t, -0.05);
        CHECK(pre.i == 5.0 / 120 * 30000);
        CHECK(dense_eval(t, -0.1).i == t.history.i_history);
        CHECK_THROWS_AS(dense_eval(t, -0.3), RangeError);
        CHECK_THROWS_AS(dense_eval(t, 5.01), RangeError);
    }

    TEST_CASE("mid-step dense values agree with a four times finer grid")
    {
        const Trajectory coarse = run(100, {0.1, 0, 0}, 5.0, 2500);
        const Trajectory fine = run(100, {0.1, 0, 0}, 5.0, 10000);
        double worst = 0;
        for (int k = 0; k < 2500; k += 7) {
            const double t = coarse.time(k) + 0.5 * coarse.grid.step();
            worst = std::max(worst,
                             oracle::max_abs(oracle::to_array(dense_eval(coarse, t)), oracle::to_array(fine.states[4 * k + 2])));
        }
        CHECK(worst < 1e-6 * 30000);
    }

    TEST_CASE("conservation and positivity on the reference scenarios")
    {
        const ControlSource nd = ArcSchedule::one_switch(3.677250, 4.866993).source();
        const ControlSource dl = ArcSchedule::one_switch(3.108, 4.581).source();
        for (const Trajectory& t : {run(100, {}, 5.0, 2500, nd), run(100, {0.1, 0.2, 0.2}, 5.0, 2500, dl),
                                    run(40, {0.1, 0, 0}, 100.0, 50000), run(150, {0.1, 0.05, 0.1}, 5.0, 2500, dl)}) {
            CHECK(t.nodes() == t.grid.n_steps + 1);
            CHECK(conservation(t, 30000) < 1e-6 * 30000);
            CHECK(min_component(t) > -1e-9 * 30000);
        }
    }

    TEST_CASE("delayed controls follow the shifted source with zero history")
    {
        // u1 on from t = 0 with delay 0.2: L1 must evolve as uncontrolled until 0.2
        const Trajectory a = run(100, {0, 0.2, 0}, 1.0, 500, ControlSource::constant({1, 0}));
        const Trajectory b = run(100, {}, 1.0, 500);
        CHECK(a.states[99] == b.states[99]);
        CHECK(a.states[150].l1 < b.states[150].l1);
    }

    TEST_CASE("disease free scenario: infection dies out at beta = 40, d = 0.1")
    {
        const Trajectory t100 = run(40, {0.1, 0, 0}, 100.0, 50000);
        const StateVec& x = t100.states.back();
        // the infected classes are gone at T = 100 ...
        CHECK(std::max({x.l1, x.i, x.l2}) < 0.005 * 30000);
        // ... while R drains at the slow rate mu + omega_r, so the whole state needs a longer horizon
        const Trajectory t500 = run(40, {0.1, 0, 0}, 500.0, 250000);
        const StateVec& y = t500.states.back();
        CHECK(oracle::max_abs(oracle::to_array(y), {30000, 0, 0, 0, 0}) < 0.005 * 30000);
    }

    TEST_CASE("endemic scenario: beta = 100, d = 0.1 settles at the endemic point")
    {
        const Trajectory t = run(100, {0.1, 0, 0}, 2000.0, 1000000);
        const oracle::State5 ref = oracle::endemic_by_bisection(ModelParams::reference(100));
        const oracle::State5 got = oracle::to_array(t.states.back());
        for (int k = 0; k < 5; ++k) CHECK(got[k] == doctest::Approx(ref[k]).epsilon(1e-3));
    }

    TEST_CASE("non-finite control input is rejected")
    {
        ControlSource bad;
        bad.eval = [](double) { return ControlVec{std::nan(""), 0}; };
        CHECK_THROWS_AS(run(100, {}, 1.0, 10, bad), Error);
    }

    TEST_CASE("an unstable step size reports a blowup with its time")
    {
        try {
            run(100, {}, 5.0, 10);
            FAIL("expected a blowup");
        } catch (const BlowupError& e) {
            CHECK(e.category() == ErrorCategory::Numeric);
            CHECK(e.time() > 0.0);
            CHECK(e.time() <= 5.0);
        }
    }

    TEST_CASE("trajectory CSV has the documented header and full precision")
    {
        const Trajectory t = run(100, {}, 0.01, 1);
        std::ostringstream os;
        write_trajectory_csv(t, os);
        std::istringstream is(os.str());
        std::string header, row;
        std::getline(is, header);
        std::getline(is, row);
        CHECK(header == "t,S,L1,I,L2,R,u1,u2");
        CHECK(row.rfind("0,", 0) == 0);
        // values round-trip exactly
        std::istringstream fields(row);
        std::string cell;
        std::vector<double> v;
        while (std::getline(fields, cell, ',')) v.push_back(std::stod(cell));
        REQUIRE(v.size() == 8);
        CHECK(v[1] == t.states[0].s);
        CHECK(v[3] == t.states[0].i);
    }
}
