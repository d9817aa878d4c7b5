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
#include "tbdelay/model.hpp"

#include <doctest.h>

#include <random>

using namespace tbdelay;

TEST_SUITE("model")
{
    TEST_CASE("basic reproduction number at the reference parameters")
    {
        const R0Breakdown r100 = basic_reproduction_number(ModelParams::reference(100));
        CHECK(r100.value == doctest::Approx(2.202067).epsilon(1e-5));
        CHECK(basic_reproduction_number(ModelParams::reference(40)).value == doctest::Approx(0.880827).epsilon(1e-5));
        CHECK(basic_reproduction_number(ModelParams::reference(0)).value == 0.0);
        CHECK(r100.value == doctest::Approx(r100.numerator / r100.denominator).epsilon(1e-15));
        CHECK(r100.denominator > 0.0);
    }

    TEST_CASE("R0 matches the term-by-term formula and is linear in beta")
    {
        for (double beta : {0.0, 7.5, 40.0, 100.0, 150.0, 1000.0}) {
            const ModelParams p = ModelParams::reference(beta);
            CHECK(basic_reproduction_number(p).value == doctest::Approx(oracle::r0(p)).epsilon(1e-13));
            ModelParams p2 = p;
            p2.beta = 2 * beta;
            CHECK(basic_reproduction_number(p2).value ==
                  doctest::Approx(2 * basic_reproduction_number(p).value).epsilon(1e-14));
        }
    }

    TEST_CASE("disease free equilibrium")
    {
        const EquilibriumPoint e0 = disease_free_equilibrium(ModelParams::reference(40));
        CHECK(e0.state == StateVec{30000, 0, 0, 0, 0});
        CHECK(e0.kind == EquilibriumKind::DiseaseFree);
        CHECK(e0.residual_norm == 0.0);
        ModelParams p1;
        p1.n_pop = 1;
        CHECK(disease_free_equilibrium(p1).state == StateVec{1, 0, 0, 0, 0});
        const StateVec d = rhs_controlled(e0.state, 0.0, 0.0, 0.0, ModelParams::reference(40));
        CHECK(d == StateVec{0, 0, 0, 0, 0});
        CHECK(sum_derivative_check(e0.state, 0.0, 0.0, 0.0, ModelParams::reference(40)) == 0.0);
    }

    TEST_CASE("controlled right-hand side against the displayed equations")
    {
        ModelParams p = ModelParams::reference(100);
        p.n_pop = 2000;
        const StateVec x{1000, 100, 50, 200, 650};
        const StateVec d = rhs_controlled(x, 50, 0.5, 0.5, p);
        const oracle::State5 ref = oracle::rhs(oracle::to_array(x), 50, 0.5, 0.5, p);
        const oracle::State5 got = oracle::to_array(d);
        for (int k = 0; k < 5; ++k) CHECK(got[k] == doctest::Approx(ref[k]).epsilon(1e-13));

        // distinct delayed I exercises the lag slot
        const StateVec dl = rhs_controlled(x, 30, 0.2, 0.9, p);
        const oracle::State5 refl = oracle::rhs(oracle::to_array(x), 30, 0.2, 0.9, p);
        const oracle::State5 gotl = oracle::to_array(dl);
        for (int k = 0; k < 5; ++k) CHECK(gotl[k] == doctest::Approx(refl[k]).epsilon(1e-13));
    }

    TEST_CASE("reduced system is the first four rows with R eliminated")
    {
        const ModelParams p = ModelParams::reference(100);
        const StateVec x{20000, 3000, 1500, 2500, 3000};
        const Eigen::Vector4d r = reduced_rhs(x.reduced(), 1200, 0.3, 0.7, p);
        const StateVec full = rhs_controlled(x, 1200, 0.3, 0.7, p);
        CHECK(r[0] == doctest::Approx(full.s));
        CHECK(r[1] == doctest::Approx(full.l1));
        CHECK(r[2] == doctest::Approx(full.i));
        CHECK(r[3] == doctest::Approx(full.l2));

        // analytic Jacobian against central differences (delayed I held fixed)
        const Eigen::Matrix4d j = reduced_jacobian(x.reduced(), 0.3, 0.7, p);
        for (int c = 0; c < 4; ++c) {
            Eigen::Vector4d a = x.reduced(), b = x.reduced();
            const double h = 1e-3;
            a[c] += h;
            b[c] -= h;
            const Eigen::Vector4d fd = (reduced_rhs(a, 1200, 0.3, 0.7, p) - reduced_rhs(b, 1200, 0.3, 0.7, p)) / (2 * h);
            for (int r2 = 0; r2 < 4; ++r2) CHECK(j(r2, c) == doctest::Approx(fd[r2]).epsilon(1e-7).scale(1.0));
        }
    }

    TEST_CASE("conservation: derivative components sum to zero (fuzzed)")
    {
        std::mt19937_64 rng(20260101);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            ModelParams p = ModelParams::reference(200 * unit(rng));
            p.n_pop = 1.0 + 1e5 * unit(rng);
            double w[5], tot = 0;
            for (double& v : w) tot += (v = unit(rng));
            const StateVec x{p.n_pop * w[0] / tot, p.n_pop * w[1] / tot, p.n_pop * w[2] / tot, p.n_pop * w[3] / tot,
                             p.n_pop * w[4] / tot};
            const double s = sum_derivative_check(x, p.n_pop * unit(rng), unit(rng), unit(rng), p);
            worst = std::max(worst, std::abs(s) / p.n_pop);
        }
        CHECK(worst < 1e-9);
    }

    TEST_CASE("endemic equilibrium at beta = 100")
    {
        const ModelParams p = ModelParams::reference(100);
        const EquilibriumPoint ee = endemic_equilibrium(p);
        CHECK(ee.kind == EquilibriumKind::Endemic);
        CHECK(ee.state.s == doctest::Approx(8407.668384).epsilon(1e-3));
        CHECK(ee.state.l1 == doctest::Approx(36.111397).epsilon(1e-3));
        CHECK(ee.state.i == doctest::Approx(11.006448).epsilon(1e-3));
        CHECK(ee.state.l2 == doctest::Approx(402.155827).epsilon(1e-3));
        CHECK(ee.state.r == doctest::Approx(30000 - (8407.668384 + 36.111397 + 11.006448 + 402.155827)).epsilon(1e-3));
        CHECK(ee.residual_norm < 1e-8 * p.n_pop);
        CHECK(steady_state_residual(ee.state, p) < 1e-8 * p.n_pop);
        const StateVec d = rhs_controlled(ee.state, ee.state.i, 0, 0, p);
        CHECK(std::max({std::abs(d.s), std::abs(d.l1), std::abs(d.i), std::abs(d.l2), std::abs(d.r)}) < 1e-6);
    }

    TEST_CASE("endemic equilibrium agrees with the one-dimensional bisection oracle")
    {
        for (double beta : {50.0, 100.0, 150.0, 400.0, 1000.0}) {
            const ModelParams p = ModelParams::reference(beta);
            const oracle::State5 ref = oracle::endemic_by_bisection(p);
            const oracle::State5 got = oracle::to_array(endemic_equilibrium(p).state);
            for (int k = 0; k < 5; ++k) CHECK(got[k] == doctest::Approx(ref[k]).epsilon(1e-8));
        }
    }

    TEST_CASE("endemic point is the same from several Newton seeds")
    {
        const ModelParams p = ModelParams::reference(100);
        const StateVec ref = endemic_equilibrium(p).state;
        const double n = p.n_pop;
        for (const Eigen::Vector4d& seed :
             {Eigen::Vector4d(0.9 * n, 0.01 * n, 0.01 * n, 0.05 * n), Eigen::Vector4d(0.3 * n, 0.001 * n, 0.001 * n, 0.01 * n),
              Eigen::Vector4d(0.5 * n, 0.05 * n, 0.02 * n, 0.1 * n)}) {
            const StateVec x = endemic_equilibrium_from(p, seed).state;
            CHECK(x.s == doctest::Approx(ref.s).epsilon(1e-9));
            CHECK(x.i == doctest::Approx(ref.i).epsilon(1e-9));
        }
    }

    TEST_CASE("endemic equilibrium exists exactly when R0 > 1")
    {
        // threshold by bisection on R0(beta) = 1
        double lo = 0, hi = 100;
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            (basic_reproduction_number(ModelParams::reference(mid)).value < 1 ? lo : hi) = mid;
        }
        CHECK(lo == doctest::Approx(45.4).epsilon(1e-2));
        for (double beta = 30; beta <= 60; beta += 1.25) {
            const ModelParams p = ModelParams::reference(beta);
            if (basic_reproduction_number(p).value > 1.0) {
                const EquilibriumPoint ee = endemic_equilibrium(p);
                CHECK(ee.state.i > 0.0);
                CHECK(ee.residual_norm < 1e-8 * p.n_pop);
            } else {
                CHECK_THROWS_AS(endemic_equilibrium(p), NoEndemicEquilibrium);
            }
        }
    }

    TEST_CASE("parameter validation is strict")
    {
        ModelParams p;
        p.mu = -0.1;
        CHECK_THROWS_AS(p.validate(), ParameterError);
        p = ModelParams{};
        p.phi = 1.5;
        CHECK_THROWS_AS(p.validate(), ParameterError);
        p = ModelParams{};
        p.n_pop = 0;
        CHECK_THROWS_AS(p.validate(), ParameterError);
        p = ModelParams{};
        p.beta = std::nan("");
        CHECK_THROWS_AS(p.validate(), ParameterError);
        CHECK_NOTHROW(ModelParams{}.validate());

        const StateVec bad{std::nan(""), 0, 0, 0, 0};
        CHECK_THROWS_AS(rhs_controlled(bad, 0, 0, 0, ModelParams{}), DomainError);
        CHECK_THROWS_AS(rhs_controlled(StateVec{1, 0, 0, 0, 0}, INFINITY, 0, 0, ModelParams{}), DomainError);
    }
}
