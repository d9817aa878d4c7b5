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
#include "tbdelay/job.hpp"
#include "tbdelay/report.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace tbdelay;

TEST_SUITE("job")
{
    TEST_CASE("empty job resolves to the reference scenario")
    {
        const JobSpec j = parse_job_text("{}");
        CHECK(j.params.beta == 100);
        CHECK(j.params.n_pop == 30000);
        CHECK(j.grid.t_f == 5);
        CHECK(j.grid.n_steps == 2500);
        CHECK(j.objective.kind == ObjectiveKind::L1);
        CHECK(j.objective.w1 == 50);
        CHECK(j.history.initial_state == HistorySpec::reference(30000).initial_state);
        CHECK_FALSE(j.schedule.has_value());
    }

    TEST_CASE("history defaults follow the population size; partial overrides keep the rest")
    {
        const JobSpec j = parse_job_text(R"({"params": {"n_pop": 1200}})");
        CHECK(j.history.initial_state.s == doctest::Approx(760));
        CHECK(j.history.i_history == doctest::Approx(50));
        const JobSpec k = parse_job_text(R"({"history": {"i_history": 7, "control_history": {"u1": 1}}})");
        CHECK(k.history.i_history == 7);
        CHECK(k.history.control_history.u1 == 1);
        CHECK(k.history.initial_state.s == doctest::Approx(19000));
    }

    TEST_CASE("unknown keys are rejected at every level")
    {
        CHECK_THROWS_AS(parse_job_text(R"({"bogus": 1})"), ParameterError);
        CHECK_THROWS_AS(parse_job_text(R"({"params": {"betta": 1}})"), ParameterError);
        CHECK_THROWS_AS(parse_job_text(R"({"history": {"initial_state": {"x": 1}}})"), ParameterError);
        CHECK_THROWS_AS(parse_job_text(R"({"schedule": {"u1": {"switch": [1]}}})"), ParameterError);
        CHECK_THROWS_AS(parse_job_text(R"({"solver": {"tolerance": 1}})"), ParameterError);
        try {
            parse_job_text(R"({"grid": {"tf": 3}})");
            FAIL("expected an error");
        } catch (const ParameterError& e) {
            CHECK(std::string(e.what()).find("grid.tf") != std::string::npos);
        }
    }

    TEST_CASE("type errors and invalid values")
    {
        CHECK_THROWS_AS(parse_job_text("{"), ParameterError);
        CHECK_THROWS_AS(parse_job_text("[]"), ParameterError);
        CHECK_THROWS_AS(parse_job_text(R"({"params": {"beta": "high"}})"), ParameterError);
        CHECK_THROWS_AS(parse_job_text(R"({"grid": {"n_steps": 2.5}})"), ParameterError);
        CHECK_THROWS_AS(parse_job_text(R"({"params": {"mu": -1}})"), ParameterError);
        CHECK_THROWS_AS(parse_job_text(R"({"objective": {"kind": "L3"}})"), ParameterError);
        CHECK_THROWS_AS(parse_job_text(R"({"objective": {"w1": 0}})"), ParameterError);
        CHECK_THROWS_AS(parse_job_text(R"({"delays": {"d_i": 0.1}, "grid": {"n_steps": 2499}})"), GridError);
        CHECK_THROWS_AS(parse_job_text(R"({"history": {"initial_state": {"s": 1}}})"), ParameterError);
        CHECK_THROWS_AS(parse_job_text(R"({"bounds": {"upper": {"u1": 2}}})"), ParameterError);
        CHECK_THROWS_AS(parse_job_text(R"({"sweep": {"steps": 1}})"), ParameterError);
        CHECK_THROWS_AS(parse_job_text(R"({"stability": {"equilibrium": "all"}})"), ParameterError);
        CHECK_THROWS_AS(parse_job_text(R"({"stability": {"bracket": [1]}})"), ParameterError);
        CHECK_THROWS_AS(parse_job_text(R"({"schedule": {"u1": {"switches": [9]}}})"), Error);
        CHECK_THROWS_AS(load_job("/nonexistent/job.json"), ParameterError);
    }

    TEST_CASE("resolved job round-trips and hashes deterministically")
    {
        const JobSpec a = parse_job_text(
            R"({"scenario": "x", "params": {"beta": 70}, "delays": {"d_i": 0.1, "d_u1": 0.2},
                "schedule": {"u1": {"initial_level": 1, "switches": [2.5]}, "u2": {"initial_level": 0, "switches": []}},
                "stability": {"delay": 0.3}})");
        const JobSpec b = parse_job(to_json(a));
        CHECK(job_hash(a) == job_hash(b));
        CHECK(to_json(a) == to_json(b));
        CHECK(b.stability.delay == 0.3);
        CHECK(b.schedule->controls[0].switches == std::vector<double>{2.5});
        CHECK(job_hash(a).size() == 16);
        JobSpec c = a;
        c.params.beta = 70.000001;
        CHECK(job_hash(c) != job_hash(a));
    }

    TEST_CASE("bundled jobs load and validate")
    {
        int count = 0;
        for (const auto& entry : std::filesystem::directory_iterator(TBDELAY_JOBS_DIR)) {
            if (entry.path().extension() != ".json") continue;
            CAPTURE(entry.path().string());
            const JobSpec j = load_job(entry.path());
            CHECK(j.scenario == entry.path().stem().string());
            ++count;
        }
        CHECK(count >= 7);
    }

    TEST_CASE("manifest serialisation")
    {
        RunManifest m;
        m.command = "simulate";
        m.job_hash = "00";
        m.outputs = {"a.csv"};
        const auto j = m.to_json();
        CHECK(j.at("outputs").size() == 1);
        CHECK(utc_timestamp().size() == 20);
    }

    TEST_CASE("tables: CSV text and JSON rows")
    {
        Table t;
        t.columns = {"a", "b"};
        t.rows = {{0.1, 1.0 / 3.0}, {2, -1e-300}};
        std::ostringstream os;
        t.write_csv(os);
        CHECK(os.str() == "a,b\n0.10000000000000001,0.33333333333333331\n2,-1e-300\n");
        const auto j = t.to_json();
        CHECK(j.at("rows").at(1).at(0) == 2.0);
        CHECK(format_number(0.1) == "0.10000000000000001");
    }

    TEST_CASE("sweep table pads missing switch times")
    {
        SweepResult s;
        SweepRecord a, b;
        a.beta = 1;
        a.switches = {1.0, 2.0, 3.0};
        b.beta = 2;
        b.switches = {1.5, 2.5};
        s.records = {a, b};
        const Table t = sweep_table(s);
        CHECK(t.columns.size() == 10);
        CHECK(t.columns.back() == "t3");
        CHECK(std::isnan(t.rows[1].back()));
    }

    TEST_CASE("plot scripts reference their data file")
    {
        CHECK(trajectory_plot_script("trajectory.csv", "x").find("'trajectory.csv'") != std::string::npos);
        const std::string sol = solution_plot_script("solution.csv", "x");
        CHECK(sol.find("layout 2,3") != std::string::npos);
        CHECK(sol.find("set output 'solution.png'") != std::string::npos);
        const std::string sw = sweep_plot_script("sweep.csv", "x");
        std::size_t plots = 0;
        for (std::size_t pos = sw.find("\nplot "); pos != std::string::npos; pos = sw.find("\nplot ", pos + 1)) ++plots;
        CHECK(plots == 6);
    }
}
