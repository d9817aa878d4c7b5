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
// Python bindings. Jobs cross the boundary as JSON text so the Python side
// shares one validated schema with the command-line tool; tables come back
// as NumPy arrays.

#include "tbdelay/errors.hpp"
#include "tbdelay/iop.hpp"
#include "tbdelay/job.hpp"
#include "tbdelay/model.hpp"
#include "tbdelay/ocp.hpp"
#include "tbdelay/report.hpp"
#include "tbdelay/stability.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <utility>

namespace py = pybind11;
using nlohmann::json;
using namespace tbdelay;

namespace {

py::array_t<double> as_array(const Table& t)
{
    py::array_t<double> a({t.rows.size(), t.columns.size()});
    auto m = a.mutable_unchecked<2>();
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        for (std::size_t c = 0; c < t.columns.size(); ++c) m(r, c) = t.rows[r][c];
    return a;
}

py::tuple table_result(const json& summary, const Table& t)
{
    return py::make_tuple(summary.dump(), t.columns, as_array(t));
}

EquilibriumPoint pick(const ModelParams& p, const std::string& which)
{
    if (which == "dfe") return disease_free_equilibrium(p);
    if (which == "endemic") return endemic_equilibrium(p);
    throw ParameterError("equilibrium must be 'dfe' or 'endemic', got '" + which + "'");
}

std::string resolve(const std::string& text) { return to_json(parse_job_text(text)).dump(); }

std::string equilibria(const std::string& text)
{
    const JobSpec job = parse_job_text(text);
    json j{{"r0", to_json(basic_reproduction_number(job.params))},
           {"disease_free", to_json(disease_free_equilibrium(job.params))}};
    try {
        j["endemic"] = to_json(endemic_equilibrium(job.params));
    } catch (const NoEndemicEquilibrium&) {
        j["endemic"] = nullptr;
    }
    return j.dump();
}

py::tuple simulate(const std::string& text)
{
    const JobSpec job = parse_job_text(text);
    Trajectory traj;
    json s{{"job_hash", job_hash(job)}};
    if (job.schedule) {
        const ScheduleEvaluation ev = simulate_schedule(*job.schedule, job.problem());
        traj = ev.trajectory;
        s["objective"] = ev.objective;
    } else {
        traj = integrate(job.params, job.delays, job.history, job.grid, ControlSource::zero());
    }
    s["final_state"] = to_json(traj.states.back());
    s["infected_integral"] = traj.infected_integral.back();
    return table_result(s, trajectory_table(traj));
}

std::string classify_json(const std::string& text, const std::string& which, double delay)
{
    const JobSpec job = parse_job_text(text);
    ClassifyOptions o;
    o.bracket_lo = job.stability.bracket_lo;
    o.bracket_hi = job.stability.bracket_hi;
    return to_json(classify(job.params, pick(job.params, which), delay, o)).dump();
}

py::tuple optimize(const std::string& text)
{
    const JobSpec job = parse_job_text(text);
    const OcpProblem prob = job.problem();
    OcpSolution sol;
    {
        py::gil_scoped_release release;
        sol = solve(prob, {}, job.ocp_options());
    }
    const BangBangReport bb = verify_bang_bang(prob, sol);
    return table_result(solution_summary(prob, sol, bb), solution_table(sol));
}

py::tuple iop(const std::string& text, bool hessian)
{
    const JobSpec job = parse_job_text(text);
    const OcpProblem prob = job.problem();
    json s;
    IopResult res;
    {
        py::gil_scoped_release release;
        ArcSchedule init;
        if (job.schedule) {
            init = *job.schedule;
        } else {
            const OcpSolution sol = solve(prob, {}, job.ocp_options());
            if (!sol.schedule) throw DomainError("transcription produced no bang-bang schedule to refine");
            init = *sol.schedule;
        }
        IopOptions io;
        io.simplex.initial_step = job.solver.nm_initial_step;
        io.simplex.max_evaluations = job.solver.nm_max_evaluations;
        io.gradient_step = job.solver.gradient_step;
        io.polish_iterations = job.solver.polish_iterations;
        res = optimize_switch_times(init, prob, io);
        if (hessian) s["hessian"] = to_json(hessian_fd(res.schedule, prob, job.solver.hessian_step));
    }
    s["objective"] = res.objective;
    s["schedule"] = to_json(res.schedule);
    s["gradient"] = res.gradient;
    s["converged"] = res.converged;
    s["message"] = res.message;
    s["terminal_state"] = to_json(res.trajectory.states.back());
    return table_result(s, trajectory_table(res.trajectory));
}

py::tuple sweep(const std::string& text)
{
    const JobSpec job = parse_job_text(text);
    SweepResult res;
    {
        py::gil_scoped_release release;
        res = beta_sweep(job.sweep.beta_min, job.sweep.beta_max, job.sweep.steps, job.problem(), job.ocp_options());
    }
    return table_result(json{{"checks", to_json(check_sweep(res))}}, sweep_table(res));
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Delayed TB model: simulation, stability and optimal control";
    m.attr("__version__") = TBDELAY_VERSION;

    static py::exception<Error> base(m, "TbdelayError", PyExc_RuntimeError);
    static py::exception<Error> validation(m, "ValidationError", base.ptr());
    static py::exception<Error> numeric(m, "NumericError", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            (e.category() == ErrorCategory::Validation ? validation : numeric)(e.what());
        }
    });

    m.def("resolve_job", &resolve, py::arg("job_json"), "Validated job with every default filled in (JSON text).");
    m.def("job_hash", [](const std::string& t) { return job_hash(parse_job_text(t)); }, py::arg("job_json"));
    m.def("equilibria", &equilibria, py::arg("job_json"));
    m.def("simulate", &simulate, py::arg("job_json"));
    m.def("classify", &classify_json, py::arg("job_json"), py::arg("equilibrium"), py::arg("delay"));
    m.def("optimize", &optimize, py::arg("job_json"));
    m.def("iop", &iop, py::arg("job_json"), py::arg("hessian") = true);
    m.def("sweep", &sweep, py::arg("job_json"));
}
