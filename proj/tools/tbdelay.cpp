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
// Command line front end: one job per invocation.
//
// Exit codes: 0 success, 2 invalid input, 3 numeric failure,
// 4 solver not converged (outputs still written).

#include "tbdelay/errors.hpp"
#include "tbdelay/iop.hpp"
#include "tbdelay/job.hpp"
#include "tbdelay/ocp.hpp"
#include "tbdelay/report.hpp"
#include "tbdelay/stability.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tbdelay;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitNotConverged = 4;

struct CliOptions {
    std::string job_path;
    std::string out_dir = "out";
    int threads = 1;
    std::string format = "csv";
};

/// Collects written files for the manifest.
class Output {
public:
    explicit Output(const CliOptions& opts) : dir_(opts.out_dir), json_tables_(opts.format == "json")
    {
        fs::create_directories(dir_);
    }

    void text(const std::string& name, const std::string& content)
    {
        std::ofstream os(dir_ / name, std::ios::binary);
        if (!os) throw DomainError("cannot write " + (dir_ / name).string());
        os << content;
        files_.push_back(name);
    }

    void document(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }

    /// Writes `stem.csv` plus a plot script, or `stem.json` in JSON mode.
    void table(const std::string& stem, const Table& t, const std::string& plot_script)
    {
        if (json_tables_) {
            document(stem + ".json", t.to_json());
            return;
        }
        std::ofstream os(dir_ / (stem + ".csv"), std::ios::binary);
        if (!os) throw DomainError("cannot write " + (dir_ / (stem + ".csv")).string());
        t.write_csv(os);
        files_.push_back(stem + ".csv");
        if (!plot_script.empty()) text(stem + ".gp", plot_script);
    }

    const std::vector<std::string>& files() const { return files_; }
    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    bool json_tables_;
    std::vector<std::string> files_;
};

JobSpec read_job(const CliOptions& opts) { return opts.job_path.empty() ? JobSpec{} : load_job(opts.job_path); }

json job_header(const JobSpec& job)
{
    return json{{"scenario", job.scenario}, {"job_hash", job_hash(job)}};
}

double max_abs_diff(const StateVec& a, const StateVec& b)
{
    return std::max({std::abs(a.s - b.s), std::abs(a.l1 - b.l1), std::abs(a.i - b.i), std::abs(a.l2 - b.l2),
                     std::abs(a.r - b.r)});
}

int cmd_simulate(const JobSpec& job, const CliOptions&, Output& out)
{
    const ControlSource src = job.schedule ? job.schedule->source() : ControlSource::zero();
    const Trajectory traj = integrate(job.params, job.delays, job.history, job.grid, src);

    const double n = job.params.n_pop;
    double conservation = 0.0, min_component = n;
    for (const StateVec& x : traj.states) {
        conservation = std::max(conservation, std::abs(x.sum() - n));
        min_component = std::min({min_component, x.s, x.l1, x.i, x.l2, x.r});
    }
    const StateVec& last = traj.states.back();
    const R0Breakdown r0 = basic_reproduction_number(job.params);

    json s = job_header(job);
    s["final_time"] = traj.grid.t_f;
    s["final_state"] = to_json(last);
    s["r0"] = r0.value;
    s["dfe_distance_rel"] = max_abs_diff(last, disease_free_equilibrium(job.params).state) / n;
    if (r0.value > 1.0) {
        const EquilibriumPoint ee = endemic_equilibrium(job.params);
        s["endemic_distance_rel"] = max_abs_diff(last, ee.state) / n;
    }
    s["max_conservation_error"] = conservation;
    s["min_component"] = min_component;
    s["infected_integral"] = traj.infected_integral.back();
    if (job.schedule && job.grid.n_steps > 0) {
        s["schedule"] = to_json(*job.schedule);
        s["schedule_objective"] = simulate_schedule(*job.schedule, job.problem()).objective;
    }

    out.table("trajectory", trajectory_table(traj), trajectory_plot_script("trajectory.csv", job.scenario));
    out.document("summary.json", s);
    std::cout << s.dump(2) << "\n";
    return kExitOk;
}

json equilibria_report(const JobSpec& job)
{
    json j = job_header(job);
    const R0Breakdown r0 = basic_reproduction_number(job.params);
    j["r0"] = to_json(r0);
    j["disease_free"] = to_json(disease_free_equilibrium(job.params));
    if (r0.value > 1.0) {
        j["endemic"] = to_json(endemic_equilibrium(job.params));
    } else {
        j["endemic"] = nullptr;
        j["endemic_note"] = "R0 <= 1: no endemic equilibrium";
    }
    return j;
}

int cmd_equilibria(const JobSpec& job, const CliOptions&, Output& out)
{
    const json j = equilibria_report(job);
    out.document("equilibria.json", j);
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

json matrix_json(const Eigen::Matrix4d& m)
{
    json a = json::array();
    for (int r = 0; r < 4; ++r) a.push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
    return a;
}

json stability_entry(const JobSpec& job, const EquilibriumPoint& eq, double d, int threads)
{
    ClassifyOptions copts;
    copts.bracket_lo = job.stability.bracket_lo;
    copts.bracket_hi = job.stability.bracket_hi;
    copts.threads = threads;

    const LinearizedDDE lin = linearize(job.params, eq, d);
    const QuasiPolynomial qp = characteristic_function(lin);
    json e;
    e["equilibrium"] = to_json(eq);
    e["delay"] = d;
    e["a1"] = matrix_json(lin.a1);
    e["a2_diagonal"] = {lin.a2(0, 0), lin.a2(1, 1), lin.a2(2, 2), lin.a2(3, 3)};
    e["quasi_polynomial"] = {{"p", to_json(qp.p)}, {"q", to_json(qp.q)}};
    e["verdict"] = to_json(classify(job.params, eq, d, copts));
    if (d > 0.0) {
        const RealRoots rr = real_root_isolation(qp, copts.bracket_lo, copts.bracket_hi);
        e["real_roots"] = rr.roots;
        e["derivative_zeros"] = rr.derivative_zeros;
    }
    if (eq.kind == EquilibriumKind::DiseaseFree) {
        const CharCoefficients cc = dfe_char_coefficients(job.params);
        const CrossingQuartic q = crossing_quartic(cc, job.params);
        e["char_coefficients"] = to_json(cc);
        e["routh_hurwitz"] = to_json(routh_hurwitz_quartic(cc));
        e["crossing_quartic"] = to_json(q);
        e["crossing_quartic_real_roots"] = quartic_real_roots(q);
    }
    return e;
}

int cmd_stability(const JobSpec& job, const CliOptions& opts, Output& out)
{
    const double d = job.stability.delay.value_or(job.delays.d_i);
    json j = job_header(job);
    const R0Breakdown r0 = basic_reproduction_number(job.params);
    j["r0"] = to_json(r0);
    const auto sel = job.stability.equilibrium;
    if (sel != EquilibriumSelect::Endemic)
        j["disease_free"] = stability_entry(job, disease_free_equilibrium(job.params), d, opts.threads);
    if (sel != EquilibriumSelect::DiseaseFree) {
        if (r0.value > 1.0)
            j["endemic"] = stability_entry(job, endemic_equilibrium(job.params), d, opts.threads);
        else
            j["endemic"] = nullptr;
    }
    out.document("stability.json", j);
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_optimize(const JobSpec& job, const CliOptions&, Output& out)
{
    const OcpProblem prob = job.problem();
    const OcpSolution sol = solve(prob, {}, job.ocp_options());
    const BangBangReport bb = verify_bang_bang(prob, sol);

    json s = job_header(job);
    s.update(solution_summary(prob, sol, bb));
    out.table("solution", solution_table(sol), solution_plot_script("solution.csv", job.scenario));
    out.document("summary.json", s);
    std::cout << s.dump(2) << "\n";
    return sol.diagnostics.converged ? kExitOk : kExitNotConverged;
}

int cmd_iop(const JobSpec& job, const CliOptions& opts, Output& out)
{
    const OcpProblem prob = job.problem();
    ArcSchedule init;
    std::string init_source = "job";
    if (job.schedule) {
        init = *job.schedule;
    } else {
        // Arc structure comes from the transcription optimum.
        const OcpSolution sol = solve(prob, {}, job.ocp_options());
        if (!sol.schedule) throw DomainError("transcription produced no bang-bang schedule to refine");
        init = *sol.schedule;
        init_source = "transcription";
    }

    IopOptions io;
    io.simplex.initial_step = job.solver.nm_initial_step;
    io.simplex.max_evaluations = job.solver.nm_max_evaluations;
    io.simplex.threads = opts.threads;
    io.gradient_step = job.solver.gradient_step;
    io.hessian_step = job.solver.hessian_step;
    io.polish_iterations = job.solver.polish_iterations;
    io.threads = opts.threads;
    const IopResult res = optimize_switch_times(init, prob, io);

    json s = job_header(job);
    s["initial_schedule"] = to_json(init);
    s["initial_schedule_source"] = init_source;
    s["objective"] = res.objective;
    s["schedule"] = to_json(res.schedule);
    s["gradient"] = res.gradient;
    s["converged"] = res.converged;
    s["evaluations"] = res.evaluations;
    s["message"] = res.message;
    s["terminal_state"] = to_json(res.trajectory.states.back());
    if (res.schedule.free_count() > 0)
        s["hessian"] = to_json(hessian_fd(res.schedule, prob, job.solver.hessian_step, opts.threads));

    out.table("iop_trajectory", trajectory_table(res.trajectory),
              trajectory_plot_script("iop_trajectory.csv", job.scenario));
    out.document("summary.json", s);
    std::cout << s.dump(2) << "\n";
    return res.converged ? kExitOk : kExitNotConverged;
}

int cmd_sweep(const JobSpec& job, const CliOptions&, Output& out)
{
    const SweepResult sweep =
        beta_sweep(job.sweep.beta_min, job.sweep.beta_max, job.sweep.steps, job.problem(), job.ocp_options(),
                   [](const SweepRecord& r) {
                       std::cerr << "beta " << format_number(r.beta) << "  J " << format_number(r.objective)
                                 << (r.converged ? "" : "  (not converged)") << "\n";
                   });
    const SweepChecks checks = check_sweep(sweep);

    json s = job_header(job);
    s["points"] = sweep.records.size();
    s["checks"] = to_json(checks);
    out.table("sweep", sweep_table(sweep), sweep_plot_script("sweep.csv", job.scenario));
    out.document("summary.json", s);
    std::cout << s.dump(2) << "\n";
    return checks.all_converged ? kExitOk : kExitNotConverged;
}

void add_common(CLI::App* sub, CliOptions& opts)
{
    sub->add_option("--job", opts.job_path, "JSON job file (reference scenario when omitted)")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    sub->add_option("--threads", opts.threads, "worker threads; results do not depend on it")
        ->check(CLI::Range(1, 1024))
        ->capture_default_str();
    sub->add_option("--format", opts.format, "table format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Delayed TB model: simulation, stability and optimal control"};
    app.set_version_flag("--version", std::string(TBDELAY_VERSION));
    app.require_subcommand(1);

    CliOptions opts;
    using Handler = int (*)(const JobSpec&, const CliOptions&, Output&);
    const std::vector<std::tuple<std::string, std::string, Handler>> commands{
        {"simulate", "integrate the model (zero controls or the job's schedule)", cmd_simulate},
        {"equilibria", "basic reproduction number and equilibria", cmd_equilibria},
        {"stability", "characteristic equation and stability verdicts", cmd_stability},
        {"optimize", "optimal control by direct transcription", cmd_optimize},
        {"iop", "switching-time optimisation with Hessian check", cmd_iop},
        {"sweep", "continuation in the transmission coefficient", cmd_sweep},
    };
    for (const auto& [name, help, fn] : commands) add_common(app.add_subcommand(name, help), opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitValidation;
    }

    Handler handler = nullptr;
    std::string command;
    for (const auto& [name, help, fn] : commands) {
        if (app.got_subcommand(name)) {
            handler = fn;
            command = name;
        }
    }

    RunManifest manifest;
    manifest.command = command;
    manifest.tool_version = TBDELAY_VERSION;
    manifest.started_utc = utc_timestamp();
    int rc = kExitOk;
    try {
        const JobSpec job = read_job(opts);
        manifest.job_hash = job_hash(job);
        Output out(opts);
        out.document("job.resolved.json", to_json(job));
        rc = handler(job, opts, out);
        manifest.outputs = out.files();
        manifest.exit_code = rc;
        manifest.finished_utc = utc_timestamp();
        std::ofstream(out.dir() / "manifest.json", std::ios::binary) << manifest.to_json().dump(2) << "\n";
    } catch (const Error& e) {
        std::cerr << "tbdelay " << command << ": " << e.what() << "\n";
        return e.category() == ErrorCategory::Validation ? kExitValidation : kExitNumeric;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "tbdelay " << command << ": " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "tbdelay " << command << ": " << e.what() << "\n";
        return kExitNumeric;
    }
    return rc;
}
