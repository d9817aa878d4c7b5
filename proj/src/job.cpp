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
#include "tbdelay/job.hpp"

#include "tbdelay/errors.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace tbdelay {

using nlohmann::json;

namespace {

/// One JSON object; remembers which keys were read so leftovers can be rejected.
class Section {
public:
    Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path))
    {
        if (!obj_.is_object()) throw ParameterError(where() + " must be an object");
    }

    void number(const char* key, double& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_number()) throw ParameterError(where(key) + " must be a number");
            out = v->get<double>();
            if (!std::isfinite(out)) throw ParameterError(where(key) + " must be finite");
        }
    }

    void integer(const char* key, int& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_number_integer()) throw ParameterError(where(key) + " must be an integer");
            out = v->get<int>();
        }
    }

    void unsigned_integer(const char* key, std::uint64_t& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_number_unsigned()) throw ParameterError(where(key) + " must be a non-negative integer");
            out = v->get<std::uint64_t>();
        }
    }

    void boolean(const char* key, bool& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_boolean()) throw ParameterError(where(key) + " must be true or false");
            out = v->get<bool>();
        }
    }

    void string(const char* key, std::string& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_string()) throw ParameterError(where(key) + " must be a string");
            out = v->get<std::string>();
        }
    }

    void number_list(const char* key, std::vector<double>& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_array()) throw ParameterError(where(key) + " must be an array of numbers");
            out.clear();
            for (const auto& e : *v) {
                if (!e.is_number()) throw ParameterError(where(key) + " must be an array of numbers");
                out.push_back(e.get<double>());
            }
        }
    }

    /// Sub-object, or nullopt when absent.
    std::optional<Section> child(const char* key)
    {
        if (const json* v = take(key)) return Section(*v, where(key));
        return std::nullopt;
    }

    /// Throws on any key that was not consumed.
    void finish() const
    {
        for (const auto& item : obj_.items()) {
            if (!seen_.count(item.key())) throw ParameterError("unknown key " + where(item.key().c_str()));
        }
    }

    std::string where(const char* key = nullptr) const
    {
        if (!key) return path_.empty() ? "job" : path_;
        return path_.empty() ? std::string(key) : path_ + "." + key;
    }

private:
    const json* take(const char* key)
    {
        seen_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_params(Section s, ModelParams& p)
{
    s.number("beta", p.beta);
    s.number("mu", p.mu);
    s.number("delta", p.delta);
    s.number("phi", p.phi);
    s.number("omega", p.omega);
    s.number("omega_r", p.omega_r);
    s.number("sigma", p.sigma);
    s.number("sigma_r", p.sigma_r);
    s.number("tau0", p.tau0);
    s.number("tau1", p.tau1);
    s.number("tau2", p.tau2);
    s.number("n_pop", p.n_pop);
    s.number("eps1", p.eps1);
    s.number("eps2", p.eps2);
    s.finish();
}

void read_controls(Section s, ControlVec& u)
{
    s.number("u1", u.u1);
    s.number("u2", u.u2);
    s.finish();
}

void read_schedule_control(Section s, ArcSchedule::Control& c)
{
    s.integer("initial_level", c.initial_level);
    s.number_list("switches", c.switches);
    s.finish();
}

EquilibriumSelect parse_select(const std::string& v, const std::string& where)
{
    if (v == "dfe" || v == "disease_free") return EquilibriumSelect::DiseaseFree;
    if (v == "endemic") return EquilibriumSelect::Endemic;
    if (v == "both") return EquilibriumSelect::Both;
    throw ParameterError(where + " must be \"dfe\", \"endemic\" or \"both\"");
}

const char* select_name(EquilibriumSelect s)
{
    switch (s) {
    case EquilibriumSelect::DiseaseFree: return "dfe";
    case EquilibriumSelect::Endemic: return "endemic";
    case EquilibriumSelect::Both: break;
    }
    return "both";
}

json controls_json(const ControlVec& u) { return json{{"u1", u.u1}, {"u2", u.u2}}; }

} // namespace

OcpProblem JobSpec::problem() const
{
    OcpProblem prob;
    prob.params = params;
    prob.delays = delays;
    prob.history = history;
    prob.grid = grid;
    prob.objective = objective;
    prob.lower = lower;
    prob.upper = upper;
    return prob;
}

OcpOptions JobSpec::ocp_options() const
{
    OcpOptions o;
    o.solver.max_iterations = solver.max_iterations;
    o.solver.pg_tolerance = solver.pg_tolerance;
    o.solver.memory = solver.memory;
    o.sharpen = solver.sharpen;
    return o;
}

void JobSpec::validate() const
{
    if (scenario.empty()) throw ParameterError("scenario must be non-empty");
    params.validate();
    delays.validate();
    history.validate(params.n_pop);
    grid.validate();
    grid.lag_steps(delays.d_i);
    grid.lag_steps(delays.d_u1);
    grid.lag_steps(delays.d_u2);
    objective.validate();
    for (double b : {lower.u1, lower.u2, upper.u1, upper.u2})
        if (!(b >= 0.0 && b <= 1.0)) throw ParameterError("bounds must lie within [0, 1]");
    if (lower.u1 > upper.u1 || lower.u2 > upper.u2) throw ParameterError("bounds: lower exceeds upper");
    if (schedule) schedule->validate(grid.t_f);
    if (!(stability.bracket_lo < stability.bracket_hi)) throw ParameterError("stability.bracket must be increasing");
    if (stability.delay && !(*stability.delay >= 0.0)) throw ParameterError("stability.delay must be non-negative");
    if (sweep.steps < 2) throw ParameterError("sweep.steps must be at least 2");
    if (!(sweep.beta_min < sweep.beta_max) || sweep.beta_min < 0.0)
        throw ParameterError("sweep needs 0 <= beta_min < beta_max");
    if (solver.max_iterations < 1 || solver.memory < 1 || solver.nm_max_evaluations < 1 || solver.polish_iterations < 0)
        throw ParameterError("solver iteration counts must be positive");
    for (double v : {solver.pg_tolerance, solver.nm_initial_step, solver.gradient_step, solver.hessian_step})
        if (!(v > 0.0)) throw ParameterError("solver tolerances and steps must be positive");
}

JobSpec parse_job(const json& doc)
{
    JobSpec job;
    Section root(doc, "");
    root.string("scenario", job.scenario);
    if (auto s = root.child("params")) read_params(*s, job.params);
    if (auto s = root.child("delays")) {
        s->number("d_i", job.delays.d_i);
        s->number("d_u1", job.delays.d_u1);
        s->number("d_u2", job.delays.d_u2);
        s->finish();
    }

    // Defaults depend on the population size, so history is resolved after params.
    job.history = HistorySpec::reference(job.params.n_pop);
    if (auto s = root.child("history")) {
        s->number("i_history", job.history.i_history);
        if (auto x = s->child("initial_state")) {
            auto& st = job.history.initial_state;
            x->number("s", st.s);
            x->number("l1", st.l1);
            x->number("i", st.i);
            x->number("l2", st.l2);
            x->number("r", st.r);
            x->finish();
        }
        if (auto u = s->child("control_history")) read_controls(*u, job.history.control_history);
        s->finish();
    }

    if (auto s = root.child("grid")) {
        s->number("t0", job.grid.t0);
        s->number("t_f", job.grid.t_f);
        s->integer("n_steps", job.grid.n_steps);
        s->finish();
    }
    if (auto s = root.child("objective")) {
        std::string kind = to_string(job.objective.kind);
        s->string("kind", kind);
        if (kind == "L1") job.objective.kind = ObjectiveKind::L1;
        else if (kind == "L2") job.objective.kind = ObjectiveKind::L2;
        else throw ParameterError("objective.kind must be \"L1\" or \"L2\"");
        s->number("w1", job.objective.w1);
        s->number("w2", job.objective.w2);
        s->finish();
    }
    if (auto s = root.child("bounds")) {
        if (auto u = s->child("lower")) read_controls(*u, job.lower);
        if (auto u = s->child("upper")) read_controls(*u, job.upper);
        s->finish();
    }
    if (auto s = root.child("schedule")) {
        ArcSchedule sched;
        sched.controls[0].switches.clear();
        sched.controls[1].switches.clear();
        if (auto c = s->child("u1")) read_schedule_control(*c, sched.controls[0]);
        if (auto c = s->child("u2")) read_schedule_control(*c, sched.controls[1]);
        s->finish();
        job.schedule = sched;
    }
    if (auto s = root.child("stability")) {
        std::string sel = select_name(job.stability.equilibrium);
        s->string("equilibrium", sel);
        job.stability.equilibrium = parse_select(sel, s->where("equilibrium"));
        double d = std::nan("");
        s->number("delay", d);
        if (!std::isnan(d)) job.stability.delay = d;
        std::vector<double> bracket{job.stability.bracket_lo, job.stability.bracket_hi};
        s->number_list("bracket", bracket);
        if (bracket.size() != 2) throw ParameterError(s->where("bracket") + " must hold two numbers");
        job.stability.bracket_lo = bracket[0];
        job.stability.bracket_hi = bracket[1];
        s->finish();
    }
    if (auto s = root.child("sweep")) {
        s->number("beta_min", job.sweep.beta_min);
        s->number("beta_max", job.sweep.beta_max);
        s->integer("steps", job.sweep.steps);
        s->finish();
    }
    if (auto s = root.child("solver")) {
        auto& o = job.solver;
        s->integer("max_iterations", o.max_iterations);
        s->number("pg_tolerance", o.pg_tolerance);
        s->integer("memory", o.memory);
        s->boolean("sharpen", o.sharpen);
        s->unsigned_integer("seed", o.seed);
        s->integer("nm_max_evaluations", o.nm_max_evaluations);
        s->number("nm_initial_step", o.nm_initial_step);
        s->number("gradient_step", o.gradient_step);
        s->number("hessian_step", o.hessian_step);
        s->integer("polish_iterations", o.polish_iterations);
        s->finish();
    }
    root.finish();
    job.validate();
    return job;
}

JobSpec parse_job_text(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParameterError(std::string("job is not valid JSON: ") + e.what());
    }
    return parse_job(doc);
}

JobSpec load_job(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open job file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_job_text(buf.str());
}

json to_json(const JobSpec& job)
{
    const auto& p = job.params;
    const auto& x = job.history.initial_state;
    json j;
    j["scenario"] = job.scenario;
    j["params"] = {{"beta", p.beta},   {"mu", p.mu},     {"delta", p.delta}, {"phi", p.phi},
                   {"omega", p.omega}, {"omega_r", p.omega_r}, {"sigma", p.sigma}, {"sigma_r", p.sigma_r},
                   {"tau0", p.tau0},   {"tau1", p.tau1}, {"tau2", p.tau2},   {"n_pop", p.n_pop},
                   {"eps1", p.eps1},   {"eps2", p.eps2}};
    j["delays"] = {{"d_i", job.delays.d_i}, {"d_u1", job.delays.d_u1}, {"d_u2", job.delays.d_u2}};
    j["history"] = {{"i_history", job.history.i_history},
                    {"initial_state", {{"s", x.s}, {"l1", x.l1}, {"i", x.i}, {"l2", x.l2}, {"r", x.r}}},
                    {"control_history", controls_json(job.history.control_history)}};
    j["grid"] = {{"t0", job.grid.t0}, {"t_f", job.grid.t_f}, {"n_steps", job.grid.n_steps}};
    j["objective"] = {{"kind", to_string(job.objective.kind)}, {"w1", job.objective.w1}, {"w2", job.objective.w2}};
    j["bounds"] = {{"lower", controls_json(job.lower)}, {"upper", controls_json(job.upper)}};
    if (job.schedule) {
        json s;
        const char* names[2] = {"u1", "u2"};
        for (int k = 0; k < 2; ++k)
            s[names[k]] = {{"initial_level", job.schedule->controls[k].initial_level},
                           {"switches", job.schedule->controls[k].switches}};
        j["schedule"] = s;
    }
    j["stability"] = {{"equilibrium", select_name(job.stability.equilibrium)},
                      {"bracket", {job.stability.bracket_lo, job.stability.bracket_hi}}};
    if (job.stability.delay) j["stability"]["delay"] = *job.stability.delay;
    j["sweep"] = {{"beta_min", job.sweep.beta_min}, {"beta_max", job.sweep.beta_max}, {"steps", job.sweep.steps}};
    const auto& o = job.solver;
    j["solver"] = {{"max_iterations", o.max_iterations},
                   {"pg_tolerance", o.pg_tolerance},
                   {"memory", o.memory},
                   {"sharpen", o.sharpen},
                   {"seed", o.seed},
                   {"nm_max_evaluations", o.nm_max_evaluations},
                   {"nm_initial_step", o.nm_initial_step},
                   {"gradient_step", o.gradient_step},
                   {"hessian_step", o.hessian_step},
                   {"polish_iterations", o.polish_iterations}};
    return j;
}

std::string job_hash(const JobSpec& job)
{
    // nlohmann objects keep keys sorted, so dump() is canonical.
    const std::string text = to_json(job).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json RunManifest::to_json() const
{
    return json{{"command", command},           {"job_hash", job_hash},         {"tool_version", tool_version},
                {"started_utc", started_utc},   {"finished_utc", finished_utc}, {"exit_code", exit_code},
                {"outputs", outputs}};
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace tbdelay
