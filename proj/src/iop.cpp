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
#include "tbdelay/iop.hpp"

#include "tbdelay/errors.hpp"
#include "tbdelay/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace tbdelay {

namespace {

double on_time(const ArcSchedule::Control& c, double t0, double tf)
{
    double total = 0.0, from = t0;
    int level = c.initial_level;
    for (double s : c.switches) {
        const double at = std::clamp(s, t0, tf);
        if (level == 1) total += at - from;
        from = at;
        level = 1 - level;
    }
    if (level == 1) total += tf - from;
    return total;
}

// Times with each control's switches clamped to [t0, tf] and sorted; `penalty` collects the distance moved.
std::vector<double> feasible(const ArcSchedule& shape, const std::vector<double>& x, double t0, double tf,
                             double& penalty)
{
    std::vector<double> y(x);
    penalty = 0.0;
    for (double& v : y) {
        const double c = std::clamp(v, t0, tf);
        penalty += std::abs(v - c);
        v = c;
    }
    std::size_t at = 0;
    for (const auto& c : shape.controls) {
        auto first = y.begin() + static_cast<std::ptrdiff_t>(at);
        auto last = first + static_cast<std::ptrdiff_t>(c.switches.size());
        for (auto it = first; it + 1 < last; ++it) penalty += std::max(0.0, *it - *(it + 1));
        std::sort(first, last);
        at += c.switches.size();
    }
    return y;
}

ArcSchedule with_times(const ArcSchedule& shape, const std::vector<double>& times)
{
    ArcSchedule s = shape;
    s.set_flat(times);
    return s;
}

std::vector<std::size_t> merged_order(const std::vector<double>& times)
{
    std::vector<std::size_t> idx(times.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
    return idx;
}

} // namespace

ScheduleEvaluation simulate_schedule(const ArcSchedule& sched, const OcpProblem& prob)
{
    prob.validate();
    sched.validate(prob.grid.t_f);
    ScheduleEvaluation ev;
    ev.trajectory = integrate(prob.params, prob.delays, prob.history, prob.grid, sched.source());
    const Grid& g = ev.trajectory.grid;
    // State part from the integrator's own stages: smooth in the switch times,
    // unlike a node quadrature, whose derivative jumps whenever a switch crosses a node.
    double j = ev.trajectory.infected_integral.back();
    // u is 0 or 1, so u and u^2 cost the same
    j += prob.objective.w1 * on_time(sched.controls[0], g.t0, g.t_f);
    j += prob.objective.w2 * on_time(sched.controls[1], g.t0, g.t_f);
    ev.objective = j;
    return ev;
}

double schedule_objective(const ArcSchedule& sched, const OcpProblem& prob)
{
    return simulate_schedule(sched, prob).objective;
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& fn, const Eigen::VectorXd& x,
                            double step, int threads)
{
    if (!(step > 0.0)) throw DomainError("finite-difference step must be positive");
    const Eigen::Index n = x.size();
    auto vals = parallel_map(threads, static_cast<std::size_t>(2 * n), [&](std::size_t q) {
        Eigen::VectorXd y = x;
        y[static_cast<Eigen::Index>(q / 2)] += (q % 2 == 0 ? step : -step);
        return fn(y);
    });
    Eigen::VectorXd g(n);
    for (Eigen::Index i = 0; i < n; ++i) g[i] = (vals[2 * i] - vals[2 * i + 1]) / (2.0 * step);
    return g;
}

Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& fn, const Eigen::VectorXd& x,
                           double step, double* asymmetry, int threads)
{
    if (!(step > 0.0)) throw DomainError("finite-difference step must be positive");
    const Eigen::Index n = x.size();
    // Column j is the central difference, with `step`, of a central-difference
    // gradient taken with step/10. The two steps differ, so the raw matrix is
    // only symmetric up to truncation and noise; its defect is reported.
    const double inner = 0.1 * step;
    auto cols = parallel_map(threads, static_cast<std::size_t>(2 * n), [&](std::size_t q) {
        Eigen::VectorXd y = x;
        y[static_cast<Eigen::Index>(q / 2)] += (q % 2 == 0 ? step : -step);
        return fd_gradient(fn, y, inner, 1);
    });
    Eigen::MatrixXd h(n, n);
    for (Eigen::Index j = 0; j < n; ++j) h.col(j) = (cols[2 * j] - cols[2 * j + 1]) / (2.0 * step);
    if (asymmetry) {
        const double scale = std::max(1e-300, h.cwiseAbs().maxCoeff());
        *asymmetry = (h - h.transpose()).cwiseAbs().maxCoeff() / scale;
    }
    return 0.5 * (h + h.transpose());
}

Eigen::VectorXd jacobi_eigenvalues(const Eigen::MatrixXd& a_in, double tol, int max_sweeps)
{
    if (a_in.rows() != a_in.cols()) throw DomainError("eigenvalues need a square matrix");
    Eigen::MatrixXd a = 0.5 * (a_in + a_in.transpose());
    const Eigen::Index n = a.rows();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (std::sqrt(off) <= tol * std::max(1e-300, a.norm())) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    Eigen::VectorXd ev = a.diagonal();
    std::sort(ev.data(), ev.data() + ev.size());
    return ev;
}

IopResult optimize_switch_times(const ArcSchedule& init, const OcpProblem& prob, const IopOptions& opts)
{
    prob.validate();
    init.validate(prob.grid.t_f);
    const double t0 = prob.grid.t0, tf = prob.grid.t_f;

    IopResult res;
    int evals = 0;
    auto objective_at = [&](const std::vector<double>& times) {
        double pen = 0.0;
        const std::vector<double> y = feasible(init, times, t0, tf, pen);
        return schedule_objective(with_times(init, y), prob) + 1e4 * pen;
    };

    std::vector<double> x = init.flat();
    if (!x.empty()) {
        NelderMeadOptions nm = opts.simplex;
        nm.threads = opts.threads;
        const NelderMeadResult r = nelder_mead(objective_at, x, nm);
        evals += r.evaluations;
        double pen = 0.0;
        x = feasible(init, r.x, t0, tf, pen);
        res.message = r.message;

        // Newton polish on FD derivatives, keeping only steps that lower J
        auto fe = [&](const Eigen::VectorXd& v) {
            ++evals;
            return objective_at(std::vector<double>(v.data(), v.data() + v.size()));
        };
        Eigen::VectorXd xv = Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
        double fx = fe(xv);
        bool polished = false;
        for (int it = 0; it < opts.polish_iterations; ++it) {
            const Eigen::VectorXd g = fd_gradient(fe, xv, opts.gradient_step, opts.threads);
            if (g.lpNorm<Eigen::Infinity>() <= opts.gradient_tolerance * std::max(1.0, std::abs(fx))) {
                polished = true;
                break;
            }
            const Eigen::MatrixXd h = fd_hessian(fe, xv, opts.hessian_step, nullptr, opts.threads);
            Eigen::VectorXd d;
            Eigen::LLT<Eigen::MatrixXd> llt(h);
            if (llt.info() == Eigen::Success)
                d = -llt.solve(g);
            else
                d = -g / std::max(1.0, h.cwiseAbs().maxCoeff());
            bool moved = false;
            for (double a = 1.0; a > 1e-6; a *= 0.5) {
                const Eigen::VectorXd xn = xv + a * d;
                const double fn = fe(xn);
                if (fn < fx) {
                    xv = xn;
                    fx = fn;
                    moved = true;
                    break;
                }
            }
            if (!moved) break;
        }
        x.assign(xv.data(), xv.data() + xv.size());
        x = feasible(init, x, t0, tf, pen);
        const Eigen::VectorXd g = fd_gradient(fe, Eigen::Map<Eigen::VectorXd>(x.data(), xv.size()),
                                              opts.gradient_step, opts.threads);
        res.gradient.assign(g.data(), g.data() + g.size());
        const double gmax = g.lpNorm<Eigen::Infinity>();
        res.converged = polished || gmax <= opts.gradient_tolerance * std::max(1.0, std::abs(fx)) || r.converged;
        std::ostringstream msg;
        msg << r.message << "; polish " << (polished ? "reached" : "did not reach") << " the gradient tolerance (|g| = "
            << gmax << ")";
        res.message = msg.str();
    } else {
        res.converged = true;
        res.message = "no free switch times";
    }

    res.schedule = with_times(init, x);
    ScheduleEvaluation ev = simulate_schedule(res.schedule, prob);
    ++evals;
    res.objective = ev.objective;
    res.trajectory = std::move(ev.trajectory);
    res.evaluations = evals;
    return res;
}

HessianReport hessian_fd(const ArcSchedule& sched_opt, const OcpProblem& prob, double step, int threads)
{
    prob.validate();
    sched_opt.validate(prob.grid.t_f);
    const std::vector<double> times = sched_opt.flat();
    const std::size_t n = times.size();
    if (n == 0) throw DomainError("schedule has no switch times");
    const std::vector<std::size_t> order = merged_order(times);

    Eigen::VectorXd xi(static_cast<Eigen::Index>(n));
    double prev = prob.grid.t0;
    for (std::size_t j = 0; j < n; ++j) {
        xi[static_cast<Eigen::Index>(j)] = times[order[j]] - prev;
        prev = times[order[j]];
    }
    auto fn = [&](const Eigen::VectorXd& d) {
        std::vector<double> t(n);
        double acc = prob.grid.t0;
        for (std::size_t j = 0; j < n; ++j) {
            acc += d[static_cast<Eigen::Index>(j)];
            t[order[j]] = acc;
        }
        return schedule_objective(with_times(sched_opt, t), prob);
    };

    HessianReport rep;
    rep.coordinates = "arc durations (merged switch times, xi_1 = tau_1, xi_j = tau_j - tau_{j-1})";
    rep.matrix = fd_hessian(fn, xi, step, &rep.asymmetry, threads);
    rep.eigenvalues = jacobi_eigenvalues(rep.matrix);
    rep.positive_definite = rep.eigenvalues.minCoeff() > 0.0;
    if (rep.asymmetry > 0.1) rep.warning = "Hessian asymmetric beyond 10% before symmetrisation: point may not be stationary";
    return rep;
}

int SweepResult::switch_columns() const
{
    std::size_t m = 0;
    for (const auto& r : records) m = std::max(m, r.switches.size());
    return static_cast<int>(m);
}

SweepResult beta_sweep(double beta_lo, double beta_hi, int steps, const OcpProblem& tmpl, const OcpOptions& opts,
                       const std::function<void(const SweepRecord&)>& progress)
{
    if (steps < 2) throw DomainError("sweep needs at least two steps");
    if (!std::isfinite(beta_lo) || !std::isfinite(beta_hi) || !(beta_lo < beta_hi))
        throw DomainError("sweep range must be finite and increasing");
    SweepResult out;
    std::vector<ControlVec> warm;
    for (int k = 0; k < steps; ++k) {
        OcpProblem prob = tmpl;
        prob.params.beta = beta_lo + (beta_hi - beta_lo) * k / (steps - 1);
        const OcpSolution sol = solve(prob, warm, opts);
        warm = sol.trajectory.controls;

        SweepRecord rec;
        rec.beta = prob.params.beta;
        rec.objective = sol.objective_value;
        rec.terminal = sol.trajectory.states.back();
        if (sol.schedule) rec.switches = sol.schedule->flat();
        rec.converged = sol.diagnostics.converged;
        rec.law_satisfied = verify_bang_bang(prob, sol).law_satisfied;
        if (progress) progress(rec);
        out.records.push_back(std::move(rec));
    }
    return out;
}

SweepChecks check_sweep(const SweepResult& sweep, double rel_tol)
{
    SweepChecks c;
    const auto& rec = sweep.records;
    if (rec.size() < 2) return c;
    auto rising = [&](auto get) {
        for (std::size_t k = 1; k < rec.size(); ++k) {
            const double a = get(rec[k - 1]), b = get(rec[k]);
            if (b - a < -rel_tol * std::max(std::abs(a), std::abs(b))) return false;
        }
        return true;
    };
    c.i_increasing = rising([](const SweepRecord& r) { return r.terminal.i; });
    c.l1_increasing = rising([](const SweepRecord& r) { return r.terminal.l1; });
    c.l2_increasing = rising([](const SweepRecord& r) { return r.terminal.l2; });
    c.objective_increasing = rising([](const SweepRecord& r) { return r.objective; });

    const std::size_t ns = rec.front().switches.size();
    c.switches_increasing = ns > 0;
    for (const auto& r : rec)
        if (r.switches.size() != ns) c.switches_increasing = false;
    for (std::size_t j = 0; c.switches_increasing && j < ns; ++j)
        c.switches_increasing = rising([j](const SweepRecord& r) { return r.switches[j]; });

    std::size_t peak = 0;
    for (std::size_t k = 1; k < rec.size(); ++k)
        if (rec[k].terminal.r > rec[peak].terminal.r) peak = k;
    c.r_peak_beta = rec[peak].beta;
    c.r_peak_interior = peak > 0 && peak + 1 < rec.size();
    c.r_unimodal = true;
    for (std::size_t k = 1; k < rec.size(); ++k) {
        const double a = rec[k - 1].terminal.r, b = rec[k].terminal.r;
        const double slack = rel_tol * std::max(std::abs(a), std::abs(b));
        if (k <= peak ? b - a < -slack : b - a > slack) c.r_unimodal = false;
    }

    c.all_converged = c.all_law_satisfied = true;
    for (const auto& r : rec) {
        c.all_converged = c.all_converged && r.converged;
        c.all_law_satisfied = c.all_law_satisfied && r.law_satisfied;
    }
    return c;
}

} // namespace tbdelay
