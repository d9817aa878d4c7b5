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
#include "tbdelay/lbfgsb.hpp"

#include "tbdelay/errors.hpp"

#include <cmath>
#include <deque>

namespace tbdelay {

namespace {

struct Pair {
    Eigen::VectorXd s, y;
    double rho;
};

Eigen::VectorXd project(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi)
{
    return x.cwiseMax(lo).cwiseMin(hi);
}

// Mask of variables allowed to move: off the bounds, or on one with the gradient pointing inward.
Eigen::VectorXd free_mask(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Eigen::VectorXd& lo,
                          const Eigen::VectorXd& hi)
{
    Eigen::VectorXd m = Eigen::VectorXd::Ones(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        if ((x[k] <= lo[k] && g[k] > 0) || (x[k] >= hi[k] && g[k] < 0)) m[k] = 0.0;
    }
    return m;
}

Eigen::VectorXd two_loop(const Eigen::VectorXd& g, const std::deque<Pair>& mem, const Eigen::VectorXd& mask,
                         const Eigen::VectorXd& inv_metric)
{
    Eigen::VectorXd q = g.cwiseProduct(mask);
    std::vector<double> alpha(mem.size());
    for (std::size_t k = mem.size(); k-- > 0;) {
        alpha[k] = mem[k].rho * mem[k].s.cwiseProduct(mask).dot(q);
        q -= alpha[k] * mem[k].y.cwiseProduct(mask);
    }
    if (!mem.empty()) {
        // H0 = gamma M^-1 with gamma from the latest pair in the metric
        const Pair& last = mem.back();
        q = q.cwiseProduct(inv_metric) * (last.s.dot(last.y) / last.y.cwiseProduct(inv_metric).dot(last.y));
    } else {
        q = q.cwiseProduct(inv_metric);
    }
    for (std::size_t k = 0; k < mem.size(); ++k) {
        double b = mem[k].rho * mem[k].y.cwiseProduct(mask).dot(q);
        q += (alpha[k] - b) * mem[k].s.cwiseProduct(mask);
    }
    return -q.cwiseProduct(mask);
}

} // namespace

Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g, const Eigen::VectorXd& lo,
                                   const Eigen::VectorXd& hi)
{
    // gradient with the components blocked by an active bound zeroed; unlike
    // the clipped step P(x - g) - x it scales with f, so a tolerance relative
    // to |f| stays meaningful when the gradient dwarfs the box width
    Eigen::VectorXd pg = g;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        if ((x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0)) pg[i] = 0.0;
    }
    return pg;
}

BoxLbfgsResult minimize_box(const GradObjective& fn, Eigen::VectorXd x0, const Eigen::VectorXd& lo,
                            const Eigen::VectorXd& hi, const BoxLbfgsOptions& opts)
{
    const Eigen::Index n = x0.size();
    if (lo.size() != n || hi.size() != n) throw DomainError("bound vectors must match the variable count");
    if ((lo.array() > hi.array()).any()) throw DomainError("lower bound exceeds upper bound");
    if (opts.memory < 1 || opts.max_iterations < 0) throw DomainError("invalid quasi-Newton options");

    Eigen::VectorXd inv_metric = Eigen::VectorXd::Ones(n);
    if (opts.metric.size() != 0) {
        if (opts.metric.size() != n || !(opts.metric.array() > 0.0).all())
            throw DomainError("metric weights must be positive, one per variable");
        inv_metric = opts.metric.cwiseInverse();
    }

    BoxLbfgsResult res;
    Eigen::VectorXd x = project(x0, lo, hi);
    Eigen::VectorXd g(n);
    double f = fn(x, g);
    res.evaluations = 1;
    res.history.push_back(f);
    if (!std::isfinite(f) || !g.allFinite()) throw ConvergenceFailure("objective not finite at the start point", {});

    std::deque<Pair> mem;
    Eigen::VectorXd xn(n), gn(n);
    int it = 0;
    for (;; ++it) {
        const double pg = projected_gradient(x, g.cwiseProduct(inv_metric), lo, hi).lpNorm<Eigen::Infinity>();
        res.pg_norm = pg;
        if (pg < opts.pg_tolerance * std::max(1.0, std::abs(f))) {
            res.converged = true;
            res.message = "projected gradient below tolerance";
            break;
        }
        if (it >= opts.max_iterations) {
            res.message = "iteration cap reached";
            break;
        }

        const Eigen::VectorXd mask = free_mask(x, g, lo, hi);
        Eigen::VectorXd d = two_loop(g, mem, mask, inv_metric);
        double slope = g.dot(d);
        bool steepest = mem.empty();
        if (!(slope < 0.0)) {
            mem.clear();
            d = -g.cwiseProduct(mask).cwiseProduct(inv_metric);
            steepest = true;
        }
        double step = 1.0;
        if (steepest) step = 1.0 / std::max(1e-300, d.lpNorm<Eigen::Infinity>());

        bool accepted = false;
        double fn_val = f;
        for (int bt = 0; bt < opts.max_backtracks; ++bt) {
            xn = project(x + step * d, lo, hi);
            fn_val = fn(xn, gn);
            ++res.evaluations;
            if (std::isfinite(fn_val) && fn_val <= f + opts.armijo * g.dot(xn - x)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (!mem.empty()) {
                // stale curvature pairs: restart from steepest descent
                mem.clear();
                continue;
            }
            res.message = "line search failed";
            break;
        }

        Pair pr{xn - x, gn - g, 0.0};
        const double sy = pr.s.dot(pr.y);
        if (sy > 1e-12 * pr.y.squaredNorm() && sy > 0.0) {
            pr.rho = 1.0 / sy;
            mem.push_back(std::move(pr));
            if (static_cast<int>(mem.size()) > opts.memory) mem.pop_front();
        }
        const double drop = f - fn_val;
        x = xn;
        g = gn;
        f = fn_val;
        res.history.push_back(f);
        if (drop <= opts.stall_tolerance * std::max({1.0, std::abs(f)})) {
            res.pg_norm = projected_gradient(x, g.cwiseProduct(inv_metric), lo, hi).lpNorm<Eigen::Infinity>();
            res.converged = res.pg_norm < opts.pg_tolerance * std::max(1.0, std::abs(f));
            res.message = "relative reduction below stall tolerance";
            ++it;
            break;
        }
    }
    res.x = x;
    res.f = f;
    res.iterations = it;
    return res;
}

} // namespace tbdelay
