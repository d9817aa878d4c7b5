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
#include "tbdelay/nelder_mead.hpp"

#include "tbdelay/errors.hpp"
#include "tbdelay/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tbdelay {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& fn, std::vector<double> x0,
                             const NelderMeadOptions& opts)
{
    const std::size_t n = x0.size();
    if (n == 0) throw DomainError("Nelder-Mead needs at least one variable");
    if (!(opts.initial_step > 0.0)) throw DomainError("Nelder-Mead initial step must be positive");

    using Point = std::vector<double>;
    std::vector<Point> pts(n + 1, x0);
    for (std::size_t k = 0; k < n; ++k) pts[k + 1][k] += opts.initial_step;

    NelderMeadResult res;
    auto eval_all = [&](std::size_t first) {
        auto vals = parallel_map(opts.threads, pts.size() - first, [&](std::size_t k) { return fn(pts[first + k]); });
        res.evaluations += static_cast<int>(vals.size());
        return vals;
    };
    std::vector<double> f = eval_all(0);
    auto eval = [&](const Point& p) {
        ++res.evaluations;
        return fn(p);
    };

    std::vector<std::size_t> order(n + 1);
    for (;;) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
        {
            std::vector<Point> p2;
            std::vector<double> f2;
            for (std::size_t k : order) {
                p2.push_back(pts[k]);
                f2.push_back(f[k]);
            }
            pts.swap(p2);
            f.swap(f2);
        }

        double fspread = f[n] - f[0];
        double xspread = 0.0;
        for (std::size_t k = 1; k <= n; ++k)
            for (std::size_t j = 0; j < n; ++j) xspread = std::max(xspread, std::abs(pts[k][j] - pts[0][j]));
        if (fspread <= opts.f_tolerance * std::max(1.0, std::abs(f[0])) && xspread <= opts.x_tolerance) {
            res.converged = true;
            res.message = "simplex converged";
            break;
        }
        if (res.evaluations >= opts.max_evaluations) {
            res.message = "evaluation cap reached";
            break;
        }
        ++res.iterations;

        Point centroid(n, 0.0);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[k][j] / static_cast<double>(n);
        auto along = [&](double t) {
            Point p(n);
            for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + t * (pts[n][j] - centroid[j]);
            return p;
        };

        Point xr = along(-1.0);
        const double fr = eval(xr);
        if (fr < f[0]) {
            Point xe = along(-2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[n] = xe;
                f[n] = fe;
            } else {
                pts[n] = xr;
                f[n] = fr;
            }
            continue;
        }
        if (fr < f[n - 1]) {
            pts[n] = xr;
            f[n] = fr;
            continue;
        }
        const bool outside = fr < f[n];
        Point xc = along(outside ? -0.5 : 0.5);
        const double fc = eval(xc);
        if (fc < (outside ? fr : f[n])) {
            pts[n] = xc;
            f[n] = fc;
            continue;
        }
        for (std::size_t k = 1; k <= n; ++k)
            for (std::size_t j = 0; j < n; ++j) pts[k][j] = pts[0][j] + 0.5 * (pts[k][j] - pts[0][j]);
        auto fs = eval_all(1);
        std::copy(fs.begin(), fs.end(), f.begin() + 1);
    }
    res.x = pts[0];
    res.f = f[0];
    return res;
}

} // namespace tbdelay
