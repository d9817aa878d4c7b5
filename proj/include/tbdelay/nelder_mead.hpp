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
#pragma once

#include <functional>
#include <string>
#include <vector>

namespace tbdelay {

struct NelderMeadOptions {
    double initial_step = 0.05;    ///< simplex edge along each coordinate
    int max_evaluations = 4000;
    double f_tolerance = 1e-12;    ///< spread of vertex values, relative to max(1, |f_best|)
    double x_tolerance = 1e-9;     ///< max-norm spread of the vertices
    int threads = 1;               ///< vertex evaluations of the initial simplex and shrinks
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    int evaluations = 0;
    int iterations = 0;
    bool converged = false;
    std::string message;
};

/// Downhill simplex with the standard coefficients (reflect 1, expand 2, contract 1/2, shrink 1/2).
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& fn, std::vector<double> x0,
                             const NelderMeadOptions& opts = {});

} // namespace tbdelay
