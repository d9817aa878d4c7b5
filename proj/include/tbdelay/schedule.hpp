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

#include "tbdelay/integrator.hpp"

#include <array>
#include <vector>

namespace tbdelay {

/**
 * Bang-bang controls described by switch times. Each control starts at
 * `initial_level` and toggles at every switch; the level is held up to and
 * including the switch time (u = 1 on [0, t1], 0 after).
 */
struct ArcSchedule {
    struct Control {
        int initial_level = 1;
        std::vector<double> switches;
    };
    std::array<Control, 2> controls;

    double level(int k, double t) const;
    ControlVec at(double t) const;

    /// Switch times of u1 then u2, in order; the free variables of the switching-time problem.
    std::vector<double> flat() const;
    void set_flat(const std::vector<double>& times);
    int free_count() const;

    /// Switch times within [0, T] and non-decreasing per control.
    void validate(double horizon) const;

    /// Piecewise-constant source with the switch times as breakpoints.
    ControlSource source() const;

    /// Both controls one switch, 1 -> 0 at t1 and t2.
    static ArcSchedule one_switch(double t1, double t2);
};

} // namespace tbdelay
