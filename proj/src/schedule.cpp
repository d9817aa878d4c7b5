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
#include "tbdelay/schedule.hpp"

#include "tbdelay/errors.hpp"

#include <algorithm>
#include <cmath>

namespace tbdelay {

double ArcSchedule::level(int k, double t) const
{
    const Control& c = controls.at(static_cast<std::size_t>(k));
    int lv = c.initial_level;
    for (double s : c.switches)
        if (s < t) lv = 1 - lv;
    return lv;
}

ControlVec ArcSchedule::at(double t) const { return {level(0, t), level(1, t)}; }

std::vector<double> ArcSchedule::flat() const
{
    std::vector<double> out = controls[0].switches;
    out.insert(out.end(), controls[1].switches.begin(), controls[1].switches.end());
    return out;
}

void ArcSchedule::set_flat(const std::vector<double>& times)
{
    if (static_cast<int>(times.size()) != free_count()) throw DomainError("switch-time vector has the wrong length");
    auto it = times.begin();
    for (auto& c : controls)
        for (double& s : c.switches) s = *it++;
}

int ArcSchedule::free_count() const
{
    return static_cast<int>(controls[0].switches.size() + controls[1].switches.size());
}

void ArcSchedule::validate(double horizon) const
{
    for (const auto& c : controls) {
        if (c.initial_level != 0 && c.initial_level != 1) throw DomainError("initial control level must be 0 or 1");
        double prev = 0.0;
        for (double s : c.switches) {
            if (!std::isfinite(s) || s < 0.0 || s > horizon) throw DomainError("switch time outside [0, T]");
            if (s < prev) throw DomainError("switch times must be increasing");
            prev = s;
        }
    }
}

ControlSource ArcSchedule::source() const
{
    ControlSource src;
    ArcSchedule copy = *this;
    src.eval = [copy](double t) { return copy.at(t); };
    src.breakpoints = flat();
    std::sort(src.breakpoints.begin(), src.breakpoints.end());
    return src;
}

ArcSchedule ArcSchedule::one_switch(double t1, double t2)
{
    ArcSchedule s;
    s.controls[0] = {1, {t1}};
    s.controls[1] = {1, {t2}};
    return s;
}

} // namespace tbdelay
