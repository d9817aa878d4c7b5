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
#include "tbdelay/objective.hpp"

#include "tbdelay/errors.hpp"

#include <cmath>

namespace tbdelay {

const char* to_string(ObjectiveKind kind) { return kind == ObjectiveKind::L1 ? "L1" : "L2"; }

void ObjectiveSpec::validate() const
{
    if (!(w1 > 0.0) || !(w2 > 0.0) || !std::isfinite(w1) || !std::isfinite(w2))
        throw ParameterError("control weights must be positive and finite");
}

double running_cost(const StateVec& x, const ControlVec& u, const ObjectiveSpec& spec)
{
    if (spec.kind == ObjectiveKind::L1) return x.i + x.l2 + spec.w1 * u.u1 + spec.w2 * u.u2;
    return x.i + x.l2 + spec.w1 * u.u1 * u.u1 + spec.w2 * u.u2 * u.u2;
}

double running_cost_du(double u, double w, ObjectiveKind kind) { return kind == ObjectiveKind::L1 ? w : 2.0 * w * u; }

} // namespace tbdelay
