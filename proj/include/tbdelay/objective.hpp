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

#include "tbdelay/model.hpp"

namespace tbdelay {

enum class ObjectiveKind { L1, L2 };

const char* to_string(ObjectiveKind kind);

/// Running cost I + L2 + W1 u1 + W2 u2 (L1) or I + L2 + W1 u1^2 + W2 u2^2 (L2).
struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::L1;
    double w1 = 50.0;
    double w2 = 50.0;

    void validate() const;
};

double running_cost(const StateVec& x, const ControlVec& u, const ObjectiveSpec& spec);

/// d(running cost)/du_k.
double running_cost_du(double u, double w, ObjectiveKind kind);

} // namespace tbdelay
