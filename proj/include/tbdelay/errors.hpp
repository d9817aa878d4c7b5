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

#include <stdexcept>
#include <string>
#include <vector>

namespace tbdelay {

/// Failure category; the CLI maps it onto its exit codes.
enum class ErrorCategory { Validation, Numeric };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

/// Inadmissible model parameters (negative rate, fraction outside [0,1], ...).
class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& what) : Error(ErrorCategory::Validation, what) {}
};

/// Non-finite or otherwise out-of-domain arguments.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorCategory::Validation, what) {}
};

/// Step size does not divide a delay, or mismatching grids.
class GridError : public Error {
public:
    explicit GridError(const std::string& what) : Error(ErrorCategory::Validation, what) {}
};

/// Query outside the domain covered by a trajectory.
class RangeError : public Error {
public:
    explicit RangeError(const std::string& what) : Error(ErrorCategory::Validation, what) {}
};

class NoEndemicEquilibrium : public Error {
public:
    explicit NoEndemicEquilibrium(const std::string& what) : Error(ErrorCategory::Numeric, what) {}
};

/// Iterative method stopped without meeting its tolerance. Carries the last iterate.
class ConvergenceFailure : public Error {
public:
    ConvergenceFailure(const std::string& what, std::vector<double> last_iterate)
        : Error(ErrorCategory::Numeric, what), last_iterate_(std::move(last_iterate)) {}

    const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

private:
    std::vector<double> last_iterate_;
};

/// Integration produced a non-finite state.
class BlowupError : public Error {
public:
    BlowupError(const std::string& what, double time)
        : Error(ErrorCategory::Numeric, what), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

} // namespace tbdelay
