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

#include "tbdelay/iop.hpp"
#include "tbdelay/ocp.hpp"
#include "tbdelay/stability.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace tbdelay {

/// Column-major numeric output shared by the CSV and JSON writers.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    /// Header line, then one row per record, every value with 17 significant digits.
    void write_csv(std::ostream& os) const;
    /// {"columns": [...], "rows": [[...], ...]}
    nlohmann::json to_json() const;
};

/// printf("%.17g"): round-trips every double.
std::string format_number(double v);

/// `t,S,L1,I,L2,R,u1,u2`; controls are zero when the trajectory carries none.
Table trajectory_table(const Trajectory& traj);
/// `t,S,L1,I,L2,R,u1,u2,lamS,lamL1,lamI,lamL2,phi1,phi2`
Table solution_table(const OcpSolution& sol);
/// `beta,J,S_T,L1_T,I_T,L2_T,R_T,t1,t2[,t3...]`; missing switch times are NaN.
Table sweep_table(const SweepResult& sweep);

/// Gnuplot scripts; `data_file` is referenced relative to the script directory.
std::string trajectory_plot_script(const std::string& data_file, const std::string& title);
/// Top row: u1 with scaled phi1, S and R, I. Bottom row: u2 with scaled phi2, L1, L2.
std::string solution_plot_script(const std::string& data_file, const std::string& title);
/// Top row: J, S(T), R(T). Bottom row: I(T), L1(T), L2(T); all against beta.
std::string sweep_plot_script(const std::string& data_file, const std::string& title);

nlohmann::json to_json(const StateVec& x);
nlohmann::json to_json(const ControlVec& u);
nlohmann::json to_json(const R0Breakdown& r);
nlohmann::json to_json(const EquilibriumPoint& eq);
nlohmann::json to_json(const Polynomial& p);  ///< ascending coefficients
nlohmann::json to_json(const std::vector<std::complex<double>>& z);  ///< [[re, im], ...]
nlohmann::json to_json(const RouthHurwitz& rh);
nlohmann::json to_json(const CharCoefficients& cc);
nlohmann::json to_json(const CrossingQuartic& q);
nlohmann::json to_json(const StabilityVerdict& v);
nlohmann::json to_json(const ArcSchedule& s);
nlohmann::json to_json(const AdjointVec& a);
nlohmann::json to_json(const OcpDiagnostics& d);
nlohmann::json to_json(const BangBangReport& r);
nlohmann::json to_json(const HessianReport& h);
nlohmann::json to_json(const SweepChecks& c);

/// Objective, terminal state, initial adjoints, switches, diagnostics and the bang-bang report.
nlohmann::json solution_summary(const OcpProblem& prob, const OcpSolution& sol, const BangBangReport& bb);

} // namespace tbdelay
