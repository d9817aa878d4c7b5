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
#include "tbdelay/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

namespace tbdelay {

using nlohmann::json;

std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void Table::write_csv(std::ostream& os) const
{
    for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_number(row[c]);
        os << '\n';
    }
}

json Table::to_json() const { return json{{"columns", columns}, {"rows", rows}}; }

Table trajectory_table(const Trajectory& traj)
{
    Table t;
    t.columns = {"t", "S", "L1", "I", "L2", "R", "u1", "u2"};
    const bool has_u = static_cast<int>(traj.controls.size()) == traj.nodes();
    for (int k = 0; k < traj.nodes(); ++k) {
        const StateVec& x = traj.states[k];
        const ControlVec u = has_u ? traj.controls[k] : ControlVec{};
        t.rows.push_back({traj.time(k), x.s, x.l1, x.i, x.l2, x.r, u.u1, u.u2});
    }
    return t;
}

Table solution_table(const OcpSolution& sol)
{
    Table t = trajectory_table(sol.trajectory);
    for (const char* c : {"lamS", "lamL1", "lamI", "lamL2", "phi1", "phi2"}) t.columns.emplace_back(c);
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        const AdjointVec& a = sol.adjoints.at(k);
        t.rows[k].insert(t.rows[k].end(),
                         {a.lam_s, a.lam_l1, a.lam_i, a.lam_l2, sol.switching.phi1.at(k), sol.switching.phi2.at(k)});
    }
    return t;
}

Table sweep_table(const SweepResult& sweep)
{
    Table t;
    t.columns = {"beta", "J", "S_T", "L1_T", "I_T", "L2_T", "R_T"};
    const int ns = sweep.switch_columns();
    for (int j = 0; j < ns; ++j) t.columns.push_back("t" + std::to_string(j + 1));
    for (const auto& r : sweep.records) {
        std::vector<double> row{r.beta, r.objective, r.terminal.s, r.terminal.l1, r.terminal.i, r.terminal.l2,
                                r.terminal.r};
        for (int j = 0; j < ns; ++j)
            row.push_back(j < static_cast<int>(r.switches.size()) ? r.switches[j]
                                                                   : std::numeric_limits<double>::quiet_NaN());
        t.rows.push_back(std::move(row));
    }
    return t;
}

namespace {

std::string preamble(const std::string& title, const std::string& output)
{
    std::ostringstream s;
    s << "# gnuplot script; run from this directory: gnuplot " << output << ".gp\n"
      << "set terminal pngcairo size 1500,900 noenhanced\n"
      << "set output '" << output << ".png'\n"
      << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set grid\n"
      << "set multiplot layout 2,3 title '" << title << "'\n";
    return s.str();
}

std::string panel(const std::string& file, const std::string& xlabel, const std::string& ylabel,
                  const std::vector<std::pair<int, std::string>>& series, int xcol = 1)
{
    std::ostringstream s;
    s << "set xlabel '" << xlabel << "'\nset ylabel '" << ylabel << "'\nplot ";
    for (std::size_t k = 0; k < series.size(); ++k) {
        if (k) s << ", \\\n     ";
        s << "'" << file << "' using " << xcol << ":" << series[k].first << " with lines lw 2 title '"
          << series[k].second << "'";
    }
    s << "\n";
    return s.str();
}

std::string stem(const std::string& file)
{
    const auto dot = file.rfind('.');
    return dot == std::string::npos ? file : file.substr(0, dot);
}

} // namespace

std::string trajectory_plot_script(const std::string& data_file, const std::string& title)
{
    std::string s = preamble(title, stem(data_file));
    s += panel(data_file, "t (yr)", "S", {{2, "S"}});
    s += panel(data_file, "t (yr)", "L1", {{3, "L1"}});
    s += panel(data_file, "t (yr)", "I", {{4, "I"}});
    s += panel(data_file, "t (yr)", "L2", {{5, "L2"}});
    s += panel(data_file, "t (yr)", "R", {{6, "R"}});
    s += panel(data_file, "t (yr)", "u", {{7, "u1"}, {8, "u2"}});
    s += "unset multiplot\n";
    return s;
}

std::string solution_plot_script(const std::string& data_file, const std::string& title)
{
    std::string s = preamble(title, stem(data_file));
    // Switching functions are scaled into [-1, 1] to share the control axis.
    s += "stats '" + data_file + "' using 13 nooutput\nphi1_scale = (abs(STATS_min) > abs(STATS_max) ? "
         "abs(STATS_min) : abs(STATS_max))\n";
    s += "stats '" + data_file + "' using 14 nooutput\nphi2_scale = (abs(STATS_min) > abs(STATS_max) ? "
         "abs(STATS_min) : abs(STATS_max))\n";
    s += "set xlabel 't (yr)'\nset ylabel 'u1, phi1 (scaled)'\nset yrange [-1.1:1.1]\n";
    s += "plot '" + data_file + "' using 1:7 with lines lw 2 title 'u1', \\\n     '" + data_file +
         "' using 1:($13/phi1_scale) with lines dt 2 title 'phi1'\nset autoscale y\n";
    s += panel(data_file, "t (yr)", "S, R", {{2, "S"}, {6, "R"}});
    s += panel(data_file, "t (yr)", "I", {{4, "I"}});
    s += "set ylabel 'u2, phi2 (scaled)'\nset yrange [-1.1:1.1]\n";
    s += "plot '" + data_file + "' using 1:8 with lines lw 2 title 'u2', \\\n     '" + data_file +
         "' using 1:($14/phi2_scale) with lines dt 2 title 'phi2'\nset autoscale y\n";
    s += panel(data_file, "t (yr)", "L1", {{3, "L1"}});
    s += panel(data_file, "t (yr)", "L2", {{5, "L2"}});
    s += "unset multiplot\n";
    return s;
}

std::string sweep_plot_script(const std::string& data_file, const std::string& title)
{
    std::string s = preamble(title, stem(data_file));
    s += panel(data_file, "beta", "J", {{2, "J"}});
    s += panel(data_file, "beta", "S(T)", {{3, "S(T)"}});
    s += panel(data_file, "beta", "R(T)", {{7, "R(T)"}});
    s += panel(data_file, "beta", "I(T)", {{5, "I(T)"}});
    s += panel(data_file, "beta", "L1(T)", {{4, "L1(T)"}});
    s += panel(data_file, "beta", "L2(T)", {{6, "L2(T)"}});
    s += "unset multiplot\n";
    return s;
}

json to_json(const StateVec& x) { return json{{"S", x.s}, {"L1", x.l1}, {"I", x.i}, {"L2", x.l2}, {"R", x.r}}; }

json to_json(const ControlVec& u) { return json{{"u1", u.u1}, {"u2", u.u2}}; }

json to_json(const R0Breakdown& r)
{
    return json{{"numerator", r.numerator}, {"denominator", r.denominator}, {"value", r.value}};
}

json to_json(const EquilibriumPoint& eq)
{
    return json{{"kind", eq.kind == EquilibriumKind::DiseaseFree ? "DiseaseFree" : "Endemic"},
                {"state", to_json(eq.state)},
                {"residual_norm", eq.residual_norm}};
}

json to_json(const Polynomial& p) { return json(p.coefficients()); }

json to_json(const std::vector<std::complex<double>>& z)
{
    json a = json::array();
    for (const auto& v : z) a.push_back({v.real(), v.imag()});
    return a;
}

json to_json(const RouthHurwitz& rh)
{
    return json{{"a0_positive", rh.a0_positive}, {"a1_positive", rh.a1_positive},
                {"a2_positive", rh.a2_positive}, {"a3_positive", rh.a3_positive},
                {"a3a2_gt_a1", rh.a3a2_gt_a1},   {"a3a2a1_gt_a1sq_a3sqa0", rh.a3a2a1_gt_a1sq_a3sqa0},
                {"all", rh.all()}};
}

json to_json(const CharCoefficients& cc)
{
    return json{{"a0", cc.a0}, {"a1", cc.a1}, {"a2", cc.a2}, {"a3", cc.a3}, {"c1", cc.c1},
                {"c2", cc.c2}, {"c3", cc.c3}, {"c4", cc.c4}, {"c5", cc.c5}, {"c6", cc.c6}};
}

json to_json(const CrossingQuartic& q)
{
    return json{{"alpha0", q.alpha0}, {"alpha1", q.alpha1}, {"alpha2", q.alpha2}, {"alpha3", q.alpha3}};
}

json to_json(const StabilityVerdict& v)
{
    json j{{"kind", to_string(v.kind)},
           {"details", v.details},
           {"delta_at_zero", v.delta_at_zero},
           {"routh_hurwitz", to_json(v.routh_hurwitz)},
           {"zero_delay_polynomial", to_json(v.zero_delay_polynomial)},
           {"zero_delay_roots", to_json(v.zero_delay_polynomial.roots())},
           {"modulus_polynomial", to_json(v.modulus_polynomial)},
           {"crossing_b", v.crossing_b},
           {"real_roots", v.real_roots},
           {"located_roots", to_json(v.located_roots)}};
    j["right_half_plane_count"] = v.right_half_plane_count ? json(*v.right_half_plane_count) : json(nullptr);
    j["rightmost_real_part"] = v.rightmost_real_part ? json(*v.rightmost_real_part) : json(nullptr);
    return j;
}

json to_json(const ArcSchedule& s)
{
    json j;
    const char* names[2] = {"u1", "u2"};
    for (int k = 0; k < 2; ++k)
        j[names[k]] = {{"initial_level", s.controls[k].initial_level}, {"switches", s.controls[k].switches}};
    return j;
}

json to_json(const AdjointVec& a)
{
    return json{{"lamS", a.lam_s}, {"lamL1", a.lam_l1}, {"lamI", a.lam_i}, {"lamL2", a.lam_l2}};
}

json to_json(const OcpDiagnostics& d)
{
    return json{{"iterations", d.iterations},       {"evaluations", d.evaluations},
                {"stationarity", d.stationarity},   {"converged", d.converged},
                {"message", d.message},             {"raw_objective", d.raw_objective},
                {"sharpened", d.sharpened}};
}

json to_json(const BangBangReport& r)
{
    return json{{"law_checked", r.law_checked},
                {"law_satisfied", r.law_satisfied},
                {"law_violations", r.law_violations},
                {"switch_count", r.switch_count},
                {"crossings", r.crossings},
                {"crossing_slopes", r.crossing_slopes},
                {"min_abs_slope", r.min_abs_slope},
                {"strict", r.strict},
                {"note", r.note}};
}

json to_json(const HessianReport& h)
{
    json m = json::array();
    for (int r = 0; r < h.matrix.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < h.matrix.cols(); ++c) row.push_back(h.matrix(r, c));
        m.push_back(row);
    }
    return json{{"matrix", m},
                {"eigenvalues", std::vector<double>(h.eigenvalues.data(), h.eigenvalues.data() + h.eigenvalues.size())},
                {"positive_definite", h.positive_definite},
                {"asymmetry", h.asymmetry},
                {"coordinates", h.coordinates},
                {"warning", h.warning}};
}

json to_json(const SweepChecks& c)
{
    return json{{"r_unimodal", c.r_unimodal},
                {"r_peak_beta", c.r_peak_beta},
                {"r_peak_interior", c.r_peak_interior},
                {"i_increasing", c.i_increasing},
                {"l1_increasing", c.l1_increasing},
                {"l2_increasing", c.l2_increasing},
                {"objective_increasing", c.objective_increasing},
                {"switches_increasing", c.switches_increasing},
                {"all_converged", c.all_converged},
                {"all_law_satisfied", c.all_law_satisfied},
                {"passed", c.passed()}};
}

json solution_summary(const OcpProblem& prob, const OcpSolution& sol, const BangBangReport& bb)
{
    json j;
    j["objective_kind"] = to_string(prob.objective.kind);
    j["objective"] = sol.objective_value;
    j["terminal_state"] = to_json(sol.trajectory.states.back());
    j["initial_adjoint"] = to_json(sol.adjoints.front());
    j["schedule"] = sol.schedule ? to_json(*sol.schedule) : json(nullptr);
    j["diagnostics"] = to_json(sol.diagnostics);
    j["bang_bang"] = to_json(bb);
    return j;
}

} // namespace tbdelay
