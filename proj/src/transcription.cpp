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
#include "tbdelay/transcription.hpp"

#include "tbdelay/errors.hpp"

#include <cmath>
#include <sstream>

namespace tbdelay {

namespace {

const Eigen::Vector4d kCostGrad(0.0, 0.0, 1.0, 1.0);  // d(I + L2)/dx

} // namespace

TrapezoidalTranscription::TrapezoidalTranscription(const ModelParams& p, const DelayConfig& delays,
                                                   const HistorySpec& hist, const Grid& grid,
                                                   const ObjectiveSpec& objective)
    : p_(p), delays_(delays), hist_(hist), grid_(grid), obj_(objective)
{
    p_.validate();
    delays_.validate();
    grid_.validate();
    hist_.validate(p_.n_pop);
    obj_.validate();
    if (grid_.n_steps < 1) throw GridError("transcription needs at least one step");
    n_steps_ = grid_.n_steps;
    h_ = grid_.step();
    m_i_ = grid_.lag_steps(delays_.d_i);
    m_u1_ = grid_.lag_steps(delays_.d_u1);
    m_u2_ = grid_.lag_steps(delays_.d_u2);
}

double TrapezoidalTranscription::delayed_i(const std::vector<Eigen::Vector4d>& x, int k) const
{
    const int j = k - m_i_;
    return j >= 0 ? x[static_cast<std::size_t>(j)][2] : hist_.i_history;
}

double TrapezoidalTranscription::delayed_u(const Eigen::VectorXd& u, int ctrl, int k) const
{
    const int j = k - (ctrl == 0 ? m_u1_ : m_u2_);
    if (j < 0) return ctrl == 0 ? hist_.control_history.u1 : hist_.control_history.u2;
    return u[ctrl * nodes() + j];
}

std::vector<Eigen::Vector4d> TrapezoidalTranscription::forward(const Eigen::VectorXd& u) const
{
    if (u.size() != variables()) throw DomainError("control vector has the wrong length");
    const double tol = 1e-13 * p_.n_pop;
    std::vector<Eigen::Vector4d> x(static_cast<std::size_t>(nodes()));
    x[0] = hist_.initial_state.reduced();
    Eigen::Vector4d f_prev = reduced_rhs(x[0], m_i_ == 0 ? x[0][2] : delayed_i(x, 0), delayed_u(u, 0, 0),
                                         delayed_u(u, 1, 0), p_);
    for (int k = 0; k < n_steps_; ++k) {
        const int kn = k + 1;
        const double v1 = delayed_u(u, 0, kn), v2 = delayed_u(u, 1, kn);
        const double y = m_i_ == 0 ? 0.0 : delayed_i(x, kn);
        const Eigen::Vector4d base = x[k] + 0.5 * h_ * f_prev;
        Eigen::Vector4d z = x[k] + h_ * f_prev;
        Eigen::Vector4d fz;
        bool done = false;
        for (int it = 0; it < 30; ++it) {
            fz = reduced_rhs(z, m_i_ == 0 ? z[2] : y, v1, v2, p_);
            const Eigen::Vector4d g = z - 0.5 * h_ * fz - base;
            Eigen::Matrix4d jac = reduced_jacobian(z, v1, v2, p_);
            if (m_i_ == 0) jac(2, 2) -= p_.tau0;
            const Eigen::Matrix4d m = Eigen::Matrix4d::Identity() - 0.5 * h_ * jac;
            const Eigen::Vector4d dz = m.partialPivLu().solve(g);
            z -= dz;
            if (!z.allFinite()) break;
            if (dz.lpNorm<Eigen::Infinity>() <= tol) {
                fz = reduced_rhs(z, m_i_ == 0 ? z[2] : y, v1, v2, p_);
                done = true;
                break;
            }
        }
        if (!z.allFinite()) throw BlowupError("trapezoidal step produced a non-finite state", grid_.time(kn));
        if (!done) {
            std::ostringstream os;
            os << "trapezoidal Newton iteration did not converge at t = " << grid_.time(kn);
            throw ConvergenceFailure(os.str(), {z[0], z[1], z[2], z[3]});
        }
        x[kn] = z;
        f_prev = fz;
    }
    return x;
}

double TrapezoidalTranscription::objective(const Eigen::VectorXd& u, const std::vector<Eigen::Vector4d>& x) const
{
    double j = 0.0;
    const int n = nodes();
    for (int k = 0; k < n; ++k) {
        const double u1 = u[k], u2 = u[n + k];
        double c = x[k][2] + x[k][3];
        if (obj_.kind == ObjectiveKind::L1)
            c += obj_.w1 * u1 + obj_.w2 * u2;
        else
            c += obj_.w1 * u1 * u1 + obj_.w2 * u2 * u2;
        j += weight(k) * c;
    }
    return j;
}

double TrapezoidalTranscription::objective(const Eigen::VectorXd& u) const { return objective(u, forward(u)); }

double TrapezoidalTranscription::objective_and_gradient(const Eigen::VectorXd& u, Eigen::VectorXd& grad) const
{
    const std::vector<Eigen::Vector4d> x = forward(u);
    const double j = objective(u, x);
    const int n = nodes();
    const double hh = 0.5 * h_;

    // p[k] multiplies the step constraint that produces x[k]; p[0] = p[n] = 0 pad the ends.
    std::vector<Eigen::Vector4d> lam(static_cast<std::size_t>(n + 1), Eigen::Vector4d::Zero());
    auto s = [&](int k) -> Eigen::Vector4d { return (k >= 1 ? lam[k] : Eigen::Vector4d::Zero()) + lam[k + 1]; };

    for (int k = n_steps_; k >= 1; --k) {
        Eigen::Matrix4d a = reduced_jacobian(x[k], delayed_u(u, 0, k), delayed_u(u, 1, k), p_);
        if (m_i_ == 0) a(2, 2) -= p_.tau0;
        Eigen::Vector4d rhs = lam[k + 1] + hh * a.transpose() * lam[k + 1] - weight(k) * kCostGrad;
        if (m_i_ > 0 && k + m_i_ <= n_steps_) rhs[2] -= hh * p_.tau0 * s(k + m_i_)[2];
        lam[k] = (Eigen::Matrix4d::Identity() - hh * a.transpose()).partialPivLu().solve(rhs);
    }

    grad.resize(variables());
    for (int ctrl = 0; ctrl < 2; ++ctrl) {
        const int lag = ctrl == 0 ? m_u1_ : m_u2_;
        const double w = ctrl == 0 ? obj_.w1 : obj_.w2;
        const double eps = ctrl == 0 ? p_.eps1 : p_.eps2;
        const int comp = ctrl == 0 ? 1 : 3;
        for (int k = 0; k < n; ++k) {
            const double uk = u[ctrl * n + k];
            double g = weight(k) * running_cost_du(uk, w, obj_.kind);
            const int at = k + lag;
            if (at <= n_steps_) {
                // dF/dv_k = -eps_k L_k e_{L_k}
                g += -hh * s(at)[comp] * (-eps * x[at][comp]);
            }
            grad[ctrl * n + k] = g;
        }
    }
    return j;
}

std::vector<ControlVec> TrapezoidalTranscription::controls(const Eigen::VectorXd& u) const
{
    std::vector<ControlVec> out(static_cast<std::size_t>(nodes()));
    for (int k = 0; k < nodes(); ++k) out[k] = {u[k], u[nodes() + k]};
    return out;
}

Eigen::VectorXd TrapezoidalTranscription::pack(const std::vector<ControlVec>& u) const
{
    if (static_cast<int>(u.size()) != nodes()) throw DomainError("control list has the wrong length");
    Eigen::VectorXd v(variables());
    for (int k = 0; k < nodes(); ++k) {
        v[k] = u[k].u1;
        v[nodes() + k] = u[k].u2;
    }
    return v;
}

Trajectory TrapezoidalTranscription::trajectory(const Eigen::VectorXd& u) const
{
    const std::vector<Eigen::Vector4d> x = forward(u);
    Trajectory t;
    t.grid = grid_;
    t.delays = delays_;
    t.history = hist_;
    t.controls = controls(u);
    t.states.reserve(x.size());
    t.derivatives.reserve(x.size());
    for (int k = 0; k < nodes(); ++k) {
        StateVec sv = StateVec::from_reduced(x[k], p_.n_pop);
        t.states.push_back(sv);
        const double y = m_i_ == 0 ? x[k][2] : delayed_i(x, k);
        t.derivatives.push_back(rhs_controlled(sv, y, delayed_u(u, 0, k), delayed_u(u, 1, k), p_));
    }
    return t;
}

} // namespace tbdelay
