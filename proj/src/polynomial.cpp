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
#include "tbdelay/polynomial.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace tbdelay {

void Polynomial::trim()
{
    while (!c_.empty() && c_.back() == 0.0) {
        c_.pop_back();
    }
}

Polynomial Polynomial::from_roots(const std::vector<double>& roots)
{
    Polynomial p{1.0};
    for (double r : roots) {
        p = p * Polynomial{-r, 1.0};
    }
    return p;
}

double Polynomial::operator()(double x) const
{
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
        acc = acc * x + *it;
    }
    return acc;
}

std::complex<double> Polynomial::operator()(std::complex<double> z) const
{
    std::complex<double> acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
        acc = acc * z + *it;
    }
    return acc;
}

double Polynomial::magnitude_at(double x) const
{
    double acc = 0.0;
    const double ax = std::abs(x);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
        acc = acc * ax + std::abs(*it);
    }
    return acc;
}

Polynomial Polynomial::derivative() const
{
    std::vector<double> d;
    for (std::size_t k = 1; k < c_.size(); ++k) {
        d.push_back(static_cast<double>(k) * c_[k]);
    }
    return Polynomial(std::move(d));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b)
{
    std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
        c[k] = a.coefficient(static_cast<int>(k)) + b.coefficient(static_cast<int>(k));
    }
    return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b)
{
    return a + (-1.0) * b;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b)
{
    if (a.is_zero() || b.is_zero()) {
        return {};
    }
    std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
        for (std::size_t j = 0; j < b.c_.size(); ++j) {
            c[i + j] += a.c_[i] * b.c_[j];
        }
    }
    return Polynomial(std::move(c));
}

Polynomial operator*(double s, const Polynomial& a)
{
    std::vector<double> c = a.c_;
    for (double& v : c) {
        v *= s;
    }
    return Polynomial(std::move(c));
}

std::vector<std::complex<double>> Polynomial::roots() const
{
    const int n = degree();
    if (n < 1) {
        return {};
    }
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        companion(0, k) = -c_[n - 1 - k] / c_[n];
    }
    for (int k = 1; k < n; ++k) {
        companion(k, k - 1) = 1.0;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    std::vector<std::complex<double>> out;
    const Polynomial dp = derivative();
    for (int k = 0; k < n; ++k) {
        std::complex<double> z = es.eigenvalues()[k];
        for (int it = 0; it < 3; ++it) {
            const std::complex<double> d = dp(z);
            if (std::abs(d) == 0.0) {
                break;
            }
            const std::complex<double> next = z - (*this)(z) / d;
            if (std::abs((*this)(next)) >= std::abs((*this)(z))) {
                break;
            }
            z = next;
        }
        out.push_back(z);
    }
    return out;
}

std::vector<double> Polynomial::real_roots(double imag_tol) const
{
    const int n = degree();
    if (n < 1) {
        return {};
    }
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        companion(0, k) = -c_[n - 1 - k] / c_[n];
    }
    for (int k = 1; k < n; ++k) {
        companion(k, k - 1) = 1.0;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    const Polynomial dp = derivative();
    std::vector<double> out;
    for (int k = 0; k < n; ++k) {
        const std::complex<double> z = es.eigenvalues()[k];
        if (std::abs(z.imag()) > imag_tol * (1.0 + std::abs(z))) {
            continue;
        }
        double x = z.real();
        for (int it = 0; it < 8; ++it) {
            const double d = dp(x);
            if (d == 0.0) {
                break;
            }
            const double next = x - (*this)(x) / d;
            if (!(std::abs((*this)(next)) < std::abs((*this)(x)))) {
                break;
            }
            x = next;
        }
        out.push_back(x);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace tbdelay
