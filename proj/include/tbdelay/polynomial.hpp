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

#include <complex>
#include <initializer_list>
#include <vector>

namespace tbdelay {

/// Real polynomial, coefficients in ascending powers.
class Polynomial {
public:
    Polynomial() = default;
    Polynomial(std::initializer_list<double> ascending) : c_(ascending) { trim(); }
    explicit Polynomial(std::vector<double> ascending) : c_(std::move(ascending)) { trim(); }

    /// Monic polynomial with the given real roots.
    static Polynomial from_roots(const std::vector<double>& roots);

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    const std::vector<double>& coefficients() const { return c_; }
    double coefficient(int k) const { return k >= 0 && k < static_cast<int>(c_.size()) ? c_[k] : 0.0; }
    double leading() const { return c_.empty() ? 0.0 : c_.back(); }

    double operator()(double x) const;
    std::complex<double> operator()(std::complex<double> z) const;

    Polynomial derivative() const;

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(double s, const Polynomial& a);

    /// All roots: eigenvalues of the companion matrix, each refined by Newton steps.
    std::vector<std::complex<double>> roots() const;

    /**
     * Real roots in ascending order. Companion eigenvalues with
     * |Im| <= imag_tol * (1 + |z|) are taken as real and polished by Newton
     * on the real line.
     */
    std::vector<double> real_roots(double imag_tol = 1e-7) const;

    /// sum |c_k| |x|^k: the scale against which a residual at x is judged.
    double magnitude_at(double x) const;

private:
    void trim();
    std::vector<double> c_;
};

} // namespace tbdelay
