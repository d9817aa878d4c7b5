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
#include "tbdelay/stability.hpp"

#include "tbdelay/errors.hpp"
#include "tbdelay/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace tbdelay {

namespace {

using cplx = std::complex<double>;

// Faddeev-LeVerrier: det(lambda I - A) in ascending coefficients.
template <int N>
Polynomial characteristic_polynomial(const Eigen::Matrix<double, N, N>& a)
{
    using Mat = Eigen::Matrix<double, N, N>;
    std::vector<double> c(N + 1, 0.0);
    c[N] = 1.0;
    Mat m = Mat::Zero();
    for (int k = 1; k <= N; ++k) {
        m = a * m + c[N - k + 1] * Mat::Identity();
        c[N - k] = -(a * m).trace() / k;
    }
    return Polynomial(std::move(c));
}

double max_abs_coefficient(const Polynomial& p)
{
    double m = 0.0;
    for (double c : p.coefficients()) m = std::max(m, std::abs(c));
    return m;
}

// Evaluation with the exponent clamped so that large negative arguments stay finite.
double safe_exp(double x) { return std::exp(std::min(x, 700.0)); }

double bisect(const QuasiPolynomial& f, double lo, double hi, double f_lo)
{
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0) == (f_lo < 0)) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

void append_unique(std::vector<double>& out, double x)
{
    for (double y : out)
        if (std::abs(y - x) <= 1e-10 * std::max(1.0, std::abs(x))) return;
    out.push_back(x);
}

std::vector<double> polynomial_zeros_in(const Polynomial& poly, double lo, double hi)
{
    std::vector<double> out;
    if (poly.degree() < 1) return out;
    for (double r : poly.real_roots())
        if (r >= lo && r <= hi) append_unique(out, r);
    return out;
}

std::vector<double> zeros_in(const QuasiPolynomial& f, double lo, double hi, int depth)
{
    if (f.q.is_zero() || f.delay == 0.0) return polynomial_zeros_in(f.zero_delay(), lo, hi);
    // exp(-d lambda) never vanishes, so only q matters once p is gone
    if (f.p.is_zero()) return polynomial_zeros_in(f.q, lo, hi);

    std::vector<double> knots;
    knots.push_back(lo);
    if (depth < 8) {
        for (double c : zeros_in(f.derivative(), lo, hi, depth + 1))
            if (c > lo && c < hi) knots.push_back(c);
    } else {
        // depth cap: fall back to dense sampling of the remaining piece
        const int n = 20000;
        for (int k = 1; k < n; ++k) knots.push_back(lo + (hi - lo) * k / n);
    }
    knots.push_back(hi);
    std::sort(knots.begin(), knots.end());

    std::vector<double> out;
    std::vector<double> vals(knots.size());
    for (std::size_t k = 0; k < knots.size(); ++k) vals[k] = f(knots[k]);
    for (std::size_t k = 0; k < knots.size(); ++k) {
        if (vals[k] == 0.0) append_unique(out, knots[k]);
        if (k + 1 < knots.size() && vals[k] != 0.0 && vals[k + 1] != 0.0 && (vals[k] < 0) != (vals[k + 1] < 0))
            append_unique(out, bisect(f, knots[k], knots[k + 1], vals[k]));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<double> edge_winding(const QuasiPolynomial& f, cplx za, cplx zb, cplx fa, cplx fb, double scale,
                                   int depth)
{
    // Accept a segment only when both halves turn little and agree with the whole;
    // this catches a fast rotation that aliases onto a small net angle.
    cplx zm = 0.5 * (za + zb);
    cplx fm = f(zm);
    if (std::abs(fm) <= 1e-14 * scale) return std::nullopt;
    const double d1 = std::arg(fm / fa), d2 = std::arg(fb / fm);
    const double whole = std::arg(fb / fa);
    if (std::abs(d1) < std::numbers::pi / 8 && std::abs(d2) < std::numbers::pi / 8 &&
        std::abs(d1 + d2 - whole) < 1e-9 && std::abs(fm) > 0.25 * std::min(std::abs(fa), std::abs(fb)))
        return d1 + d2;
    if (depth > 40) return std::nullopt;
    auto left = edge_winding(f, za, zm, fa, fm, scale, depth + 1);
    if (!left) return std::nullopt;
    auto right = edge_winding(f, zm, zb, fm, fb, scale, depth + 1);
    if (!right) return std::nullopt;
    return *left + *right;
}

double quasi_scale(const QuasiPolynomial& f, double radius)
{
    double r = std::max(1.0, radius);
    return f.p.magnitude_at(r) + f.q.magnitude_at(r);
}

std::optional<cplx> newton_in(const QuasiPolynomial& f, const Rect& r)
{
    const QuasiPolynomial df = f.derivative();
    cplx z(0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1));
    for (int it = 0; it < 60; ++it) {
        cplx fz = f(z);
        cplx dz = df(z);
        if (dz == cplx(0.0)) return std::nullopt;
        cplx step = fz / dz;
        z -= step;
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return std::nullopt;
        if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(z))) break;
    }
    double mx = 1e-9 * (r.x1 - r.x0), my = 1e-9 * (r.y1 - r.y0);
    if (z.real() < r.x0 - mx || z.real() > r.x1 + mx || z.imag() < r.y0 - my || z.imag() > r.y1 + my)
        return std::nullopt;
    return z;
}

void locate_rec(const QuasiPolynomial& f, const Rect& r, int count, int depth, std::vector<cplx>& out)
{
    if (count <= 0) return;
    const double w = r.x1 - r.x0, h = r.y1 - r.y0;
    if (count == 1 && std::max(w, h) < 0.5) {
        if (auto z = newton_in(f, r)) {
            out.push_back(*z);
            return;
        }
    }
    if (std::max(w, h) < 1e-10 || depth > 80) {
        cplx c(0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1));
        for (int k = 0; k < count; ++k) out.push_back(c);
        return;
    }
    // Off-centre split so that a symmetric rectangle is not cut along the real axis.
    for (double frac : {0.4817, 0.5371, 0.4291, 0.5813}) {
        Rect a = r, b = r;
        if (w >= h) {
            a.x1 = b.x0 = r.x0 + frac * w;
        } else {
            a.y1 = b.y0 = r.y0 + frac * h;
        }
        auto ca = count_zeros(f, a);
        auto cb = count_zeros(f, b);
        if (!ca || !cb || *ca + *cb != count) continue;
        locate_rec(f, a, *ca, depth + 1, out);
        locate_rec(f, b, *cb, depth + 1, out);
        return;
    }
    throw ConvergenceFailure("argument-principle subdivision failed: zero on every trial boundary", {});
}

} // namespace

const char* to_string(VerdictKind kind)
{
    switch (kind) {
    case VerdictKind::StableZeroDelay: return "StableZeroDelay";
    case VerdictKind::UnstableAnyDelay: return "UnstableAnyDelay";
    case VerdictKind::CrossingExists: return "CrossingExists";
    case VerdictKind::StableAtGivenDelay: return "StableAtGivenDelay";
    case VerdictKind::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

double QuasiPolynomial::operator()(double lambda) const
{
    if (delay == 0.0) return p(lambda) + q(lambda);
    return p(lambda) + q(lambda) * safe_exp(-lambda * delay);
}

std::complex<double> QuasiPolynomial::operator()(std::complex<double> lambda) const
{
    return p(lambda) + q(lambda) * std::exp(-lambda * delay);
}

QuasiPolynomial QuasiPolynomial::derivative() const
{
    return QuasiPolynomial{p.derivative(), q.derivative() - delay * q, delay};
}

LinearizedDDE linearize(const ModelParams& p, const EquilibriumPoint& eq, double delay)
{
    p.validate();
    if (!eq.state.finite()) throw DomainError("equilibrium state is not finite");
    if (!(delay >= 0.0) || !std::isfinite(delay)) throw DomainError("delay must be finite and non-negative");
    LinearizedDDE lin;
    lin.a1 = reduced_jacobian(eq.state.reduced(), 0.0, 0.0, p);
    lin.a2(2, 2) = -p.tau0;
    lin.delay = delay;
    return lin;
}

QuasiPolynomial characteristic_function(const LinearizedDDE& lin)
{
    Eigen::Matrix4d off = lin.a2;
    off(2, 2) = 0.0;
    if (off.cwiseAbs().maxCoeff() != 0.0)
        throw DomainError("delayed part must be diag(0, 0, -tau0, 0)");
    // det is affine in the (2,2) entry: adding -e*a2(2,2) there adds that times the minor.
    Eigen::Matrix3d minor;
    const int keep[3] = {0, 1, 3};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) minor(r, c) = lin.a1(keep[r], keep[c]);
    QuasiPolynomial qp;
    qp.p = characteristic_polynomial<4>(lin.a1);
    qp.q = (-lin.a2(2, 2)) * characteristic_polynomial<3>(minor);
    qp.delay = lin.delay;
    return qp;
}

std::complex<double> char_eval(const LinearizedDDE& lin, std::complex<double> lambda, double d)
{
    Eigen::Matrix4cd m = lambda * Eigen::Matrix4cd::Identity() - lin.a1.cast<cplx>() -
                         std::exp(-lambda * d) * lin.a2.cast<cplx>();
    return m.partialPivLu().determinant();
}

CharCoefficients dfe_char_coefficients(const ModelParams& p)
{
    p.validate();
    const R0Breakdown r0 = basic_reproduction_number(p);
    const double mu = p.mu;
    CharCoefficients cc;
    cc.c1 = p.c1();
    cc.c2 = p.c2();
    cc.c3 = p.omega_r + p.tau0 + mu;
    cc.c4 = p.tau0 + p.omega_r;
    cc.c5 = p.tau2 + p.omega;
    cc.c6 = p.delta + p.tau1;
    cc.a0 = r0.denominator - r0.numerator;
    cc.a1 = 2.0 / mu * r0.denominator + mu * mu * (cc.c1 + cc.c2 + cc.c4) - cc.c4 * cc.c5 * cc.c6 -
            p.beta * (p.tau1 * p.omega_r + p.omega * p.delta +
                      p.delta * p.phi * (p.omega_r + p.tau2 + 2.0 * mu));
    cc.a2 = cc.c4 * cc.c5 + 3.0 * mu * (cc.c1 + cc.c2 + cc.c4) + cc.c6 * (cc.c4 + cc.c5) - p.beta * p.phi * p.delta;
    cc.a3 = cc.c1 + cc.c2 + cc.c3 + mu;
    return cc;
}

RouthHurwitz routh_hurwitz_quartic(const CharCoefficients& cc)
{
    RouthHurwitz rh;
    rh.a0_positive = cc.a0 > 0;
    rh.a1_positive = cc.a1 > 0;
    rh.a2_positive = cc.a2 > 0;
    rh.a3_positive = cc.a3 > 0;
    rh.a3a2_gt_a1 = cc.a3 * cc.a2 > cc.a1;
    rh.a3a2a1_gt_a1sq_a3sqa0 = cc.a3 * cc.a2 * cc.a1 > cc.a1 * cc.a1 + cc.a3 * cc.a3 * cc.a0;
    return rh;
}

RouthHurwitz routh_hurwitz_quartic(const Polynomial& quartic)
{
    if (quartic.degree() != 4) throw DomainError("Routh-Hurwitz test needs a quartic");
    const double lead = quartic.leading();
    CharCoefficients cc;
    cc.a0 = quartic.coefficient(0) / lead;
    cc.a1 = quartic.coefficient(1) / lead;
    cc.a2 = quartic.coefficient(2) / lead;
    cc.a3 = quartic.coefficient(3) / lead;
    return routh_hurwitz_quartic(cc);
}

CrossingQuartic crossing_quartic(const CharCoefficients& cc, const ModelParams& p)
{
    const double mu = p.mu, t0 = p.tau0;
    const double c1 = cc.c1, c2 = cc.c2;
    const double a0 = cc.a0, a1 = cc.a1, a2 = cc.a2, a3 = cc.a3;
    CrossingQuartic q;
    q.alpha0 = a0 * (a0 - 2.0 * mu * t0 * c1 * c2);
    q.alpha1 = 2.0 * t0 * (mu * (a0 + a2 * c1 * c2 - a1 * (c1 + c2)) + a0 * (c1 + c2) - a1 * c1 * c2) -
               2.0 * a2 * a0 + a1 * a1;
    q.alpha2 = 2.0 * t0 * (mu * (a3 * (c1 + c2) - a2 - c1 * c2) - a2 * (c1 + c2) + a3 * c1 * c2 + a1) + 2.0 * a0 +
               a2 * a2 - 2.0 * a3 * a1;
    q.alpha3 = 2.0 * t0 * (mu + c1 + c2) + a3 * a3 - 2.0 * (a3 * t0 + a2);
    return q;
}

Polynomial modulus_polynomial(const QuasiPolynomial& qp)
{
    // For real f: |f(ib)|^2 = E(b^2)^2 + b^2 O(b^2)^2 with f(x) = E(x^2) + x O(x^2).
    auto split_square = [](const Polynomial& f) {
        std::vector<double> ev, od;
        const auto& c = f.coefficients();
        for (std::size_t k = 0; k < c.size(); ++k) {
            double s = (k / 2) % 2 == 0 ? 1.0 : -1.0;  // i^k = s or s*i
            (k % 2 == 0 ? ev : od).push_back(s * c[k]);
        }
        Polynomial e(ev), o(od);
        return e * e + Polynomial{0.0, 1.0} * (o * o);
    };
    return split_square(qp.p) - split_square(qp.q);
}

std::vector<double> quartic_real_roots(const CrossingQuartic& q)
{
    return q.polynomial().real_roots();
}

RealRoots real_root_isolation(const QuasiPolynomial& qp, double lo, double hi)
{
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) throw DomainError("root bracket must be finite and ordered");
    if (qp.delay > 0.0) lo = std::max(lo, -700.0 / qp.delay);
    RealRoots out;
    if (!(lo < hi)) return out;
    const double scale = std::max(max_abs_coefficient(qp.p), max_abs_coefficient(qp.q));
    for (double r : zeros_in(qp, lo, hi, 0))
        if (std::abs(qp(r)) < 1e-8 * std::max(1.0, scale)) out.roots.push_back(r);
    out.derivative_zeros = zeros_in(qp.derivative(), lo, hi, 1);
    return out;
}

RealRoots real_root_isolation(const LinearizedDDE& lin, double d, double lo, double hi)
{
    LinearizedDDE l = lin;
    l.delay = d;
    return real_root_isolation(characteristic_function(l), lo, hi);
}

std::optional<int> count_zeros(const QuasiPolynomial& f, const Rect& r)
{
    const cplx corners[5] = {{r.x0, r.y0}, {r.x1, r.y0}, {r.x1, r.y1}, {r.x0, r.y1}, {r.x0, r.y0}};
    const double scale = quasi_scale(f, std::max({std::abs(r.x0), std::abs(r.x1), std::abs(r.y0), std::abs(r.y1)}));
    const double max_rot = std::max(1.0, f.delay * std::max(r.y1 - r.y0, r.x1 - r.x0));
    const int pieces = 32 + static_cast<int>(8.0 * max_rot);
    double total = 0.0;
    for (int e = 0; e < 4; ++e) {
        cplx za = corners[e];
        cplx fa = f(za);
        if (std::abs(fa) <= 1e-14 * scale) return std::nullopt;
        for (int k = 1; k <= pieces; ++k) {
            cplx zb = corners[e] + (corners[e + 1] - corners[e]) * (static_cast<double>(k) / pieces);
            cplx fb = f(zb);
            if (std::abs(fb) <= 1e-14 * scale) return std::nullopt;
            auto w = edge_winding(f, za, zb, fa, fb, scale, 0);
            if (!w) return std::nullopt;
            total += *w;
            za = zb;
            fa = fb;
        }
    }
    double turns = total / (2.0 * std::numbers::pi);
    double n = std::round(turns);
    if (std::abs(turns - n) > 0.05) return std::nullopt;
    return static_cast<int>(n);
}

std::vector<std::complex<double>> locate_zeros(const QuasiPolynomial& qp, const Rect& r, int threads)
{
    // Four horizontal bands searched independently; results concatenated in band order.
    const int bands = 4;
    std::vector<Rect> parts;
    for (int k = 0; k < bands; ++k) {
        double f0 = k == 0 ? 0.0 : (k - 0.0173) / bands;
        double f1 = k == bands - 1 ? 1.0 : (k + 1 - 0.0173) / bands;
        parts.push_back({r.x0, r.x1, r.y0 + f0 * (r.y1 - r.y0), r.y0 + f1 * (r.y1 - r.y0)});
    }
    auto found = parallel_map(threads, parts.size(), [&](std::size_t k) {
        std::vector<cplx> out;
        auto n = count_zeros(qp, parts[k]);
        if (!n) throw ConvergenceFailure("argument-principle count failed: zero on a band boundary", {});
        locate_rec(qp, parts[k], *n, 0, out);
        return out;
    });
    std::vector<cplx> all;
    for (auto& v : found) all.insert(all.end(), v.begin(), v.end());
    std::sort(all.begin(), all.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() > b.real() : a.imag() < b.imag();
    });
    return all;
}

double root_modulus_bound(const QuasiPolynomial& qp, double x_min)
{
    const int n = qp.p.degree();
    if (n < 1) throw DomainError("quasi-polynomial needs a polynomial part of positive degree");
    if (qp.q.degree() >= n) throw DomainError("quasi-polynomial must be of retarded type");
    const double lead = qp.p.leading();
    double sp = 0.0, sq = 0.0;
    for (int k = 0; k < n; ++k) sp += std::abs(qp.p.coefficient(k) / lead);
    for (double c : qp.q.coefficients()) sq += std::abs(c / lead);
    // |exp(-lambda d)| <= exp(-x_min d) on Re(lambda) >= x_min
    const double growth = std::exp(std::max(0.0, -x_min) * qp.delay);
    return std::max(1.0, sp + growth * sq) * 1.01;
}

StabilityVerdict classify(const ModelParams& p, const EquilibriumPoint& eq, double d, const ClassifyOptions& opts)
{
    if (!(d >= 0.0) || !std::isfinite(d)) throw DomainError("delay must be finite and non-negative");
    const LinearizedDDE lin = linearize(p, eq, d);
    const QuasiPolynomial qp = characteristic_function(lin);

    StabilityVerdict v;
    v.zero_delay_polynomial = qp.zero_delay();
    v.routh_hurwitz = routh_hurwitz_quartic(v.zero_delay_polynomial);
    v.delta_at_zero = qp(0.0);
    v.modulus_polynomial = modulus_polynomial(qp);
    for (double z : v.modulus_polynomial.real_roots())
        if (z > 1e-9) v.crossing_b.push_back(std::sqrt(z));

    std::ostringstream why;
    if (v.delta_at_zero < 0.0) {
        v.kind = VerdictKind::UnstableAnyDelay;
        why << "Delta(0) = " << v.delta_at_zero << " < 0 and Delta -> +inf on the positive real axis";
        if (eq.kind == EquilibriumKind::DiseaseFree) why << " (R0 = " << basic_reproduction_number(p).value << " > 1)";
        v.details = why.str();
        return v;
    }

    if (d == 0.0) {
        if (v.routh_hurwitz.all()) {
            v.kind = VerdictKind::StableZeroDelay;
            v.details = "Routh-Hurwitz conditions hold for the zero-delay quartic";
        } else {
            v.kind = VerdictKind::Inconclusive;
            v.details = "Routh-Hurwitz conditions fail for the zero-delay quartic";
        }
        return v;
    }

    v.real_roots = real_root_isolation(qp, opts.bracket_lo, opts.bracket_hi).roots;

    const double radius = root_modulus_bound(qp, opts.scan_left);
    try {
        v.right_half_plane_count = count_zeros(qp, Rect{0.0, radius, -radius, radius});
        v.located_roots = locate_zeros(qp, Rect{opts.scan_left, radius, -radius, radius}, opts.threads);
    } catch (const ConvergenceFailure& e) {
        why << "argument-principle scan failed: " << e.what() << "; ";
    }
    std::optional<double> rightmost;
    for (auto z : v.located_roots) rightmost = std::max(rightmost.value_or(z.real()), z.real());
    for (double r : v.real_roots) rightmost = std::max(rightmost.value_or(r), r);
    v.rightmost_real_part = rightmost;

    const bool reals_negative =
        std::all_of(v.real_roots.begin(), v.real_roots.end(), [](double r) { return r < 0.0; });
    if (v.right_half_plane_count && *v.right_half_plane_count == 0 && reals_negative) {
        v.kind = VerdictKind::StableAtGivenDelay;
        why << "no zeros with Re >= 0 inside |lambda| <= " << radius << "; real zeros all negative";
        if (!v.crossing_b.empty()) why << "; modulus equation has " << v.crossing_b.size() << " positive root(s), so other delays may destabilize";
    } else if (!v.crossing_b.empty()) {
        v.kind = VerdictKind::CrossingExists;
        why << "modulus equation has a positive root, b = " << v.crossing_b.front();
    } else {
        v.kind = VerdictKind::Inconclusive;
        why << "zeros with Re >= 0 found but no imaginary-axis crossing frequency";
    }
    v.details = why.str();
    return v;
}

} // namespace tbdelay
