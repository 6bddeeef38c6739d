#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "cxhyp/ball_geometry.hpp"
#include "cxhyp/quadrature.hpp"

namespace cxhyp {

/// Least-squares slope of y against x.
inline double fit_slope(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("fit_slope: need matching samples, at least 2");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    if (den == 0.0) throw std::invalid_argument("fit_slope: degenerate abscissae");
    return num / den;
}

/// Int g(x) f(x)^N dx with one interior maximum of f inside `bracket`.
struct LaplaceProblem {
    std::function<double(double)> f;
    std::function<double(double)> fprime;
    std::function<double(double)> fsecond;
    std::function<double(double)> g;
    double N;
    double lo, hi;
};

struct LaplaceEstimate {
    double value;      // g(x0) f(x0)^{N+1/2} sqrt(-2 pi / (N f''(x0)))
    double log_value;  // of |value|
    double x0;
};

/// Leading-order Laplace estimate; the critical point is located by
/// safeguarded Newton on f' (bisection fallback, |f'| tolerance 1e-12).
inline LaplaceEstimate laplace_estimate(const LaplaceProblem& p) {
    if (!p.f || !p.fprime || !p.fsecond || !p.g)
        throw std::invalid_argument("laplace_estimate: missing callables");
    if (!(p.lo < p.hi) || !(p.N > 0))
        throw std::invalid_argument("laplace_estimate: bad bracket or exponent");

    // Find a sign change of f' by scanning, then polish.
    const int scan = 64;
    double a = p.lo, b = p.hi;
    bool found = false;
    double prev_x = p.lo + 1e-12 * (p.hi - p.lo);
    double prev_d = p.fprime(prev_x);
    for (int i = 1; i <= scan; ++i) {
        const double x = p.lo + (p.hi - p.lo) * i / (scan + 1.0);
        const double d = p.fprime(x);
        if (prev_d > 0.0 && d <= 0.0) {
            a = prev_x;
            b = x;
            found = true;
            break;
        }
        prev_x = x;
        prev_d = d;
    }
    if (!found)
        throw std::domain_error("laplace_estimate: no interior maximum found in bracket");

    double x = 0.5 * (a + b);
    for (int it = 0; it < 100; ++it) {
        const double d = p.fprime(x);
        if (std::abs(d) <= 1e-12) break;
        if (d > 0.0)
            a = x;
        else
            b = x;
        const double d2 = p.fsecond(x);
        double step = d2 != 0.0 ? x - d / d2 : x;
        if (!(step > a && step < b)) step = 0.5 * (a + b);  // bisection fallback
        if (std::abs(step - x) < 1e-16 * std::max(1.0, std::abs(x))) {
            x = step;
            break;
        }
        x = step;
    }

    const double f0 = p.f(x), d2 = p.fsecond(x), g0 = p.g(x);
    if (!(f0 > 0.0)) throw std::domain_error("laplace_estimate: f(x0) must be positive");
    if (!(d2 < 0.0)) throw std::domain_error("laplace_estimate: f''(x0) must be negative");
    const double width_log = 0.5 * std::log(-2.0 * std::numbers::pi / (p.N * d2));
    const double log_abs =
        std::log(std::abs(g0)) + (p.N + 0.5) * std::log(f0) + width_log;
    const double sign = g0 >= 0.0 ? 1.0 : -1.0;
    return {sign * std::exp(log_abs), log_abs, x};
}

/// Peak family of the collapsed inner integral: f(x) = sqrt(1-x^2)/(1-xu).
inline double j2_peak_f(double x, double u) {
    return std::sqrt(1.0 - x * x) / (1.0 - x * u);
}
inline double j2_peak_fprime(double x, double u) {
    return (u - x) / (std::sqrt(1.0 - x * x) * (1.0 - x * u) * (1.0 - x * u));
}
inline double j2_peak_fsecond(double x, double u) {
    const double s = std::sqrt(1.0 - x * x);
    const double d = 1.0 - x * u;
    return -1.0 / (s * d * d) + (u - x) * x / (s * s * s * d * d) +
           2.0 * u * (u - x) / (s * d * d * d);
}
inline double j2_peak_amplitude(double x, double u) {
    return 1.0 / ((1.0 - x * u) * (1.0 - x * u));
}

/// The inner integral as a LaplaceProblem with N = (n+1)k - 2 on (-1, 1).
inline LaplaceProblem j2_inner_laplace_problem(int n, int k, double u) {
    if (!(std::abs(u) < 1.0))
        throw std::invalid_argument("j2_inner_laplace_problem: requires |u| < 1");
    return {[u](double x) { return j2_peak_f(x, u); },
            [u](double x) { return j2_peak_fprime(x, u); },
            [u](double x) { return j2_peak_fsecond(x, u); },
            [u](double x) { return j2_peak_amplitude(x, u); },
            static_cast<double>(n + 1) * k - 2.0,
            -1.0 + 1e-9,
            1.0 - 1e-9};
}

/// Closed form of the Laplace estimate for the inner integral:
/// sqrt(2 pi / ((n+1)k - 2)) (1-u^2)^{-(n+1)k/2}.
inline double inner_integral_asymptote_log(int n, int k, double u) {
    if (!(std::abs(u) < 1.0))
        throw std::invalid_argument("inner_integral_asymptote: requires |u| < 1");
    const double nk = static_cast<double>(n + 1) * k;
    if (!(nk > 2.0)) throw std::invalid_argument("inner_integral_asymptote: requires (n+1)k > 2");
    return 0.5 * std::log(2.0 * std::numbers::pi / (nk - 2.0)) -
           0.5 * nk * std::log1p(-u * u);
}
inline double inner_integral_asymptote(int n, int k, double u) {
    return std::exp(inner_integral_asymptote_log(n, k, u));
}

/// J_2(k) ~ c(B^n,k) (n!/pi^n)^{2/(n+1)} sqrt(2 pi/((n+1)k-2)) ln|lambda|,
/// with the weight constant kept exact.
inline double j2_asymptote(int n, int k, double lambda) {
    if (!(lambda * lambda > 1.0))
        throw std::invalid_argument("j2_asymptote: requires lambda^2 > 1");
    const double nk = static_cast<double>(n + 1) * k;
    return std::exp(weight_constant(n, k).log_value +
                    (2.0 / (n + 1)) * std::log(factorial_over_pi_n(n)) +
                    0.5 * std::log(2.0 * std::numbers::pi / (nk - 2.0))) *
           std::log(std::abs(lambda));
}

/// The limit constant of the norm asymptotics:
/// k^{n-1/2} (n+1)^{n-1/2} / (pi^{(3n-1)/(2n+2)} (n!)^{(n-1)/(n+1)}) * length/sqrt(2).
inline double theorem_constant(int n, int k, double length) {
    if (!(length > 0.0)) throw std::invalid_argument("theorem_constant: length must be positive");
    if (n < 1 || k < 1) throw std::invalid_argument("theorem_constant: requires n >= 1, k >= 1");
    double nfact = 1.0;
    for (int i = 2; i <= n; ++i) nfact *= i;
    const double log_val = (n - 0.5) * std::log(static_cast<double>(k)) +
                           (n - 0.5) * std::log(n + 1.0) -
                           (3.0 * n - 1.0) / (2.0 * n + 2.0) * std::log(std::numbers::pi) -
                           (n - 1.0) / (n + 1.0) * std::log(nfact) +
                           std::log(length) - 0.5 * std::log(2.0);
    return std::exp(log_val);
}

struct CorrectionSample {
    double k;
    double j2;
    double asymptote;
};

/// Fitted exponent of |j2 - asymptote| against k in log-log coordinates;
/// measures the order of the next term in the expansion.
inline double correction_exponent_fit(const std::vector<CorrectionSample>& samples) {
    if (samples.size() < 6)
        throw std::invalid_argument("correction_exponent_fit: need at least 6 samples");
    double kmin = samples.front().k, kmax = samples.front().k;
    for (const CorrectionSample& s : samples) {
        kmin = std::min(kmin, s.k);
        kmax = std::max(kmax, s.k);
    }
    if (kmax < 4.0 * kmin)
        throw std::invalid_argument("correction_exponent_fit: k must span at least a factor of 4");
    std::vector<double> xs, ys;
    for (const CorrectionSample& s : samples) {
        const double r = std::abs(s.j2 - s.asymptote);
        if (r < 1e-13 * std::abs(s.j2))
            throw std::invalid_argument(
                "correction_exponent_fit: residual at noise floor; increase k range or precision");
        xs.push_back(std::log(s.k));
        ys.push_back(std::log(r));
    }
    return fit_slope(xs, ys);
}

}  // namespace cxhyp
