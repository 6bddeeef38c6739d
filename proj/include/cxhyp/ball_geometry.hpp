#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cxhyp/indefinite_linalg.hpp"
#include "cxhyp/log_complex.hpp"
#include "cxhyp/quadrature.hpp"

namespace cxhyp {

/// Interior point of the unit ball B^n in C^n.
class BallPoint {
  public:
    explicit BallPoint(Vector z) : z_(std::move(z)) {
        if (z_.size() < 1) throw std::invalid_argument("BallPoint: empty coordinate vector");
        if (z_.norm() >= 1.0)
            throw std::invalid_argument("BallPoint: coordinates must satisfy |z| < 1");
    }
    const Vector& coords() const { return z_; }
    int n() const { return static_cast<int>(z_.size()); }

  private:
    Vector z_;
};

/// Point of the boundary sphere, |x| = 1 to 1e-10.
class BoundaryPoint {
  public:
    explicit BoundaryPoint(Vector x) : x_(std::move(x)) {
        if (x_.size() < 1) throw std::invalid_argument("BoundaryPoint: empty coordinate vector");
        if (std::abs(x_.norm() - 1.0) > 1e-10)
            throw std::invalid_argument("BoundaryPoint: coordinates must satisfy |x| = 1");
    }
    const Vector& coords() const { return x_; }
    int n() const { return static_cast<int>(x_.size()); }

  private:
    Vector x_;
};

/// <z, w> = z_1 conj(w_1) + ... + z_n conj(w_n) - 1.
inline cxd pairing(const Vector& z, const Vector& w) {
    if (z.size() != w.size())
        throw std::invalid_argument("pairing: dimension mismatch");
    cxd s = -1.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) s += z(i) * std::conj(w(i));
    return s;
}
inline cxd pairing(const BallPoint& z, const BallPoint& w) { return pairing(z.coords(), w.coords()); }
inline cxd pairing(const BallPoint& z, const BoundaryPoint& w) { return pairing(z.coords(), w.coords()); }
inline cxd pairing(const BoundaryPoint& z, const BoundaryPoint& w) { return pairing(z.coords(), w.coords()); }

/// Denominator of the fractional-linear action: last row of A applied to (z; 1).
inline cxd mobius_denominator(const GroupElement& a, const Vector& z) {
    const Matrix& m = a.matrix();
    if (z.size() + 1 != m.rows())
        throw std::invalid_argument("mobius_denominator: dimension mismatch");
    const Eigen::Index d = m.rows();
    cxd den = m(d - 1, d - 1);
    for (Eigen::Index i = 0; i + 1 < d; ++i) den += m(d - 1, i) * z(i);
    return den;
}

namespace detail {

inline Vector mobius_coords(const GroupElement& a, const Vector& z) {
    const Matrix& m = a.matrix();
    const Eigen::Index d = m.rows();
    Vector h(d);
    h.head(d - 1) = z;
    h(d - 1) = 1.0;
    Vector y = m * h;
    const cxd den = y(d - 1);
    if (std::abs(den) < 1e-14 * (1.0 + y.norm()))
        throw std::domain_error("mobius_apply: vanishing denominator");
    return y.head(d - 1) / den;
}

}  // namespace detail

inline BallPoint mobius_apply(const GroupElement& a, const BallPoint& z) {
    return BallPoint(detail::mobius_coords(a, z.coords()));
}
inline BoundaryPoint mobius_apply(const GroupElement& a, const BoundaryPoint& x) {
    return BoundaryPoint(detail::mobius_coords(a, x.coords()));
}

/// Complex Jacobian J(A, z) = (denominator)^{-(n+1)}.
inline cxd jacobian(const GroupElement& a, const Vector& z) {
    const cxd den = mobius_denominator(a, z);
    if (std::abs(den) == 0.0) throw std::domain_error("jacobian: vanishing denominator");
    return std::pow(den, -static_cast<double>(z.size() + 1));
}
inline cxd jacobian(const GroupElement& a, const BallPoint& z) { return jacobian(a, z.coords()); }

inline LogComplex jacobian_log(const GroupElement& a, const Vector& z) {
    const cxd den = mobius_denominator(a, z);
    if (std::abs(den) == 0.0) throw std::domain_error("jacobian_log: vanishing denominator");
    return LogComplex::from(den).pow(-(static_cast<long long>(z.size()) + 1));
}
inline LogComplex jacobian_log(const GroupElement& a, const BallPoint& z) {
    return jacobian_log(a, z.coords());
}

/// Hyperbolic distance from cosh^2(rho/2) = <z,w><w,z> / (<z,z><w,w>).
inline double distance(const BallPoint& z, const BallPoint& w) {
    const cxd zw = pairing(z, w);
    const double num = std::norm(zw);
    const double den = std::real(pairing(z, z)) * std::real(pairing(w, w));
    double ratio = num / den;
    if (ratio < 1.0 - 1e-12)
        throw std::domain_error("distance: cosh^2 ratio below 1; inconsistent inputs");
    ratio = std::max(ratio, 1.0);
    return 2.0 * std::acosh(std::sqrt(ratio));
}

inline double factorial_over_pi_n(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f / std::pow(std::numbers::pi, n);
}

/// Bergman kernel K(z, w) = (n!/pi^n) (-<z,w>)^{-(n+1)}.
inline cxd bergman_kernel(const BallPoint& z, const BallPoint& w) {
    const int n = z.n();
    return factorial_over_pi_n(n) * std::pow(-pairing(z, w), -static_cast<double>(n + 1));
}

inline LogComplex bergman_kernel_log(const BallPoint& z, const BallPoint& w) {
    const int n = z.n();
    return LogComplex::from_positive(factorial_over_pi_n(n)) *
           LogComplex::from(-pairing(z, w)).pow(-(n + 1));
}

/// log K(z, z); real since K(z,z) > 0.
inline double bergman_kernel_diag_log(const BallPoint& z) {
    const int n = z.n();
    return std::log(factorial_over_pi_n(n)) -
           (n + 1) * std::log(-std::real(pairing(z, z)));
}

struct WeightConstant {
    double value;                       // binomial as a double (exact when small)
    double log_value;                   // always finite
    std::optional<std::uint64_t> exact; // set when the integer fits in 64 bits
};

/// c(B^n, k) = binom((n+1)(k-1)+n, n), evaluated exactly in wide integers;
/// too-large values fall back to the log-gamma representation.
inline WeightConstant weight_constant(int n, int k) {
    if (n < 1 || k < 1) throw std::invalid_argument("weight_constant: requires n >= 1, k >= 1");
    const std::uint64_t top = static_cast<std::uint64_t>(n + 1) * (k - 1) + n;
    WeightConstant out{};
    bool overflow = false;
    unsigned __int128 r = 1;
    for (std::uint64_t i = 1; i <= static_cast<std::uint64_t>(n); ++i) {
        r = r * (top - n + i) / i;  // partial binomials stay integral
        if (r > static_cast<unsigned __int128>(UINT64_MAX)) {
            overflow = true;
            break;
        }
    }
    const double lg = std::lgamma(static_cast<double>(top) + 1.0) -
                      std::lgamma(static_cast<double>(n) + 1.0) -
                      std::lgamma(static_cast<double>(top - n) + 1.0);
    if (!overflow) {
        out.exact = static_cast<std::uint64_t>(r);
        out.value = static_cast<double>(*out.exact);
        out.log_value = std::log(out.value);
    } else {
        out.value = std::exp(lg);
        out.log_value = lg;
    }
    return out;
}

/// Stirling-limit form (n+1)^n k^n / n!.
inline double weight_constant_asymptote(int n, int k) {
    if (k < 2) throw std::invalid_argument("weight_constant_asymptote: requires k >= 2");
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return std::pow(n + 1.0, n) * std::pow(static_cast<double>(k), n) / f;
}

/// Residual of the weighted reproducing identity at n = 1:
///   f(z) - c(B^1,k) Int f(w) K(z,w)^k K(w,w)^{1-k} dV_e(w),
/// maximized over the supplied sample points. The integral is evaluated in
/// polar coordinates: Gauss-Legendre radially, trapezoid in the angle.
template <class F>
double reproducing_check(F&& f, int k, std::span<const cxd> sample_z, int radial_nodes = 120,
                         int angular_nodes = 256) {
    if (k < 2) throw std::invalid_argument("reproducing_check: requires k >= 2");
    if (radial_nodes < 8 || angular_nodes < 8)
        throw std::invalid_argument("reproducing_check: too few quadrature nodes");
    const double c = static_cast<double>(2 * k - 1);
    const double pi = std::numbers::pi;

    auto integral = [&](cxd z, int nr, int nth) {
        const GaussLegendreRule& rule = gauss_legendre(32);
        const int panels = (nr + 31) / 32;
        NeumaierSum re, im;
        const double dth = 2.0 * pi / nth;
        for (int p = 0; p < panels; ++p) {
            const double a = static_cast<double>(p) / panels;
            const double b = static_cast<double>(p + 1) / panels;
            for (size_t i = 0; i < rule.nodes.size(); ++i) {
                const double r = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i];
                const double wr = 0.5 * (b - a) * rule.weights[i];
                const double radial = std::pow(1.0 - r * r, 2 * (k - 1)) * r;
                for (int j = 0; j < nth; ++j) {
                    const cxd w = std::polar(r, dth * j);
                    const cxd kzw = std::pow(1.0 - z * std::conj(w), -2.0 * k);
                    const cxd t = f(w) * kzw * radial * (wr * dth / pi);
                    re.add(t.real());
                    im.add(t.imag());
                }
            }
        }
        return cxd{re.value(), im.value()};
    };

    double worst = 0.0;
    for (const cxd& z : sample_z) {
        if (std::abs(z) >= 1.0)
            throw std::invalid_argument("reproducing_check: sample point outside the ball");
        const cxd i1 = integral(z, radial_nodes, angular_nodes);
        const cxd i2 = integral(z, 2 * radial_nodes, angular_nodes);
        if (std::abs(i1 - i2) > 1e-9 * (1.0 + std::abs(i2)))
            throw QuadratureError("reproducing_check: radial quadrature did not converge",
                                  std::abs(f(z) - c * i2), std::abs(i1 - i2));
        worst = std::max(worst, std::abs(f(z) - c * i2));
    }
    return worst;
}

}  // namespace cxhyp
