#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cxhyp/ball_geometry.hpp"
#include "cxhyp/geodesic_normal_form.hpp"
#include "cxhyp/group_enum.hpp"
#include "cxhyp/log_complex.hpp"
#include "cxhyp/quadrature.hpp"

namespace cxhyp {

struct SeriesParams {
    int n;
    int k;
    int truncation;   // word length / cyclic range the element set was built with
    int quad_points;  // axis quadrature nodes; 0 picks ceil(8 sqrt((n+1)k))
    double tol;

    SeriesParams(int n, int k, int truncation, int quad_points = 0, double tol = 1e-9)
        : n(n), k(k), truncation(truncation), quad_points(quad_points), tol(tol) {
        if (n < 1) throw std::invalid_argument("SeriesParams: n >= 1 required");
        if (k < 2) throw std::invalid_argument("SeriesParams: k >= 2 required for convergence");
        if (truncation < 0) throw std::invalid_argument("SeriesParams: truncation >= 0");
        if (tol <= 0.0) throw std::invalid_argument("SeriesParams: tol > 0");
        if (this->quad_points <= 0)
            this->quad_points =
                static_cast<int>(std::ceil(8.0 * std::sqrt((n + 1.0) * k)));
    }
};

struct SeriesResult {
    cxd value;                 // may overflow to inf for extreme (n+1)k; see log_value
    LogComplex log_value;
    double abs_tail_estimate;
    bool converged;
    SeriesParams params;
};

namespace detail {

// Per-shell magnitudes feed the convergence flag and the geometric tail
// extrapolation from the last two shells.
struct ShellTracker {
    std::map<int, std::vector<LogComplex>> by_shell;

    void add(int shell, LogComplex term) { by_shell[shell].push_back(term); }

    // (converged, abs_tail); comparisons stay in log space so extreme k does
    // not overflow the bookkeeping itself.
    std::pair<bool, double> finish(double total_log_mag, double tol) const {
        if (by_shell.size() <= 1) return {true, 0.0};
        auto last = std::prev(by_shell.end());
        auto prev = std::prev(last);
        const double last_log = log_sum(last->second).log_mag;
        const double prev_log = log_sum(prev->second).log_mag;
        const bool converged = last_log <= std::log(tol) + total_log_mag;
        double tail_log = last_log;
        if (prev_log > last_log)  // geometric extrapolation s_L^2 / (s_{L-1} - s_L)
            tail_log = 2.0 * last_log -
                       (prev_log + std::log1p(-std::exp(last_log - prev_log)));
        return {converged, std::exp(tail_log)};
    }
};

inline bool contains_identity(const std::vector<AnnotatedElement>& group) {
    for (const AnnotatedElement& e : group) {
        const Eigen::Index d = e.g.matrix().rows();
        if ((e.g.matrix() - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-8) return true;
    }
    return false;
}

}  // namespace detail

/// Theta_w^{(k)}(z) = c(B^n, k) sum_A K(A z, w)^k J(A, z)^k over the supplied
/// finite element set; terms evaluated with integer-exponent log arithmetic
/// and accumulated smallest-first.
inline SeriesResult theta_point(const BallPoint& w, const BallPoint& z, const SeriesParams& params,
                                const std::vector<AnnotatedElement>& group) {
    if (w.n() != params.n || z.n() != params.n)
        throw std::invalid_argument("theta_point: point dimension mismatch");
    if (!detail::contains_identity(group))
        throw std::invalid_argument("theta_point: element set must contain the identity");

    const LogComplex pref = LogComplex::from_positive(factorial_over_pi_n(params.n))
                                .pow(static_cast<long long>(params.k));
    const long long pk = static_cast<long long>(params.n + 1) * params.k;

    std::vector<LogComplex> terms;
    terms.reserve(group.size());
    detail::ShellTracker shells;
    for (const AnnotatedElement& e : group) {
        const Vector az = detail::mobius_coords(e.g, z.coords());
        const LogComplex t = pref *
                             LogComplex::from(-pairing(az, w.coords())).pow(-pk) *
                             LogComplex::from(mobius_denominator(e.g, z.coords())).pow(-pk);
        terms.push_back(t);
        shells.add(e.shell, t);
    }
    const LogComplex c_log = LogComplex::from_log(weight_constant(params.n, params.k).log_value, 0.0);
    const LogComplex total = c_log * log_sum(std::move(terms));
    auto [converged, tail] = shells.finish(total.log_mag - c_log.log_mag, params.tol);
    return {total.value(), total, tail * std::exp(c_log.log_mag), converged, params};
}

/// Theta_C^{(k)}(z): quadrature of Theta_{A_gamma xi}^{(k)}(z)
/// K(A_gamma xi, A_gamma xi)^{-k/2} phi(xi) over the fundamental axis
/// segment, with the series pulled into one smallest-first accumulation.
/// `group` is the truncated Gamma in the original coordinates.
inline SeriesResult theta_geodesic(const BallPoint& z, const HyperbolicDecomposition& dec,
                                   const SeriesParams& params,
                                   const std::vector<AnnotatedElement>& group) {
    if (z.n() != params.n || dec.n != params.n)
        throw std::invalid_argument("theta_geodesic: dimension mismatch");
    if (!detail::contains_identity(group))
        throw std::invalid_argument("theta_geodesic: element set must contain the identity");

    const std::vector<AxisNode> nodes = axis_sample(dec, params.quad_points);
    const LogComplex pref = LogComplex::from_positive(factorial_over_pi_n(params.n))
                                .pow(static_cast<long long>(params.k));
    const long long pk = static_cast<long long>(params.n + 1) * params.k;

    // z is fixed: hoist A z and J(A, z)^k across quadrature nodes.
    struct Hoisted {
        Vector az;
        LogComplex jk;
        int shell;
    };
    std::vector<Hoisted> hoisted;
    hoisted.reserve(group.size());
    for (const AnnotatedElement& e : group)
        hoisted.push_back({detail::mobius_coords(e.g, z.coords()),
                           LogComplex::from(mobius_denominator(e.g, z.coords())).pow(-pk),
                           e.shell});

    std::vector<LogComplex> terms;
    terms.reserve(nodes.size() * group.size());
    detail::ShellTracker shells;
    for (const AxisNode& node : nodes) {
        const BallPoint zeta = mobius_apply(dec.a_gamma, node.point);
        const double factor_log = -0.5 * params.k * bergman_kernel_diag_log(zeta) +
                                  std::log(one_form_weight(params.n, node.u)) +
                                  std::log(node.weight);
        const LogComplex factor = LogComplex::from_log(factor_log, 0.0);
        for (const Hoisted& h : hoisted) {
            const LogComplex t =
                pref * LogComplex::from(-pairing(h.az, zeta.coords())).pow(-pk) * h.jk * factor;
            terms.push_back(t);
            shells.add(h.shell, t);
        }
    }
    const LogComplex c_log = LogComplex::from_log(weight_constant(params.n, params.k).log_value, 0.0);
    const LogComplex total = c_log * log_sum(std::move(terms));
    auto [converged, tail] = shells.finish(total.log_mag - c_log.log_mag, params.tol);
    return {total.value(), total, tail * std::exp(c_log.log_mag), converged, params};
}

struct InnerProductResult {
    SeriesResult total;
    cxd axis_part;      // contribution of elements matching powers of gamma0
    cxd off_axis_part;  // everything else
};

/// (Theta_C, Theta_C) as the double quadrature over the fundamental segment
/// of c(B^n,k) sum_h K(h w, xi)^k J(h, w)^k K(xi,xi)^{-k/2} K(w,w)^{-k/2}
/// phi(xi) phi(w). The element set is understood in the model coordinates
/// (a cyclic range of gamma0, or a word ball conjugated by A_gamma^{-1});
/// contributions split into the axis-stabilizer part and the remainder.
inline InnerProductResult inner_product_geodesic(const HyperbolicDecomposition& dec,
                                                 const SeriesParams& params,
                                                 const std::vector<AnnotatedElement>& group) {
    if (dec.n != params.n)
        throw std::invalid_argument("inner_product_geodesic: dimension mismatch");
    if (!detail::contains_identity(group))
        throw std::invalid_argument("inner_product_geodesic: element set must contain the identity");

    const std::vector<AxisNode> nodes = axis_sample(dec, params.quad_points);
    const LogComplex pref = LogComplex::from_positive(factorial_over_pi_n(params.n))
                                .pow(static_cast<long long>(params.k));
    const long long pk = static_cast<long long>(params.n + 1) * params.k;

    // Mark elements lying in <gamma0>.
    const int match_range = std::max(params.truncation, 24);
    const std::vector<AnnotatedElement> powers =
        cyclic_elements(dec.gamma0, -match_range, match_range);
    std::vector<bool> on_axis(group.size(), false);
    for (std::size_t i = 0; i < group.size(); ++i) {
        const Matrix& m = group[i].g.matrix();
        const double scale = 1.0 + m.cwiseAbs().maxCoeff();
        for (const AnnotatedElement& p : powers) {
            if ((m - p.g.matrix()).cwiseAbs().maxCoeff() <= 1e-6 * scale) {
                on_axis[i] = true;
                break;
            }
        }
    }

    // Per-node positive factors K(.,.)^{-k/2} phi weight.
    std::vector<double> node_factor_log(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        node_factor_log[i] = -0.5 * params.k * bergman_kernel_diag_log(nodes[i].point) +
                             std::log(one_form_weight(params.n, nodes[i].u)) +
                             std::log(nodes[i].weight);

    std::vector<LogComplex> axis_terms, off_terms;
    detail::ShellTracker shells;
    for (std::size_t gi = 0; gi < group.size(); ++gi) {
        const GroupElement& h = group[gi].g;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const Vector hw = detail::mobius_coords(h, nodes[i].point.coords());
            const LogComplex jhk =
                LogComplex::from(mobius_denominator(h, nodes[i].point.coords())).pow(-pk);
            for (std::size_t j = 0; j < nodes.size(); ++j) {
                const LogComplex t =
                    pref * LogComplex::from(-pairing(hw, nodes[j].point.coords())).pow(-pk) *
                    jhk * LogComplex::from_log(node_factor_log[i] + node_factor_log[j], 0.0);
                (on_axis[gi] ? axis_terms : off_terms).push_back(t);
                shells.add(group[gi].shell, t);
            }
        }
    }

    const LogComplex c_log = LogComplex::from_log(weight_constant(params.n, params.k).log_value, 0.0);
    const LogComplex axis_sum = log_sum(axis_terms);
    const LogComplex off_sum = log_sum(off_terms);
    std::vector<LogComplex> all = std::move(axis_terms);
    all.insert(all.end(), off_terms.begin(), off_terms.end());
    const LogComplex total = c_log * log_sum(std::move(all));
    auto [converged, tail] = shells.finish(total.log_mag - c_log.log_mag, params.tol);

    InnerProductResult out{
        {total.value(), total, tail * std::exp(c_log.log_mag), converged, params},
        (c_log * axis_sum).value(),
        (c_log * off_sum).value()};
    return out;
}

struct J2Result {
    double value;
    double rel_error;
};

/// The exact double integral the axis part collapses to:
///   c(B^n,k) (n!/pi^n)^{2/(n+1)}
///     Int_0^{t_max} Int_{-1}^{1} (1-x^2)^{N/2-1} (1-xu)^{-N} dx
///                   (1-u^2)^{N/2-1} du,            N = (n+1)k.
/// The inner integral is evaluated in log space with panels seeded at the
/// peak x = u; the outer integrand is bounded, so ordinary adaptive
/// quadrature applies after exponentiating.
inline J2Result j2_integral(int n, int k, double lambda, double rel_tol = 1e-10) {
    if (n < 1 || k < 2) throw std::invalid_argument("j2_integral: requires n >= 1, k >= 2");
    if (!(lambda * lambda > 1.0))
        throw std::invalid_argument("j2_integral: requires lambda^2 > 1");
    const double nk = static_cast<double>(n + 1) * k;
    const double t_max = (lambda * lambda - 1.0) / (lambda * lambda + 1.0);

    QuadratureSpec inner_spec;
    inner_spec.order = 24;
    inner_spec.rel_tol = std::max(1e-13, 0.05 * rel_tol);
    QuadratureSpec outer_spec;
    outer_spec.order = 24;
    outer_spec.rel_tol = rel_tol;

    auto outer_integrand = [&](double u) {
        auto log_inner = [&](double x) {
            return (0.5 * nk - 1.0) * std::log1p(-x * x) - nk * std::log1p(-x * u);
        };
        const LogQuadratureResult inner =
            integrate_1d_log(log_inner, -1.0, 1.0, inner_spec, u);
        return std::exp(inner.log_value + (0.5 * nk - 1.0) * std::log1p(-u * u));
    };

    const double pref = std::exp(weight_constant(n, k).log_value +
                                 (2.0 / (n + 1)) * std::log(factorial_over_pi_n(n)));
    try {
        const QuadratureResult outer = integrate_1d(outer_integrand, 0.0, t_max, outer_spec);
        const double rel =
            outer.error_estimate / std::max(std::abs(outer.value), 1e-300) + inner_spec.rel_tol;
        return {pref * outer.value, rel};
    } catch (const QuadratureError& e) {
        throw QuadratureError(std::string("j2_integral: ") + e.what(), pref * e.best_value,
                              e.error_estimate);
    }
}

/// Off-axis tail bound: c(B^n,k) const(lambda,n) / (cosh^2(delta0/2))^{(n+1)k/2-(n+1)}.
inline double j1_bound_log(int n, int k, double delta0, double const_lambda_n) {
    if (!(delta0 > 0.0)) throw std::invalid_argument("j1_bound: requires delta0 > 0");
    if (!(const_lambda_n > 0.0)) throw std::invalid_argument("j1_bound: requires const > 0");
    const double log_cosh2 = 2.0 * std::log(std::cosh(0.5 * delta0));
    return weight_constant(n, k).log_value + std::log(const_lambda_n) -
           (0.5 * (n + 1.0) * k - (n + 1.0)) * log_cosh2;
}

inline double j1_bound(int n, int k, double delta0, double const_lambda_n) {
    return std::exp(j1_bound_log(n, k, delta0, const_lambda_n));
}

struct DecayFit {
    double fitted_slope;    // slope in k of log(bound / k^n)
    double analytic_slope;  // -(n+1) ln cosh(delta0/2)
};

/// Exposes the "rapidly decreasing" statement as a check: after removing the
/// polynomial factor, log j1_bound is asymptotically linear in k with slope
/// -(n+1) ln cosh(delta0/2).
inline DecayFit j1_decay_fit(int n, double delta0, double const_lambda_n, int k_min, int k_max,
                             int samples = 10) {
    if (samples < 2 || k_min < 2 || k_max <= k_min)
        throw std::invalid_argument("j1_decay_fit: bad sampling parameters");
    std::vector<double> xs(samples), ys(samples);
    for (int i = 0; i < samples; ++i) {
        const int k = k_min + static_cast<int>(std::llround(
                                  static_cast<double>(i) * (k_max - k_min) / (samples - 1)));
        xs[i] = k;
        ys[i] = j1_bound_log(n, k, delta0, const_lambda_n) - n * std::log(static_cast<double>(k));
    }
    double mx = 0, my = 0;
    for (int i = 0; i < samples; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= samples;
    my /= samples;
    double num = 0, den = 0;
    for (int i = 0; i < samples; ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    return {num / den, -(n + 1.0) * std::log(std::cosh(0.5 * delta0))};
}

/// P_C^{(k)}(z) = sum over coset representatives of
/// (<A z, X><A z, Y>)^{-(n+1)k/2} J(A, z)^k; requires (n+1)k even so the
/// exponent is an integer.
inline SeriesResult relative_poincare(const BallPoint& z, const HyperbolicDecomposition& dec,
                                      const SeriesParams& params,
                                      const std::vector<AnnotatedElement>& coset_reps) {
    if (((params.n + 1) * params.k) % 2 != 0)
        throw std::invalid_argument("relative_poincare: (n+1)k must be even");
    if (z.n() != params.n || dec.n != params.n)
        throw std::invalid_argument("relative_poincare: dimension mismatch");
    if (coset_reps.empty())
        throw std::invalid_argument("relative_poincare: empty representative set");

    const long long half = static_cast<long long>(params.n + 1) * params.k / 2;
    const long long pk = static_cast<long long>(params.n + 1) * params.k;
    std::vector<LogComplex> terms;
    terms.reserve(coset_reps.size());
    detail::ShellTracker shells;
    for (const AnnotatedElement& e : coset_reps) {
        const Vector az = detail::mobius_coords(e.g, z.coords());
        const cxd b = pairing(az, dec.X.coords()) * pairing(az, dec.Y.coords());
        const LogComplex t = LogComplex::from(b).pow(-half) *
                             LogComplex::from(mobius_denominator(e.g, z.coords())).pow(-pk);
        terms.push_back(t);
        shells.add(e.shell, t);
    }
    const LogComplex total = log_sum(std::move(terms));
    auto [converged, tail] = shells.finish(total.log_mag, params.tol);
    return {total.value(), total, tail, converged, params};
}

}  // namespace cxhyp
