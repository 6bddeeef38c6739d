#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cxhyp/log_complex.hpp"

namespace cxhyp {

struct GaussLegendreRule {
    std::vector<double> nodes;    // on (-1, 1), ascending
    std::vector<double> weights;  // positive, sum to 2
};

/// Gauss-Legendre nodes/weights by Newton iteration on P_m, cached per order.
inline const GaussLegendreRule& gauss_legendre(int order) {
    if (order < 2 || order > 64)
        throw std::invalid_argument("gauss_legendre: order must be in [2, 64]");
    static std::map<int, GaussLegendreRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;

    GaussLegendreRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-based initial guess for the i-th root of P_order.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Recurrence for P_order(x) and derivative.
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= order; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[order - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[order - 1 - i] = w;
    }
    auto [pos, inserted] = cache.emplace(order, std::move(rule));
    return pos->second;
}

struct QuadratureSpec {
    int order = 16;
    double rel_tol = 1e-10;
    int max_panels = 20000;
    bool log_space = false;

    void validate() const {
        if (order < 2 || order > 64)
            throw std::invalid_argument("QuadratureSpec: order must be in [2, 64]");
        if (rel_tol < 1e-14)
            throw std::invalid_argument("QuadratureSpec: rel_tol must be >= 1e-14");
    }
};

struct QuadratureResult {
    double value;
    double error_estimate;
};

struct LogQuadratureResult {
    double log_value;
    double rel_error;
};

/// Subdivision cap exceeded; carries the best value obtained so far.
class QuadratureError : public std::runtime_error {
  public:
    QuadratureError(const std::string& what, double best, double err)
        : std::runtime_error(what), best_value(best), error_estimate(err) {}
    double best_value;
    double error_estimate;
};

namespace detail {

template <class F>
double gl_panel(F&& f, double a, double b, const GaussLegendreRule& rule) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    NeumaierSum s;
    for (size_t i = 0; i < rule.nodes.size(); ++i)
        s.add(rule.weights[i] * f(mid + half * rule.nodes[i]));
    return half * s.value();
}

// log of the panel integral of exp(g).
template <class F>
double gl_panel_log(F&& g, double a, double b, const GaussLegendreRule& rule) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    std::vector<double> terms(rule.nodes.size());
    for (size_t i = 0; i < rule.nodes.size(); ++i)
        terms[i] = g(mid + half * rule.nodes[i]) + std::log(rule.weights[i] * half);
    return log_sum_exp(terms);
}

}  // namespace detail

/// Adaptive Gauss-Legendre on [a, b]. Each panel is accepted once bisecting
/// it changes the panel value by less than rel_tol (relative to the panel).
template <class F>
QuadratureResult integrate_1d(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
    spec.validate();
    if (!(a < b)) throw std::invalid_argument("integrate_1d: requires a < b");
    const GaussLegendreRule& rule = gauss_legendre(spec.order);

    struct Panel {
        double a, b, value;
        int depth;
    };
    std::vector<Panel> stack{{a, b, detail::gl_panel(f, a, b, rule), 0}};
    NeumaierSum total;
    NeumaierSum err;
    int panels = 1;
    while (!stack.empty()) {
        Panel p = stack.back();
        stack.pop_back();
        const double mid = 0.5 * (p.a + p.b);
        const double left = detail::gl_panel(f, p.a, mid, rule);
        const double right = detail::gl_panel(f, mid, p.b, rule);
        const double refined = left + right;
        const double diff = std::abs(refined - p.value);
        const double scale = std::abs(left) + std::abs(right) + 1e-300;
        if (diff <= spec.rel_tol * scale || p.depth >= 48) {
            total.add(refined);
            err.add(diff);
            continue;
        }
        panels += 2;
        if (panels > spec.max_panels) {
            double best = total.value() + refined;
            for (const Panel& q : stack) best += q.value;
            throw QuadratureError("integrate_1d: subdivision cap exceeded", best,
                                  err.value() + diff);
        }
        stack.push_back({p.a, mid, left, p.depth + 1});
        stack.push_back({mid, p.b, right, p.depth + 1});
    }
    return {total.value(), err.value()};
}

/// Adaptive quadrature of exp(g) on [a, b], carried out entirely in log space
/// (panel sums via log-sum-exp). Intended for positive integrands whose
/// values overflow/underflow double precision, e.g. (1-x^2)^{(n+1)k/2-1}.
/// An optional interior peak location seeds the initial panel split.
template <class F>
LogQuadratureResult integrate_1d_log(F&& g, double a, double b, const QuadratureSpec& spec = {},
                                     std::optional<double> peak = std::nullopt) {
    spec.validate();
    if (!(a < b)) throw std::invalid_argument("integrate_1d_log: requires a < b");
    const GaussLegendreRule& rule = gauss_legendre(spec.order);

    struct Panel {
        double a, b, log_value;
        int depth;
    };
    std::vector<Panel> stack;
    double best_seen = -std::numeric_limits<double>::infinity();
    auto push_initial = [&](double lo, double hi) {
        const double v = detail::gl_panel_log(g, lo, hi, rule);
        best_seen = std::max(best_seen, v);
        stack.push_back({lo, hi, v, 0});
    };
    if (peak && *peak > a && *peak < b) {
        push_initial(a, *peak);
        push_initial(*peak, b);
    } else {
        push_initial(a, b);
    }

    std::vector<double> accepted;
    double rel_err = 0.0;
    int panels = static_cast<int>(stack.size());
    while (!stack.empty()) {
        Panel p = stack.back();
        stack.pop_back();
        const double mid = 0.5 * (p.a + p.b);
        const double left = detail::gl_panel_log(g, p.a, mid, rule);
        const double right = detail::gl_panel_log(g, mid, p.b, rule);
        const double refined = log_sum_exp({left, right});
        best_seen = std::max(best_seen, refined);
        // |exp(d) - 1| ~ |d| measures relative disagreement of the two levels.
        const double d = std::abs(refined - p.log_value);
        // A panel far below the dominant contribution can be accepted as-is:
        // even an O(1) relative misestimate of it is invisible in the total.
        const double cutoff =
            best_seen + std::log(spec.rel_tol) - std::log(10.0 * spec.max_panels);
        if (d <= spec.rel_tol || refined <= cutoff || p.depth >= 48 ||
            (std::isinf(refined) && refined < 0)) {
            accepted.push_back(refined);
            rel_err += std::min(d, std::exp(refined - best_seen));
            continue;
        }
        panels += 2;
        if (panels > spec.max_panels) {
            accepted.push_back(refined);
            for (const Panel& q : stack) accepted.push_back(q.log_value);
            throw QuadratureError("integrate_1d_log: subdivision cap exceeded",
                                  log_sum_exp(accepted), rel_err + d);
        }
        stack.push_back({p.a, mid, left, p.depth + 1});
        stack.push_back({mid, p.b, right, p.depth + 1});
    }
    return {log_sum_exp(accepted), rel_err};
}

/// Tensor-product integral of f(x, y) over [ax,bx] x [ay,by] by nesting the
/// adaptive 1-d rule. When peak_hint is set, the inner (x) panels are
/// recentered at the hinted peak x = peak_hint(y).
template <class F>
QuadratureResult integrate_2d_product(F&& f, double ax, double bx, double ay, double by,
                                      const QuadratureSpec& spec = {},
                                      std::function<double(double)> peak_hint = {}) {
    spec.validate();
    QuadratureSpec inner = spec;
    inner.rel_tol = std::max(1e-14, 0.1 * spec.rel_tol);
    double inner_err = 0.0;
    auto outer = [&](double y) {
        auto fx = [&](double x) { return f(x, y); };
        if (peak_hint) {
            const double p = peak_hint(y);
            if (p > ax && p < bx) {
                const QuadratureResult lo = integrate_1d(fx, ax, p, inner);
                const QuadratureResult hi = integrate_1d(fx, p, bx, inner);
                inner_err = std::max(inner_err, lo.error_estimate + hi.error_estimate);
                return lo.value + hi.value;
            }
        }
        const QuadratureResult r = integrate_1d(fx, ax, bx, inner);
        inner_err = std::max(inner_err, r.error_estimate);
        return r.value;
    };
    const QuadratureResult r = integrate_1d(outer, ay, by, spec);
    return {r.value, r.error_estimate + inner_err * (by - ay)};
}

}  // namespace cxhyp
