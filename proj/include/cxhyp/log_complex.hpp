#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

namespace cxhyp {

using cxd = std::complex<double>;

/// Compensated (Neumaier) accumulator for long sums of doubles.
struct NeumaierSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

/// A nonzero complex number stored as (log of magnitude, argument).
///
/// Integer powers multiply the exponent data directly, so quantities like
/// K(z,w)^k J(A,z)^k with (n+1)k ~ 10^3 never leave the representable range.
/// The argument is kept reduced to (-pi, pi].
struct LogComplex {
    double log_mag = -std::numeric_limits<double>::infinity();
    double arg = 0.0;

    static LogComplex from(cxd z) {
        LogComplex r;
        const double m = std::abs(z);
        r.log_mag = m > 0.0 ? std::log(m) : -std::numeric_limits<double>::infinity();
        r.arg = m > 0.0 ? std::arg(z) : 0.0;
        return r;
    }
    static LogComplex from_log(double log_mag, double arg) {
        LogComplex r;
        r.log_mag = log_mag;
        r.arg = reduce_arg(arg);
        return r;
    }
    /// log-representation of a positive real x.
    static LogComplex from_positive(double x) { return from_log(std::log(x), 0.0); }
    static LogComplex one() { return from_log(0.0, 0.0); }
    static LogComplex zero() { return LogComplex{}; }

    bool is_zero() const { return std::isinf(log_mag) && log_mag < 0; }

    LogComplex operator*(const LogComplex& o) const {
        return from_log(log_mag + o.log_mag, arg + o.arg);
    }
    LogComplex operator/(const LogComplex& o) const {
        return from_log(log_mag - o.log_mag, arg - o.arg);
    }
    /// Integer power; the only power operation the library ever needs on
    /// complex data, so no branch of a multivalued function is ever chosen.
    LogComplex pow(long long m) const {
        if (is_zero()) return *this;
        return from_log(static_cast<double>(m) * log_mag,
                        static_cast<double>(m) * arg);
    }
    cxd value() const {
        if (is_zero()) return {0.0, 0.0};
        const double m = std::exp(log_mag);
        return {m * std::cos(arg), m * std::sin(arg)};
    }

    static double reduce_arg(double a) {
        const double r = std::remainder(a, 2.0 * std::numbers::pi);
        return r;
    }
};

/// Sum of log-represented terms, accumulated smallest-magnitude-first with
/// compensated summation after scaling by the largest magnitude.
inline LogComplex log_sum(std::vector<LogComplex> terms) {
    terms.erase(std::remove_if(terms.begin(), terms.end(),
                               [](const LogComplex& t) { return t.is_zero(); }),
                terms.end());
    if (terms.empty()) return LogComplex::zero();
    std::sort(terms.begin(), terms.end(),
              [](const LogComplex& a, const LogComplex& b) { return a.log_mag < b.log_mag; });
    const double lead = terms.back().log_mag;
    NeumaierSum re, im;
    for (const LogComplex& t : terms) {
        const double m = std::exp(t.log_mag - lead);
        re.add(m * std::cos(t.arg));
        im.add(m * std::sin(t.arg));
    }
    const cxd s{re.value(), im.value()};
    if (s == cxd{0.0, 0.0}) return LogComplex::zero();
    return LogComplex::from_log(lead + std::log(std::abs(s)), std::arg(s));
}

/// log(sum_i exp(a_i)) for real data; -inf inputs are allowed.
inline double log_sum_exp(const std::vector<double>& a) {
    double lead = -std::numeric_limits<double>::infinity();
    for (double x : a) lead = std::max(lead, x);
    if (std::isinf(lead) && lead < 0) return lead;
    NeumaierSum acc;
    for (double x : a) acc.add(std::exp(x - lead));
    return lead + std::log(acc.value());
}

}  // namespace cxhyp
