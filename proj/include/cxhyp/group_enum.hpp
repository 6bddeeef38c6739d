#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "cxhyp/ball_geometry.hpp"
#include "cxhyp/geodesic_normal_form.hpp"
#include "cxhyp/indefinite_linalg.hpp"

namespace cxhyp {

/// Element of a truncated group set, annotated with the truncation shell it
/// belongs to (word length, or |m| for cyclic ranges).
struct AnnotatedElement {
    GroupElement g;
    int shell;
    bool eigenbasis_form = false;
};

namespace detail {

inline double pow_by_squaring(double base, int e) {
    double acc = 1.0, b = base;
    int m = e < 0 ? -e : e;
    while (m > 0) {
        if (m & 1) acc *= b;
        b *= b;
        m >>= 1;
    }
    return e < 0 ? 1.0 / acc : acc;
}

struct NormalFormData {
    double lambda;
    std::vector<int> signs;
};

inline NormalFormData read_normal_form(const GroupElement& gamma0) {
    const Matrix& m = gamma0.matrix();
    const int n = gamma0.n();
    NormalFormData nf;
    nf.lambda = std::real(m(n - 1, n - 1) + m(n, n - 1));  // a + b = lambda
    nf.signs.resize(n - 1);
    for (int i = 0; i + 1 < n; ++i)
        nf.signs[i] = std::real(m(i, i)) >= 0.0 ? 1 : -1;
    const Matrix expected = make_gamma0(nf.lambda, nf.signs).matrix();
    if ((m - expected).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + std::abs(nf.lambda)))
        throw std::invalid_argument("cyclic_elements: gamma0 is not in normal form");
    return nf;
}

}  // namespace detail

/// Powers gamma0^m for m in [m_min, m_max] of a normal-form element; the
/// power acts on the blocks, so gamma0^m = normal form with lambda^m.
/// Elements whose entries outgrow the range where the floating membership
/// residual is meaningful are flagged eigenbasis_form and accepted untested.
inline std::vector<AnnotatedElement> cyclic_elements(const GroupElement& gamma0, int m_min,
                                                     int m_max) {
    if (m_min > m_max) throw std::invalid_argument("cyclic_elements: empty power range");
    const detail::NormalFormData nf = detail::read_normal_form(gamma0);
    std::vector<AnnotatedElement> out;
    out.reserve(m_max - m_min + 1);
    for (int m = m_min; m <= m_max; ++m) {
        const double lm = detail::pow_by_squaring(nf.lambda, m);
        std::vector<int> signs(nf.signs.size());
        for (size_t i = 0; i < signs.size(); ++i)
            signs[i] = (m % 2 == 0) ? 1 : nf.signs[i];
        const bool big = std::abs(lm) + 1.0 / std::abs(lm) > 2e3;
        out.push_back({make_gamma0(lm, signs), std::abs(m), big});
    }
    return out;
}

struct GroupBall {
    std::vector<AnnotatedElement> elements;
    int max_word_length = 0;
    std::size_t count() const { return elements.size(); }
};

class WordBallError : public std::runtime_error {
  public:
    WordBallError(const std::string& what, std::size_t count, int level)
        : std::runtime_error(what), count(count), level(level) {}
    std::size_t count;
    int level;
};

namespace detail {

// Dedup store ordered by the real part of the (0,0) entry: matrices within
// 1e-8 in max-norm are within 1e-8 in the key, so a window scan is sound
// (a quantized hash can miss pairs that straddle a cell boundary).
class ElementDedup {
  public:
    explicit ElementDedup(double tol = 1e-8) : tol_(tol) {}

    bool contains(const Matrix& m) const {
        const double key = std::real(m(0, 0));
        auto lo = index_.lower_bound(key - 1.5 * tol_);
        auto hi = index_.upper_bound(key + 1.5 * tol_);
        for (auto it = lo; it != hi; ++it)
            if ((m - it->second).cwiseAbs().maxCoeff() <= tol_) return true;
        return false;
    }
    void insert(const Matrix& m) { index_.emplace(std::real(m(0, 0)), m); }

  private:
    double tol_;
    std::multimap<double, Matrix> index_;
};

}  // namespace detail

/// All distinct products of at most L generators/inverses, annotated with
/// the (minimal) word length they were first reached at.
inline GroupBall word_ball(const std::vector<GroupElement>& generators, int L,
                           std::size_t cap = 200000) {
    if (L < 0) throw std::invalid_argument("word_ball: L must be >= 0");
    if (L > 12) throw std::invalid_argument("word_ball: L > 12 exceeds the desk-scale guard");
    if (generators.empty() && L > 0)
        throw std::invalid_argument("word_ball: no generators");

    std::vector<GroupElement> letters;
    for (const GroupElement& g : generators) {
        letters.push_back(g);
        letters.push_back(g.inverse());
    }

    GroupBall ball;
    const int n = generators.empty() ? 1 : generators.front().n();
    ball.elements.push_back({su_identity(n), 0, false});
    ball.max_word_length = L;

    detail::ElementDedup seen;
    seen.insert(ball.elements.front().g.matrix());
    std::vector<std::size_t> frontier{0};
    for (int level = 1; level <= L; ++level) {
        std::vector<std::size_t> next;
        for (std::size_t idx : frontier) {
            const GroupElement base = ball.elements[idx].g;
            for (const GroupElement& s : letters) {
                GroupElement prod = base * s;
                if (seen.contains(prod.matrix())) continue;
                if (ball.elements.size() >= cap) {
                    std::ostringstream os;
                    os << "word_ball: element cap " << cap << " exceeded at word length "
                       << level << " with " << ball.elements.size() << " elements";
                    throw WordBallError(os.str(), ball.elements.size(), level);
                }
                ball.elements.push_back({std::move(prod), level, false});
                seen.insert(ball.elements.back().g.matrix());
                next.push_back(ball.elements.size() - 1);
            }
        }
        frontier = std::move(next);
    }
    return ball;
}

/// Genus-2 surface group of the regular hyperbolic octagon, as matrices in
/// SU(1,1). The four side-pairing boosts translate by 2 arccosh(1+sqrt 2)
/// along axes through the origin at angles j pi/4; the returned generators
/// a1, b1, a2, b2 satisfy the single relation [a1,b1][a2,b2] = 1.
/// Returns {a1, b1, a2, b2, a1^-1, b1^-1, a2^-1, b2^-1}.
inline std::array<GroupElement, 8> octagon_group() {
    const double ch = 1.0 + std::sqrt(2.0);
    const double sh = std::sqrt(ch * ch - 1.0);
    auto boost = [&](int j) {
        const cxd ph = std::polar(1.0, j * std::numbers::pi / 4.0);
        Matrix m(2, 2);
        m << ch, sh * ph, sh * std::conj(ph), ch;
        return GroupElement(m, 1e-9);
    };
    const GroupElement g0 = boost(0), g1 = boost(1), g2 = boost(2), g3 = boost(3);
    // Change of generators turning the octagon side-pairing relation
    // g0 g1^-1 g2 g3^-1 g0^-1 g1 g2^-1 g3 into the commutator form.
    auto reval = [](const GroupElement& g) { return GroupElement(g.matrix(), 1e-9); };
    const GroupElement a1 = g0;
    const GroupElement b1 = reval(g1.inverse() * g2 * g3.inverse());
    const GroupElement a2 = reval(g1.inverse() * g2);
    const GroupElement b2 = reval(g3.inverse() * g1);
    return {a1,           b1,           a2,           b2,
            a1.inverse(), b1.inverse(), a2.inverse(), b2.inverse()};
}

struct Displacement {
    double delta0;        // min over h, w, xi of dist(h w, xi)
    double w_at, xi_at;   // minimizing axis coordinates
    std::size_t h_index;  // index into the supplied element list
};

namespace detail {

template <class F>
double golden_minimize(F&& f, double a, double b, int iters = 60) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters && (b - a) > 1e-12; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

/// Minimum hyperbolic displacement between images h w of the fundamental
/// axis segment and the segment itself, over the supplied elements with the
/// axis stabilizer filtered out. Coarse grid scan, then local refinement.
inline Displacement min_displacement_off_axis(const std::vector<GroupElement>& elements,
                                              int n, double t_max,
                                              const std::vector<GroupElement>& exclude,
                                              int grid = 64) {
    if (grid < 2) throw std::invalid_argument("min_displacement_off_axis: grid too coarse");
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < elements.size(); ++i) {
        bool excluded = false;
        for (const GroupElement& e : exclude) {
            if (e.matrix().rows() != elements[i].matrix().rows()) continue;
            if ((elements[i].matrix() - e.matrix()).cwiseAbs().maxCoeff() <= 1e-8) {
                excluded = true;
                break;
            }
        }
        if (!excluded) keep.push_back(i);
    }
    if (keep.empty())
        throw std::invalid_argument("min_displacement_off_axis: no elements left after filtering");

    const AxisSegment seg{n, t_max};
    auto dist_at = [&](const GroupElement& h, double w, double xi) {
        return distance(mobius_apply(h, seg.point_at(w)), seg.point_at(xi));
    };

    Displacement best{std::numeric_limits<double>::infinity(), 0.0, 0.0, 0};
    for (std::size_t ki = 0; ki < keep.size(); ++ki) {
        const GroupElement& h = elements[keep[ki]];
        for (int i = 0; i <= grid; ++i) {
            const double w = t_max * i / grid;
            const BallPoint hw = mobius_apply(h, seg.point_at(w));
            for (int j = 0; j <= grid; ++j) {
                const double xi = t_max * j / grid;
                const double d = distance(hw, seg.point_at(xi));
                if (d < best.delta0) best = {d, w, xi, ki};
            }
        }
    }

    // Alternating 1-d golden-section refinement around the grid minimizer.
    const GroupElement& h = elements[keep[best.h_index]];
    const double cell = t_max / grid;
    for (int round = 0; round < 8; ++round) {
        best.w_at = detail::golden_minimize(
            [&](double w) { return dist_at(h, w, best.xi_at); },
            std::max(0.0, best.w_at - cell), std::min(t_max, best.w_at + cell));
        best.xi_at = detail::golden_minimize(
            [&](double xi) { return dist_at(h, best.w_at, xi); },
            std::max(0.0, best.xi_at - cell), std::min(t_max, best.xi_at + cell));
    }
    best.delta0 = dist_at(h, best.w_at, best.xi_at);
    best.h_index = keep[best.h_index];
    return best;
}

}  // namespace cxhyp
