#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "cxhyp/ball_geometry.hpp"
#include "cxhyp/indefinite_linalg.hpp"
#include "cxhyp/quadrature.hpp"

namespace cxhyp {

enum class ElementClass {
    hyperbolic_real_endpoints,  // real spectrum, one expanding eigenvalue, real fixed points
    hyperbolic,                 // real spectrum, fixed points not real
    loxodromic_nonreal,         // expanding eigenvalue present, spectrum not real
    other,                      // elliptic / parabolic / identity
};

class DecomposeError : public std::runtime_error {
  public:
    explicit DecomposeError(const std::string& what) : std::runtime_error(what) {}
};

/// Normal form: diag(I, B) with B = [[1/(2L)+L/2, L/2-1/(2L)], [L/2-1/(2L), 1/(2L)+L/2]].
/// `signs` supplies the n-1 diagonal entries of I (each +-1, product +1).
inline GroupElement make_gamma0(double lambda, const std::vector<int>& signs) {
    if (lambda == 0.0) throw std::invalid_argument("make_gamma0: lambda must be nonzero");
    const int n = static_cast<int>(signs.size()) + 1;
    int prod = 1;
    for (int s : signs) {
        if (s != 1 && s != -1) throw std::invalid_argument("make_gamma0: signs must be +-1");
        prod *= s;
    }
    if (prod != 1)
        throw std::invalid_argument("make_gamma0: sign block must have determinant 1");
    Matrix m = Matrix::Zero(n + 1, n + 1);
    for (int i = 0; i + 1 < n; ++i) m(i, i) = static_cast<double>(signs[i]);
    const double a = 0.5 / lambda + 0.5 * lambda;
    const double b = 0.5 * lambda - 0.5 / lambda;
    m(n - 1, n - 1) = a;
    m(n - 1, n) = b;
    m(n, n - 1) = b;
    m(n, n) = a;
    // Beyond this scale the cancellation in A^dagger sigma A drowns the
    // membership residual, so the matrix is accepted on construction.
    if (std::abs(lambda) + 1.0 / std::abs(lambda) > 2e3)
        return GroupElement::trusted(std::move(m), 1e-8);
    return GroupElement(std::move(m), 1e-8);
}

/// l(C) = 2 ln|lambda|, cross-checked against cosh(l/2) = (1+lambda^2)/(2|lambda|).
inline double geodesic_length(double lambda) {
    if (!(lambda * lambda > 1.0))
        throw std::invalid_argument("geodesic_length: requires lambda^2 > 1");
    const double l = 2.0 * std::log(std::abs(lambda));
    const double via_cosh = 2.0 * std::acosh((1.0 + lambda * lambda) / (2.0 * std::abs(lambda)));
    if (std::abs(via_cosh - l) > 1e-12 * std::max(1.0, l))
        throw std::runtime_error("geodesic_length: cosh identity check failed");
    return l;
}

/// Eigen-data of a hyperbolic element with real endpoints, the normalizing
/// matrix of the paper construction, and the induced normal form.
struct HyperbolicDecomposition {
    int n = 0;
    double lambda = 0.0;            // expanding eigenvalue, lambda^2 > 1
    BoundaryPoint X;                // attracting fixed point
    BoundaryPoint Y;                // repelling fixed point
    std::vector<Vector> v_list;     // form-orthonormal +-1 eigenvectors, -1 block first
    std::vector<int> unit_signs;    // the +-1 eigenvalues, in v_list order
    GroupElement gamma;             // the element itself
    GroupElement a_gamma;           // maps (0,..,0,+-1) to X, Y and the model axis to the axis
    GroupElement gamma0;            // a_gamma^{-1} gamma a_gamma, in normal form
    double length = 0.0;            // 2 ln|lambda|

    double t_max() const { return (lambda * lambda - 1.0) / (lambda * lambda + 1.0); }
};

namespace detail {

struct SpectrumSplit {
    int big = -1, small = -1;      // indices of |alpha| > 1 and < 1
    std::vector<int> unit;         // remaining indices
    bool all_real = true;
};

inline SpectrumSplit split_spectrum(const std::vector<EigenPair>& pairs) {
    SpectrumSplit s;
    for (int i = 0; i < static_cast<int>(pairs.size()); ++i) {
        const cxd a = pairs[i].value;
        if (std::abs(std::imag(a)) > 1e-8 * (1.0 + std::abs(a))) s.all_real = false;
        const double mod = std::abs(a);
        if (mod > 1.0 + 1e-8) {
            s.big = s.big < 0 ? i : -2;  // -2 marks "more than one"
        } else if (mod < 1.0 - 1e-8) {
            s.small = s.small < 0 ? i : -2;
        } else {
            s.unit.push_back(i);
        }
    }
    return s;
}

inline bool endpoint_is_real(const Vector& eigvec, Vector* out) {
    const Eigen::Index n = eigvec.size() - 1;
    if (std::abs(eigvec(n)) < 1e-10 * eigvec.norm()) return false;
    Vector xi = eigvec / eigvec(n);  // last coordinate exactly 1
    double max_imag = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        max_imag = std::max(max_imag, std::abs(std::imag(xi(i))));
    if (out) *out = xi;
    return max_imag <= 1e-8;
}

}  // namespace detail

inline ElementClass classify(const GroupElement& g) {
    const std::vector<EigenPair> pairs = eigen_decompose(g);
    const detail::SpectrumSplit s = detail::split_spectrum(pairs);
    if (s.big < 0 || s.small < 0) return ElementClass::other;
    if (!s.all_real) return ElementClass::loxodromic_nonreal;
    Vector scratch;
    const bool x_real = detail::endpoint_is_real(pairs[s.big].vector, &scratch);
    const bool y_real = detail::endpoint_is_real(pairs[s.small].vector, &scratch);
    return (x_real && y_real) ? ElementClass::hyperbolic_real_endpoints
                              : ElementClass::hyperbolic;
}

/// Build the full decomposition of a hyperbolic element with real endpoints.
/// The attracting fixed point gets the eigenvalue of modulus > 1 (so an input
/// translating the wrong way is effectively inverted).
inline HyperbolicDecomposition decompose(const GroupElement& g) {
    const int n = g.n();
    const std::vector<EigenPair> pairs = eigen_decompose(g);
    const detail::SpectrumSplit s = detail::split_spectrum(pairs);
    if (s.big < 0 || s.small < 0)
        throw DecomposeError("decompose: element is not loxodromic (no expanding eigenvalue)");
    if (!s.all_real)
        throw DecomposeError("decompose: spectrum is not real to snapping tolerance");

    const cxd alpha = pairs[s.big].value;
    const double lambda = std::real(alpha);

    Vector xi_x, xi_y;
    if (!detail::endpoint_is_real(pairs[s.big].vector, &xi_x) ||
        !detail::endpoint_is_real(pairs[s.small].vector, &xi_y))
        throw DecomposeError("decompose: fixed points are not real");

    const cxd p = minkowski_form(xi_x, xi_y);  // = <X, Y>
    if (std::abs(p) <= 1e-10)
        throw DecomposeError("decompose: <X,Y> vanishes");

    // Unit eigenvectors: snap eigenvalues to +-1, project the vectors
    // form-orthogonally against the null pair, orthonormalize per block.
    std::vector<Vector> minus_block, plus_block;
    for (int idx : s.unit) {
        const cxd a = pairs[idx].value;
        const int sign = std::real(a) >= 0.0 ? 1 : -1;
        if (std::abs(a - static_cast<double>(sign)) > 1e-7)
            throw DecomposeError("decompose: unit eigenvalue is not +-1");
        Vector v = pairs[idx].vector;
        v -= (minkowski_form(v, xi_y) / p) * xi_x;
        v -= (minkowski_form(v, xi_x) / std::conj(p)) * xi_y;
        (sign < 0 ? minus_block : plus_block).push_back(std::move(v));
    }
    std::vector<Vector> v_list;
    std::vector<int> unit_signs;
    for (Vector& v : gram_orthonormalize(minus_block)) {
        v_list.push_back(std::move(v));
        unit_signs.push_back(-1);
    }
    for (Vector& v : gram_orthonormalize(plus_block)) {
        v_list.push_back(std::move(v));
        unit_signs.push_back(1);
    }

    Matrix a_mat(n + 1, n + 1);
    for (int j = 0; j < n - 1; ++j) a_mat.col(j) = v_list[j];
    a_mat.col(n - 1) = xi_x / p + 0.5 * xi_y;
    a_mat.col(n) = xi_x / p - 0.5 * xi_y;

    // The column construction preserves the form but fixes the determinant
    // only up to a unit scalar. Repair it without touching the geometry:
    // rescaling a unit eigenvector (n >= 2), or the whole matrix (n = 1,
    // where scalar conjugation is trivial and J stays real).
    const cxd det = a_mat.determinant();
    if (n >= 2) {
        a_mat.col(0) *= std::conj(det) / std::abs(det);
        v_list[0] = a_mat.col(0);
    } else {
        a_mat *= std::pow(det, -0.5);
    }

    HyperbolicDecomposition dec{
        .n = n,
        .lambda = lambda,
        .X = BoundaryPoint(xi_x.head(n)),
        .Y = BoundaryPoint(xi_y.head(n)),
        .v_list = std::move(v_list),
        .unit_signs = std::move(unit_signs),
        .gamma = g,
        .a_gamma = GroupElement(a_mat, 1e-8),
        .gamma0 = su_identity(n),
        .length = geodesic_length(lambda),
    };
    dec.gamma0 = GroupElement::trusted(
        (dec.a_gamma.inverse() * g * dec.a_gamma).matrix(), 1e-8);

    // The conjugate must reproduce the block form entrywise.
    const Matrix expected = make_gamma0(lambda, dec.unit_signs).matrix();
    const double block_residual =
        (dec.gamma0.matrix() - expected).cwiseAbs().maxCoeff();
    if (block_residual > 1e-8 * (1.0 + std::abs(lambda)))
        throw DecomposeError("decompose: conjugate does not match the normal form (residual " +
                             std::to_string(block_residual) + ")");
    return dec;
}

/// The model geodesic segment [0, t_max] on the last real coordinate axis.
struct AxisSegment {
    int n;
    double t_max;

    BallPoint point_at(double u) const {
        Vector z = Vector::Zero(n);
        z(n - 1) = u;
        return BallPoint(std::move(z));
    }
};

struct AxisNode {
    BallPoint point;  // (0, ..., 0, u)
    double u;
    double weight;    // quadrature weight for integration in du
};

/// Gauss-Legendre nodes on [0, t_max]; orders beyond 64 are tiled into
/// composite panels of order 32.
inline std::vector<AxisNode> axis_sample(int n, double t_max, int m) {
    if (m < 2) throw std::invalid_argument("axis_sample: at least 2 nodes required");
    if (!(t_max > 0.0 && t_max < 1.0))
        throw std::invalid_argument("axis_sample: t_max must lie in (0, 1)");
    const AxisSegment seg{n, t_max};
    std::vector<AxisNode> out;
    const int panels = m <= 64 ? 1 : (m + 31) / 32;
    const int order = m <= 64 ? m : 32;
    const GaussLegendreRule& rule = gauss_legendre(order);
    for (int p = 0; p < panels; ++p) {
        const double a = t_max * p / panels;
        const double b = t_max * (p + 1) / panels;
        for (size_t i = 0; i < rule.nodes.size(); ++i) {
            const double u = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i];
            out.push_back({seg.point_at(u), u, 0.5 * (b - a) * rule.weights[i]});
        }
    }
    return out;
}

inline std::vector<AxisNode> axis_sample(const HyperbolicDecomposition& dec, int m) {
    return axis_sample(dec.n, dec.t_max(), m);
}

/// Density of the invariant 1-form K(z,z)^{1/(n+1)} dz_n on the model axis:
/// (n!/pi^n)^{1/(n+1)} (1-u^2)^{-1}.
inline double one_form_weight(int n, double u) {
    if (!(std::abs(u) < 1.0))
        throw std::invalid_argument("one_form_weight: requires |u| < 1");
    return std::pow(factorial_over_pi_n(n), 1.0 / (n + 1)) / (1.0 - u * u);
}

struct JacobianRealityReport {
    double max_rel_imag_a_gamma;  // max |Im J(A_gamma, xi)| / |J| over the model axis
    double max_rel_imag_gamma;    // max |Im J(gamma, z)| / |J| over the axis of gamma
    bool ok() const { return max_rel_imag_a_gamma <= 1e-9 && max_rel_imag_gamma <= 1e-9; }
};

inline JacobianRealityReport jacobian_reality_check(const HyperbolicDecomposition& dec,
                                                    int samples = 64) {
    if (samples < 1) throw std::invalid_argument("jacobian_reality_check: samples >= 1");
    const AxisSegment seg{dec.n, dec.t_max()};
    JacobianRealityReport rep{0.0, 0.0};
    for (int i = 0; i < samples; ++i) {
        const double u = -1.0 + 2.0 * (i + 0.5) / samples;
        Vector z = Vector::Zero(dec.n);
        z(dec.n - 1) = u;
        const BallPoint xi{z};
        const cxd ja = jacobian(dec.a_gamma, xi);
        rep.max_rel_imag_a_gamma =
            std::max(rep.max_rel_imag_a_gamma, std::abs(std::imag(ja)) / std::abs(ja));
        const BallPoint on_axis = mobius_apply(dec.a_gamma, xi);
        const cxd jg = jacobian(dec.gamma, on_axis);
        rep.max_rel_imag_gamma =
            std::max(rep.max_rel_imag_gamma, std::abs(std::imag(jg)) / std::abs(jg));
    }
    return rep;
}

}  // namespace cxhyp
