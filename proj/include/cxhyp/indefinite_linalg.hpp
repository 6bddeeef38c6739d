#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "cxhyp/log_complex.hpp"

namespace cxhyp {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// The signature-(n,1) form data: sigma = diag(1,...,1,-1) of size n+1.
struct SigmaForm {
    int n;
    int dim() const { return n + 1; }
    Eigen::MatrixXd matrix() const {
        Eigen::MatrixXd s = Eigen::MatrixXd::Identity(n + 1, n + 1);
        s(n, n) = -1.0;
        return s;
    }
};

/// <<u, v>> = u_1 conj(v_1) + ... + u_n conj(v_n) - u_{n+1} conj(v_{n+1}).
inline cxd minkowski_form(const Vector& u, const Vector& v) {
    if (u.size() != v.size() || u.size() < 2)
        throw std::invalid_argument("minkowski_form: dimension mismatch");
    const Eigen::Index n = u.size() - 1;
    cxd s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += u(i) * std::conj(v(i));
    s -= u(n) * std::conj(v(n));
    return s;
}

struct SuResiduals {
    double form;  // max-norm of A^dagger sigma A - sigma
    double det;   // |det A - 1|
};

inline SuResiduals su_residuals(const Matrix& a) {
    if (a.rows() != a.cols() || a.rows() < 2)
        throw std::invalid_argument("su_residuals: matrix must be square of size >= 2");
    const Eigen::Index d = a.rows();
    // form residual: A^dagger sigma A - sigma, with sigma = diag(1,..,1,-1)
    Matrix sa = a;
    sa.row(d - 1) *= -1.0;
    Matrix r = a.adjoint() * sa;
    r(d - 1, d - 1) += 1.0;
    for (Eigen::Index i = 0; i + 1 < d; ++i) r(i, i) -= 1.0;
    const double form = r.cwiseAbs().maxCoeff();
    const double det = std::abs(a.determinant() - cxd(1.0, 0.0));
    return {form, det};
}

inline bool validate_su(const Matrix& a, double tol, SuResiduals* out = nullptr) {
    if (tol <= 0.0) throw std::invalid_argument("validate_su: tol must be positive");
    const SuResiduals r = su_residuals(a);
    if (out) *out = r;
    return r.form <= tol && r.det <= tol;
}

/// A validated element of SU(n,1). The stored tolerance is the membership
/// tolerance the matrix was accepted at; products accumulate it linearly.
class GroupElement {
  public:
    explicit GroupElement(Matrix m, double tol = 1e-10) : m_(std::move(m)), tol_(tol) {
        SuResiduals r{};
        if (!validate_su(m_, tol_, &r)) {
            std::ostringstream os;
            os << "GroupElement: not in SU(n,1) at tol " << tol_ << " (form residual "
               << r.form << ", det residual " << r.det << ")";
            throw std::invalid_argument(os.str());
        }
    }

    /// Accept without the membership check. Reserved for elements whose
    /// entries are too large for the floating residual to be meaningful
    /// (normal-form powers with lambda^|m| beyond the validation range).
    static GroupElement trusted(Matrix m, double tol) {
        GroupElement g;
        g.m_ = std::move(m);
        g.tol_ = tol;
        return g;
    }

    const Matrix& matrix() const { return m_; }
    int n() const { return static_cast<int>(m_.rows()) - 1; }
    double tol() const { return tol_; }

    /// sigma A^dagger sigma; exact inverse for form-preserving A.
    GroupElement inverse() const {
        const Eigen::Index d = m_.rows();
        Matrix inv = m_.adjoint();
        inv.row(d - 1) *= -1.0;
        inv.col(d - 1) *= -1.0;
        return trusted(std::move(inv), tol_);
    }

    GroupElement operator*(const GroupElement& o) const {
        return trusted(m_ * o.m_, tol_ + o.tol_ + 64 * 2.2e-16);
    }

  private:
    GroupElement() = default;
    Matrix m_;
    double tol_ = 0.0;
};

inline GroupElement su_identity(int n) {
    return GroupElement(Matrix::Identity(n + 1, n + 1));
}

/// Matrix exponential by scaling-and-squaring with a Taylor series; entries
/// here are always modest (Lie-algebra data with norm of order 1).
inline Matrix matrix_exp(const Matrix& s) {
    const double norm = s.cwiseAbs().maxCoeff() * s.rows();
    int squarings = 0;
    double scale = 1.0;
    while (norm * scale > 0.25) {
        scale *= 0.5;
        ++squarings;
    }
    const Matrix t = s * scale;
    Matrix term = Matrix::Identity(s.rows(), s.cols());
    Matrix sum = term;
    for (int j = 1; j <= 40; ++j) {
        term = (term * t) / static_cast<double>(j);
        sum += term;
        if (term.cwiseAbs().maxCoeff() < 1e-20) break;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * sum;
    return sum;
}

namespace detail {

// Uniform double in [-1, 1), bit-reproducible across platforms.
inline double signed_unit(std::mt19937_64& rng) {
    return 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;
}

}  // namespace detail

/// exp(S) for a pseudorandom S in su(n,1): S^dagger sigma + sigma S = 0,
/// trace 0, free entries bounded by `scale`. Deterministic per seed.
inline GroupElement random_su(std::uint64_t seed, double scale, int n) {
    if (scale < 0.0) throw std::invalid_argument("random_su: scale must be >= 0");
    std::mt19937_64 rng(seed);
    const int d = n + 1;
    Matrix s = Matrix::Zero(d, d);
    // Anti-Hermitian upper-left block.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const cxd v(detail::signed_unit(rng) * scale, detail::signed_unit(rng) * scale);
            s(i, j) = v;
            s(j, i) = -std::conj(v);
        }
    // Imaginary diagonal with zero total trace (shared with the corner).
    std::vector<double> th(d);
    double mean = 0.0;
    for (int i = 0; i < d; ++i) {
        th[i] = detail::signed_unit(rng) * 0.5 * scale;
        mean += th[i];
    }
    mean /= d;
    for (int i = 0; i < n; ++i) s(i, i) = cxd(0.0, th[i] - mean);
    s(n, n) = cxd(0.0, th[n] - mean);
    // Mixed block: last column q, last row q^dagger.
    for (int i = 0; i < n; ++i) {
        const cxd q(detail::signed_unit(rng) * scale, detail::signed_unit(rng) * scale);
        s(i, n) = q;
        s(n, i) = std::conj(q);
    }
    return GroupElement(matrix_exp(s), 1e-10);
}

/// Real variant: exp(S) with S real in su(n,1), so the resulting element has
/// real entries and maps real points to real points.
inline GroupElement random_su_real(std::uint64_t seed, double scale, int n) {
    if (scale < 0.0) throw std::invalid_argument("random_su_real: scale must be >= 0");
    std::mt19937_64 rng(seed);
    const int d = n + 1;
    Matrix s = Matrix::Zero(d, d);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = detail::signed_unit(rng) * scale;
            s(i, j) = v;
            s(j, i) = -v;
        }
    for (int i = 0; i < n; ++i) {
        const double q = detail::signed_unit(rng) * scale;
        s(i, n) = q;
        s(n, i) = q;
    }
    return GroupElement(matrix_exp(s), 1e-10);
}

struct EigenPair {
    cxd value;
    Vector vector;  // Euclidean-normalized
};

class EigenSolveError : public std::runtime_error {
  public:
    EigenSolveError(const std::string& what, int iterations, double residual)
        : std::runtime_error(what), iterations(iterations), residual(residual) {}
    int iterations;
    double residual;
};

/// Dense eigendecomposition: Schur iteration (Hessenberg reduction + shifted
/// QR, via Eigen's ComplexEigenSolver) followed by an inverse-iteration
/// refinement pass with Rayleigh-quotient updates.
inline std::vector<EigenPair> eigen_decompose(const GroupElement& g, double eigen_tol = 1e-10) {
    const Matrix& a = g.matrix();
    const Eigen::Index d = a.rows();
    Eigen::ComplexEigenSolver<Matrix> solver(a, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success)
        throw EigenSolveError("eigen_decompose: QR iteration failed to converge", 0, 0.0);

    std::vector<EigenPair> out(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        cxd alpha = solver.eigenvalues()(i);
        Vector v = solver.eigenvectors().col(i);
        v.normalize();
        double res = (a * v - alpha * v).norm();
        int iters = 0;
        while (res > 0.01 * eigen_tol && iters < 8) {
            // Slightly detuned shift keeps the solve well posed when alpha is
            // (numerically) an exact eigenvalue.
            const cxd shift = alpha * (1.0 + 1e-13) + cxd(1e-14, 0.0);
            Matrix shifted = a - shift * Matrix::Identity(d, d);
            Vector y = shifted.partialPivLu().solve(v);
            const double yn = y.norm();
            if (!std::isfinite(yn) || yn == 0.0) break;
            v = y / yn;
            alpha = (v.adjoint() * a * v)(0, 0);  // Rayleigh quotient
            res = (a * v - alpha * v).norm();
            ++iters;
        }
        if (res > eigen_tol)
            throw EigenSolveError("eigen_decompose: refinement stalled", iters, res);
        out[i] = {alpha, v};
    }
    return out;
}

/// Gram-Schmidt with respect to <<.,.>> on a subspace where the form is
/// positive definite. Output satisfies <<w_i, w_j>> = delta_ij.
inline std::vector<Vector> gram_orthonormalize(const std::vector<Vector>& vs, double tol = 1e-10) {
    std::vector<Vector> out;
    out.reserve(vs.size());
    for (Vector v : vs) {
        for (int pass = 0; pass < 2; ++pass)
            for (const Vector& w : out) v -= minkowski_form(v, w) * w;
        const double nu = std::real(minkowski_form(v, v));
        if (nu <= tol)
            throw std::invalid_argument(
                "gram_orthonormalize: form not positive definite on the span (pivot <= tol)");
        out.push_back(v / std::sqrt(nu));
    }
    return out;
}

}  // namespace cxhyp
