#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include "cxhyp/asymptotics.hpp"
#include "cxhyp/series_inner_products.hpp"

using namespace cxhyp;
using Catch::Approx;

namespace {

BallPoint ball1(cxd z) {
    Vector v(1);
    v(0) = z;
    return BallPoint(v);
}

// Oracle: plain adaptive Simpson, independent of the library quadrature.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int depth = 0) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double left = (m - a) / 6.0 * (fa + 4.0 * f(lm) + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * f(rm) + fb);
    if (depth > 40 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, 0.5 * tol, depth + 1) +
           adaptive_simpson(f, m, b, 0.5 * tol, depth + 1);
}

std::vector<AnnotatedElement> identity_only(int n) {
    return {{su_identity(n), 0, false}};
}

}  // namespace

TEST_CASE("series parameter validation") {
    REQUIRE_THROWS_AS(SeriesParams(1, 1, 0), std::invalid_argument);
    const SeriesParams p(1, 40, 6);
    REQUIRE(p.quad_points >= static_cast<int>(std::ceil(8.0 * std::sqrt(80.0))));
}

TEST_CASE("theta at a point") {
    SECTION("identity-only set gives c(B^n,k) K(z,w)^k; frozen value 5/pi^3") {
        const SeriesParams p(1, 3, 0);
        const SeriesResult r = theta_point(ball1(0.0), ball1(0.0), p, identity_only(1));
        REQUIRE(std::abs(r.value - cxd(0.16125767216599746, 0.0)) < 1e-15);
        REQUIRE(r.converged);
        REQUIRE(std::abs(r.log_value.value() - r.value) <= 1e-14 * std::abs(r.value));
    }

    SECTION("general single-term value matches the direct kernel formula") {
        const SeriesParams p(2, 5, 0);
        Vector zv(2), wv(2);
        zv << cxd(0.1, 0.2), cxd(-0.3, 0.1);
        wv << cxd(0.0, -0.4), cxd(0.2, 0.0);
        const BallPoint z{zv}, w{wv};
        const SeriesResult r = theta_point(w, z, p, identity_only(2));
        const cxd direct = weight_constant(2, 5).value * std::pow(bergman_kernel(z, w), 5);
        REQUIRE(std::abs(r.value - direct) <= 1e-12 * std::abs(direct));
    }

    SECTION("equivariance under group members") {
        const GroupElement g0 = make_gamma0(2.0, {});
        const auto group = cyclic_elements(g0, -8, 8);
        const SeriesParams p(1, 6, 8);
        const BallPoint z = ball1(cxd(0.15, -0.22));
        const BallPoint w = ball1(cxd(-0.2, 0.3));
        const SeriesResult base = theta_point(w, z, p, group);
        for (int hm : {1, -2}) {
            const GroupElement h = cyclic_elements(g0, hm, hm)[0].g;
            const BallPoint hw = mobius_apply(h, w);
            const cxd jh = jacobian(h, w.coords());
            const SeriesResult moved = theta_point(hw, z, p, group);
            const cxd lhs = moved.value * std::pow(std::conj(jh), 6);
            REQUIRE(std::abs(lhs - base.value) <= 1e-10 * std::abs(base.value));
        }
    }

    SECTION("cyclic truncations converge and report a small tail") {
        const GroupElement g0 = make_gamma0(2.0, {});
        const SeriesParams p(1, 6, 6, 0, 1e-9);
        const BallPoint z = ball1(cxd(0.1, 0.05));
        const SeriesResult r = theta_point(z, z, p, cyclic_elements(g0, -6, 6));
        REQUIRE(r.converged);
        REQUIRE(r.abs_tail_estimate <= 1e-9 * std::abs(r.value));
    }

    SECTION("requires the identity in the element set") {
        const auto group = cyclic_elements(make_gamma0(2.0, {}), 1, 3);
        REQUIRE_THROWS_AS(theta_point(ball1(0.0), ball1(0.0), SeriesParams(1, 4, 3), group),
                          std::invalid_argument);
    }
}

TEST_CASE("theta along the geodesic") {
    const HyperbolicDecomposition dec = decompose(make_gamma0(2.0, {}));

    SECTION("identity-only set at z=0, k=4: closed form and Simpson oracle") {
        const SeriesParams p(1, 4, 0);
        const SeriesResult r = theta_geodesic(ball1(0.0), dec, p, identity_only(1));

        // K(0, xi) = 1/pi is constant, so the integrand collapses to
        // c pi^{-5/2} (1-u^2)^3 with the closed antiderivative below.
        const double t = 0.6;
        const double closed = 7.0 * std::pow(std::numbers::pi, -2.5) *
                              (t - t * t * t + 3.0 * std::pow(t, 5) / 5.0 - std::pow(t, 7) / 7.0);
        REQUIRE(std::abs(r.value - cxd(closed, 0.0)) <= 1e-12 * closed);

        const double oracle = adaptive_simpson(
            [&](double u) {
                const BallPoint xi = AxisSegment{1, dec.t_max()}.point_at(u);
                const BallPoint zeta = mobius_apply(dec.a_gamma, xi);
                const double theta =
                    7.0 * std::real(std::pow(bergman_kernel(ball1(0.0), zeta), 4));
                return theta * std::exp(-2.0 * bergman_kernel_diag_log(zeta)) *
                       one_form_weight(1, u);
            },
            1e-12, dec.t_max() - 1e-12, 1e-14);
        REQUIRE(std::abs(r.value - cxd(oracle, 0.0)) <= 1e-9 * std::abs(oracle));
    }

    SECTION("doubling the node count moves the value by < 1e-9 relative") {
        const auto group = cyclic_elements(make_gamma0(2.0, {}), -4, 4);
        const BallPoint z = ball1(cxd(0.2, 0.1));
        const SeriesResult a = theta_geodesic(z, dec, SeriesParams(1, 4, 4, 40), group);
        const SeriesResult b = theta_geodesic(z, dec, SeriesParams(1, 4, 4, 80), group);
        REQUIRE(std::abs(a.value - b.value) <= 1e-9 * std::abs(b.value));
    }

    SECTION("automorphy error decreases with the cyclic truncation") {
        const GroupElement g0 = make_gamma0(2.0, {});
        const BallPoint z = ball1(cxd(0.18, 0.07));
        const BallPoint g0z = mobius_apply(g0, z);
        const cxd jk = std::pow(jacobian(g0, z.coords()), 4);
        double prev = -1.0;
        for (int M : {1, 3, 6}) {
            const SeriesParams p(1, 4, M, 64);
            const auto group = cyclic_elements(g0, -M, M);
            const cxd at_z = theta_geodesic(z, dec, p, group).value;
            const cxd moved = theta_geodesic(g0z, dec, p, group).value * jk;
            const double err = std::abs(moved - at_z) / std::abs(at_z);
            if (prev >= 0.0) REQUIRE(err < prev);
            prev = err;
        }
        REQUIRE(prev <= 1e-8);
    }
}

TEST_CASE("inner product along the geodesic") {
    const HyperbolicDecomposition dec = decompose(make_gamma0(2.0, {}));

    SECTION("identity-only term is strictly positive real") {
        const InnerProductResult r =
            inner_product_geodesic(dec, SeriesParams(1, 8, 0), identity_only(1));
        REQUIRE(std::real(r.total.value) > 0.0);
        REQUIRE(std::abs(std::imag(r.total.value)) <= 1e-12 * std::abs(r.total.value));
        REQUIRE(r.off_axis_part == cxd(0.0, 0.0));
    }

    SECTION("cyclic sums converge to the collapsed double integral") {
        // Frozen reference for (n=1, k=40, lambda=2), from an independent
        // high-accuracy evaluation of the double integral.
        const double j2_ref = 4.900097880546141;
        double prev_gap = 1e100;
        for (int M : {1, 3, 6}) {
            const SeriesParams p(1, 40, M);
            const auto group = cyclic_elements(make_gamma0(2.0, {}), -M, M);
            const InnerProductResult r = inner_product_geodesic(dec, p, group);
            const double gap = std::abs(std::real(r.total.value) - j2_ref) / j2_ref;
            REQUIRE(gap < prev_gap + 1e-14);
            prev_gap = gap;
        }
        REQUIRE(prev_gap <= 1e-8);

        const J2Result direct = j2_integral(1, 40, 2.0);
        REQUIRE(direct.value == Approx(j2_ref).epsilon(1e-9));
    }

    SECTION("imaginary residue stays below 1e-10 relative") {
        const SeriesParams p(1, 12, 4);
        const auto group = cyclic_elements(make_gamma0(2.0, {}), -4, 4);
        const InnerProductResult r = inner_product_geodesic(dec, p, group);
        REQUIRE(std::abs(std::imag(r.total.value)) <= 1e-10 * std::abs(r.total.value));
        REQUIRE(std::real(r.total.value) > 0.0);
    }

    SECTION("axis/off-axis split is consistent") {
        auto group = cyclic_elements(make_gamma0(2.0, {}), -2, 2);
        Matrix m(2, 2);
        m << std::cosh(0.9), std::sinh(0.9) * std::polar(1.0, 0.8),
            std::sinh(0.9) * std::polar(1.0, -0.8), std::cosh(0.9);
        group.push_back({GroupElement(m, 1e-12), 3, false});
        const SeriesParams p(1, 10, 3);
        const InnerProductResult r = inner_product_geodesic(dec, p, group);
        REQUIRE(std::abs(r.axis_part + r.off_axis_part - r.total.value) <=
                1e-12 * std::abs(r.total.value));
        REQUIRE(std::abs(r.off_axis_part) > 0.0);
        REQUIRE(std::abs(r.off_axis_part) < 1e-3 * std::abs(r.axis_part));
    }
}

TEST_CASE("the collapsed double integral j2") {
    SECTION("frozen value at (n=1, k=100, lambda=2) and asymptote ratio window") {
        const J2Result r = j2_integral(1, 100, 2.0);
        REQUIRE(r.value == Approx(7.791955559823563).epsilon(1e-9));
        const double ratio = r.value / j2_asymptote(1, 100, 2.0);
        REQUIRE(ratio > 0.99);
        REQUIRE(ratio < 1.01);
    }

    SECTION("the integrand peaks at x = u") {
        const double u = 0.3, nk = 80.0;
        auto logf = [&](double x) {
            return (0.5 * nk - 1.0) * std::log1p(-x * x) - nk * std::log1p(-x * u);
        };
        const double at_peak = logf(u);
        for (int i = 1; i < 100; ++i) {
            const double x = -1.0 + 2.0 * i / 100.0;
            REQUIRE(logf(x) <= at_peak + 1e-12);
        }
    }

    SECTION("value collapses as lambda -> 1+") {
        const double tiny = j2_integral(1, 20, 1.0 + 1e-7).value;
        REQUIRE(tiny >= 0.0);
        REQUIRE(tiny < 1e-4);
    }

    SECTION("preconditions") {
        REQUIRE_THROWS_AS(j2_integral(1, 20, 0.9), std::invalid_argument);
        REQUIRE_THROWS_AS(j2_integral(1, 1, 2.0), std::invalid_argument);
    }
}

TEST_CASE("the off-axis tail bound j1") {
    SECTION("k-scaling matches the closed form") {
        const double c2 = std::pow(std::cosh(0.5), 2.0);  // delta0 = 1
        const double lhs = j1_bound(1, 100, 1.0, 1.0) / j1_bound(1, 50, 1.0, 1.0);
        const double rhs = (weight_constant(1, 100).value / weight_constant(1, 50).value) *
                           std::pow(c2, -50.0);
        REQUIRE(lhs == Approx(rhs).epsilon(1e-12));
    }

    SECTION("monotone decreasing in delta0") {
        double prev = 1e300;
        for (double d0 : {0.5, 1.0, 1.5, 2.5}) {
            const double b = j1_bound(1, 60, d0, 1.0);
            REQUIRE(b < prev);
            prev = b;
        }
    }

    SECTION("fitted log-slope matches the analytic slope to 1%") {
        for (double d0 : {1.0, 2.45}) {
            const DecayFit fit = j1_decay_fit(1, d0, 3.7, 1000, 10000, 10);
            REQUIRE(std::abs(fit.fitted_slope / fit.analytic_slope - 1.0) <= 0.01);
        }
    }

    SECTION("preconditions") {
        REQUIRE_THROWS_AS(j1_bound(1, 50, 0.0, 1.0), std::invalid_argument);
        REQUIRE_THROWS_AS(j1_bound(1, 50, -1.0, 1.0), std::invalid_argument);
    }
}

TEST_CASE("relative Poincare series") {
    const HyperbolicDecomposition dec = decompose(make_gamma0(2.0, {}));

    SECTION("theta_C / P_C is constant over sample points (n=1, k even)") {
        const int k = 8, M = 8;
        const auto group = cyclic_elements(make_gamma0(2.0, {}), -M, M);
        const SeriesParams p(1, k, M, 96, 1e-10);
        const std::vector<cxd> zs{cxd(0.0, 0.0),   cxd(0.1, 0.0),   cxd(0.2, 0.1),
                                  cxd(-0.3, 0.0),  cxd(0.0, 0.25),  cxd(0.4, -0.2),
                                  cxd(0.5, 0.0),   cxd(-0.2, -0.4), cxd(0.35, 0.35),
                                  cxd(-0.45, 0.1)};
        cxd first;
        for (std::size_t i = 0; i < zs.size(); ++i) {
            const BallPoint z = ball1(zs[i]);
            const cxd theta = theta_geodesic(z, dec, p, group).value;
            const cxd poincare = relative_poincare(z, dec, p, identity_only(1)).value;
            const cxd ratio = theta / poincare;
            if (i == 0)
                first = ratio;
            else
                REQUIRE(std::abs(ratio - first) <= 1e-7 * std::abs(first));
        }
    }

    SECTION("single representative on the axis is real") {
        const SeriesParams p(1, 8, 0);
        const SeriesResult r =
            relative_poincare(ball1(cxd(0.37, 0.0)), dec, p, identity_only(1));
        REQUIRE(std::abs(std::imag(r.value)) <= 1e-13 * std::abs(r.value));
    }

    SECTION("magnitude grows toward the attracting endpoint") {
        const SeriesParams p(1, 8, 0);
        double prev = 0.0;
        for (double t : {0.5, 0.7, 0.9}) {
            const double mag =
                std::abs(relative_poincare(ball1(cxd(t, 0.0)), dec, p, identity_only(1)).value);
            REQUIRE(mag > prev);
            prev = mag;
        }
    }

    SECTION("odd (n+1)k is rejected") {
        const HyperbolicDecomposition dec2 = decompose(make_gamma0(2.0, {1}));
        REQUIRE_THROWS_AS(
            relative_poincare(BallPoint(Vector::Zero(2)), dec2, SeriesParams(2, 3, 0),
                              identity_only(2)),
            std::invalid_argument);
    }
}
