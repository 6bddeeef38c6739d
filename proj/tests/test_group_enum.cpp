#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "cxhyp/group_enum.hpp"

using namespace cxhyp;
using Catch::Approx;

namespace {

bool same_matrix(const Matrix& a, const Matrix& b, double tol = 1e-8) {
    return (a - b).cwiseAbs().maxCoeff() <= tol;
}

// Independent brute-force dedup used as the word-ball oracle.
std::vector<Matrix> naive_products(const std::vector<GroupElement>& gens, int L) {
    std::vector<Matrix> letters;
    for (const GroupElement& g : gens) {
        letters.push_back(g.matrix());
        letters.push_back(g.inverse().matrix());
    }
    const Eigen::Index d = letters.front().rows();
    std::vector<Matrix> all{Matrix::Identity(d, d)};
    std::vector<Matrix> frontier = all;
    for (int level = 1; level <= L; ++level) {
        std::vector<Matrix> next;
        for (const Matrix& m : frontier)
            for (const Matrix& s : letters) {
                Matrix p = m * s;
                bool dup = false;
                for (const Matrix& q : all)
                    if (same_matrix(p, q)) {
                        dup = true;
                        break;
                    }
                for (const Matrix& q : next)
                    if (same_matrix(p, q)) {
                        dup = true;
                        break;
                    }
                if (!dup) next.push_back(std::move(p));
            }
        all.insert(all.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    return all;
}

}  // namespace

TEST_CASE("cyclic powers of a normal form") {
    const GroupElement g0 = make_gamma0(2.0, {});

    SECTION("m = 0 is the identity, m = 1 the element itself") {
        const auto elems = cyclic_elements(g0, 0, 1);
        REQUIRE(elems.size() == 2);
        REQUIRE(same_matrix(elems[0].g.matrix(), Matrix::Identity(2, 2)));
        REQUIRE(same_matrix(elems[1].g.matrix(), g0.matrix()));
        REQUIRE(elems[0].shell == 0);
        REQUIRE(elems[1].shell == 1);
    }

    SECTION("m = 2 is the normal form with lambda replaced by 4") {
        const auto elems = cyclic_elements(g0, 2, 2);
        REQUIRE(same_matrix(elems[0].g.matrix(), make_gamma0(4.0, {}).matrix(), 1e-12));
    }

    SECTION("powers match repeated multiplication and pass validation") {
        const auto elems = cyclic_elements(g0, -4, 4);
        GroupElement acc = su_identity(1);
        for (int m = 0; m <= 4; ++m) {
            REQUIRE(same_matrix(elems[4 + m].g.matrix(), acc.matrix(), 1e-10));
            REQUIRE(validate_su(elems[4 + m].g.matrix(), 1e-8));
            acc = acc * g0;
        }
        // negative powers are the inverses
        REQUIRE(same_matrix(elems[3].g.matrix(), g0.inverse().matrix(), 1e-12));
    }

    SECTION("sign block powers alternate (n = 3 with a -1,-1 block)") {
        const GroupElement nf = make_gamma0(2.0, {-1, -1});
        const auto elems = cyclic_elements(nf, 2, 3);
        REQUIRE(same_matrix(elems[0].g.matrix(), make_gamma0(4.0, {1, 1}).matrix(), 1e-12));
        REQUIRE(same_matrix(elems[1].g.matrix(), make_gamma0(8.0, {-1, -1}).matrix(), 1e-12));
    }

    SECTION("large powers are flagged as eigenbasis-represented") {
        const auto elems = cyclic_elements(g0, 40, 44);
        for (const auto& e : elems) REQUIRE(e.eigenbasis_form);
    }

    SECTION("empty range and malformed input are rejected") {
        REQUIRE_THROWS_AS(cyclic_elements(g0, 3, 2), std::invalid_argument);
        REQUIRE_THROWS_AS(cyclic_elements(random_su(1, 0.5, 1), 0, 1), std::invalid_argument);
    }
}

TEST_CASE("word balls") {
    SECTION("L = 0 is just the identity") {
        const GroupBall ball = word_ball({make_gamma0(2.0, {})}, 0);
        REQUIRE(ball.count() == 1);
        REQUIRE(ball.elements[0].shell == 0);
    }

    SECTION("single generator gives the cyclic ball {g^m : |m| <= L}") {
        const GroupElement g0 = make_gamma0(2.0, {});
        const GroupBall ball = word_ball({g0}, 3);
        REQUIRE(ball.count() == 7);
        const auto powers = cyclic_elements(g0, -3, 3);
        for (const auto& p : powers) {
            bool found = false;
            for (const auto& e : ball.elements)
                if (same_matrix(e.g.matrix(), p.g.matrix())) {
                    found = true;
                    REQUIRE(e.shell == p.shell);  // BFS levels = |m|
                    break;
                }
            REQUIRE(found);
        }
    }

    SECTION("octagon ball L = 2 matches the brute-force oracle") {
        const auto oct = octagon_group();
        const std::vector<GroupElement> gens{oct[0], oct[1], oct[2], oct[3]};
        const GroupBall ball = word_ball(gens, 2);
        const auto oracle = naive_products(gens, 2);
        REQUIRE(ball.count() == oracle.size());
    }

    SECTION("word balls are nested and dedup is sound") {
        const auto oct = octagon_group();
        const std::vector<GroupElement> gens{oct[0], oct[1], oct[2], oct[3]};
        const GroupBall small = word_ball(gens, 2);
        const GroupBall large = word_ball(gens, 3);
        REQUIRE(small.count() < large.count());
        for (const auto& e : small.elements) {
            std::size_t hits = 0;
            for (const auto& f : large.elements)
                if (same_matrix(e.g.matrix(), f.g.matrix())) ++hits;
            REQUIRE(hits == 1);
        }
        // no two distinct stored elements are closer than the dedup tolerance
        for (std::size_t i = 0; i < small.count(); ++i)
            for (std::size_t j = i + 1; j < small.count(); ++j)
                REQUIRE((small.elements[i].g.matrix() - small.elements[j].g.matrix())
                            .cwiseAbs()
                            .maxCoeff() > 1e-8);
        // membership tolerance grows at most linearly in word length
        for (const auto& e : large.elements)
            REQUIRE(validate_su(e.g.matrix(), 1e-9 * (1.0 + e.shell)));
    }

    SECTION("guards") {
        REQUIRE_THROWS_AS(word_ball({make_gamma0(2.0, {})}, 13), std::invalid_argument);
        REQUIRE_THROWS_AS(word_ball({octagon_group()[0]}, 5, 8), WordBallError);
    }
}

TEST_CASE("octagon surface group") {
    const auto oct = octagon_group();

    SECTION("all eight elements are members at 1e-9") {
        for (const GroupElement& g : oct) REQUIRE(validate_su(g.matrix(), 1e-9));
    }

    SECTION("the defining relation [a1,b1][a2,b2] = 1 holds to 1e-7") {
        auto comm = [](const GroupElement& x, const GroupElement& y) {
            return x * y * x.inverse() * y.inverse();
        };
        const Matrix rel = (comm(oct[0], oct[1]) * comm(oct[2], oct[3])).matrix();
        REQUIRE((rel - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-7);
    }

    SECTION("every generator is loxodromic with real spectrum off the unit circle") {
        for (int i = 0; i < 4; ++i) {
            const auto pairs = eigen_decompose(oct[i]);
            double big = 0.0;
            for (const auto& p : pairs) {
                REQUIRE(std::abs(std::imag(p.value)) < 1e-9 * (1.0 + std::abs(p.value)));
                big = std::max(big, std::abs(p.value));
            }
            REQUIRE(big > 1.0 + 1e-6);
        }
    }

    SECTION("identity is not among the generators") {
        for (const GroupElement& g : oct)
            REQUIRE((g.matrix() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() > 1e-3);
    }
}

namespace {

// Boost of translation length 2q along the diameter at angle theta; its axis
// misses the model segment except at the origin.
GroupElement rotated_boost(double q, double theta) {
    Matrix m(2, 2);
    m << std::cosh(q), std::sinh(q) * std::polar(1.0, theta),
        std::sinh(q) * std::polar(1.0, -theta), std::cosh(q);
    return GroupElement(m, 1e-12);
}

}  // namespace

TEST_CASE("minimum off-axis displacement") {
    const GroupElement g0 = make_gamma0(2.0, {});
    const double t_max = 0.6;

    SECTION("single off-axis element matches a brute-force scan with golden refinement") {
        const GroupElement h = rotated_boost(0.8, 0.7);
        REQUIRE((h.matrix() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() > 1e-2);
        const Displacement d =
            min_displacement_off_axis({h}, 1, t_max, {su_identity(1)}, 64);
        REQUIRE(d.delta0 > 0.0);

        // Oracle: dense 2-d scan plus a fine local grid.
        const AxisSegment seg{1, t_max};
        double best = 1e100, bw = 0, bxi = 0;
        const int N = 160;
        for (int i = 0; i <= N; ++i)
            for (int j = 0; j <= N; ++j) {
                const double w = t_max * i / N, xi = t_max * j / N;
                const double v = distance(mobius_apply(h, seg.point_at(w)), seg.point_at(xi));
                if (v < best) {
                    best = v;
                    bw = w;
                    bxi = xi;
                }
            }
        for (int r = 0; r < 3; ++r) {
            const double cell = t_max / N / std::pow(8.0, r);
            double lb = best;
            for (int i = -20; i <= 20; ++i)
                for (int j = -20; j <= 20; ++j) {
                    const double w = std::clamp(bw + cell * i / 20.0, 0.0, t_max);
                    const double xi = std::clamp(bxi + cell * j / 20.0, 0.0, t_max);
                    const double v =
                        distance(mobius_apply(h, seg.point_at(w)), seg.point_at(xi));
                    if (v < lb) {
                        lb = v;
                        bw = w;
                        bxi = xi;
                    }
                }
            best = lb;
        }
        REQUIRE(d.delta0 == Approx(best).margin(1e-6));
    }

    SECTION("axis powers are removed by the exclusion list") {
        const auto powers = cyclic_elements(g0, -3, 3);
        std::vector<GroupElement> elems;
        for (const auto& p : powers) elems.push_back(p.g);
        elems.push_back(rotated_boost(0.9, 1.1));
        std::vector<GroupElement> exclude;
        for (const auto& p : powers) exclude.push_back(p.g);
        const Displacement d = min_displacement_off_axis(elems, 1, t_max, exclude, 48);
        REQUIRE(d.h_index == elems.size() - 1);
        REQUIRE(d.delta0 > 0.0);

        // With everything excluded the call must fail.
        exclude.push_back(elems.back());
        REQUIRE_THROWS_AS(min_displacement_off_axis(elems, 1, t_max, exclude, 16),
                          std::invalid_argument);
    }

    SECTION("delta0 shrinks (weakly) as elements are added") {
        const GroupElement h1 = rotated_boost(1.4, 0.9);
        const GroupElement h2 = rotated_boost(0.5, 2.0);
        const std::vector<GroupElement> none{su_identity(1)};
        const double d1 = min_displacement_off_axis({h1}, 1, t_max, none, 32).delta0;
        const double d12 = min_displacement_off_axis({h1, h2}, 1, t_max, none, 32).delta0;
        REQUIRE(d12 <= d1 + 1e-12);
    }
}
