#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cxhyp/ball_geometry.hpp"
#include "cxhyp/geodesic_normal_form.hpp"
#include "cxhyp/group_enum.hpp"
#include "cxhyp/series_inner_products.hpp"

namespace cxhyp {

using json = nlohmann::json;

// Matrices travel as {"n": int, "entries": [[re, im], ...]} row-major.

inline json matrix_to_json(const Matrix& m) {
    json entries = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            entries.push_back({m(i, j).real(), m(i, j).imag()});
    return {{"n", static_cast<int>(m.rows()) - 1}, {"entries", entries}};
}

inline Matrix matrix_from_json(const json& j) {
    const int n = j.at("n").get<int>();
    if (n < 1) throw std::invalid_argument("matrix_from_json: n must be >= 1");
    const auto& entries = j.at("entries");
    const int d = n + 1;
    if (static_cast<int>(entries.size()) != d * d)
        throw std::invalid_argument("matrix_from_json: expected (n+1)^2 entries");
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int jj = 0; jj < d; ++jj) {
            const auto& e = entries.at(i * d + jj);
            m(i, jj) = cxd(e.at(0).get<double>(), e.at(1).get<double>());
        }
    return m;
}

inline json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back({v(i).real(), v(i).imag()});
    return out;
}

inline Vector vector_from_json(const json& j) {
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = cxd(j.at(i).at(0).get<double>(), j.at(i).at(1).get<double>());
    return v;
}

inline json decomposition_to_json(const HyperbolicDecomposition& dec) {
    json v_list = json::array();
    for (const Vector& v : dec.v_list) v_list.push_back(vector_to_json(v));
    return {{"n", dec.n},
            {"lambda", dec.lambda},
            {"length", dec.length},
            {"t_max", dec.t_max()},
            {"X", vector_to_json(dec.X.coords())},
            {"Y", vector_to_json(dec.Y.coords())},
            {"v_list", v_list},
            {"A_gamma", matrix_to_json(dec.a_gamma.matrix())},
            {"gamma0", matrix_to_json(dec.gamma0.matrix())},
            // Primitivity of the element cannot be checked without the full
            // group; it is carried as a caller assertion.
            {"primitive_assumed", true}};
}

inline json series_params_to_json(const SeriesParams& p) {
    return {{"n", p.n},
            {"k", p.k},
            {"truncation", p.truncation},
            {"quad_points", p.quad_points},
            {"tol", p.tol}};
}

inline json series_result_to_json(const SeriesResult& r) {
    return {{"value", {r.value.real(), r.value.imag()}},
            {"log_value", {{"log_mag", r.log_value.log_mag}, {"arg", r.log_value.arg}}},
            {"abs_tail_estimate", r.abs_tail_estimate},
            {"converged", r.converged},
            {"params", series_params_to_json(r.params)}};
}

inline json group_ball_to_json(const GroupBall& ball) {
    json elems = json::array();
    for (const AnnotatedElement& e : ball.elements)
        elems.push_back({{"word_length", e.shell},
                         {"matrix", matrix_to_json(e.g.matrix())}});
    return {{"max_word_length", ball.max_word_length},
            {"count", ball.count()},
            {"elements", elems}};
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

/// Generator file: {"n": int, "generators": [matrix-json, ...]}.
inline std::vector<GroupElement> generators_from_json(const json& j, double tol = 1e-8) {
    std::vector<GroupElement> out;
    for (const auto& g : j.at("generators"))
        out.emplace_back(matrix_from_json(g), tol);
    if (out.empty()) throw std::invalid_argument("generators_from_json: empty generator list");
    return out;
}

}  // namespace cxhyp
