#pragma once

// JSON descriptors for LTI systems:
//   {"num": [...], "den": [...]}                       transfer function, descending powers
//   {"A": [[...]], "B": [[...]], "C": [[...]], "D": [[...]]}   state space

#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "ncsrobust/errors.hpp"
#include "ncsrobust/lti.hpp"

namespace ncsrobust {

using json = nlohmann::json;

[[nodiscard]] inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open '" + path + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("'" + path + "' is not valid JSON: " + e.what());
    }
}

namespace detail {

[[nodiscard]] inline std::vector<double> number_list(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) {
        throw InputError(what + " must be a nonempty array of numbers");
    }
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) {
            throw InputError(what + " must contain only numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

[[nodiscard]] inline Matrix matrix_from(const json& j, const std::string& what) {
    if (!j.is_array()) {
        throw InputError(what + " must be an array of rows");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0) {
        return Matrix(0, 0);
    }
    Eigen::Index cols = -1;
    Matrix m;
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto row = j[static_cast<std::size_t>(i)].is_array() ? j[static_cast<std::size_t>(i)] : json::array();
        if (cols < 0) {
            cols = static_cast<Eigen::Index>(row.size());
            m.resize(rows, cols);
        }
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw InputError(what + " rows must have equal length");
        }
        for (Eigen::Index k = 0; k < cols; ++k) {
            if (!row[static_cast<std::size_t>(k)].is_number()) {
                throw InputError(what + " entries must be numbers");
            }
            m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
        }
    }
    return m;
}

[[nodiscard]] inline json matrix_to(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            row.push_back(m(i, k));
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace detail

[[nodiscard]] inline StateSpace parse_system(const json& j, const std::string& what = "system") {
    if (!j.is_object()) {
        throw InputError(what + " must be an object with num/den or A/B/C/D");
    }
    if (j.contains("num") || j.contains("den")) {
        if (!j.contains("num") || !j.contains("den")) {
            throw InputError(what + " needs both num and den");
        }
        return tf_to_ss(RationalTransfer(detail::number_list(j.at("num"), what + ".num"),
                                         detail::number_list(j.at("den"), what + ".den")));
    }
    if (j.contains("D")) {
        const Matrix d = detail::matrix_from(j.at("D"), what + ".D");
        const Matrix a = j.contains("A") ? detail::matrix_from(j.at("A"), what + ".A") : Matrix(0, 0);
        const auto n = a.rows();
        const Matrix b = j.contains("B") && n > 0 ? detail::matrix_from(j.at("B"), what + ".B") : Matrix(n, d.cols());
        const Matrix c = j.contains("C") && n > 0 ? detail::matrix_from(j.at("C"), what + ".C") : Matrix(d.rows(), n);
        return {a, b, c, d};
    }
    throw InputError(what + " must be given as {num, den} or {A, B, C, D}");
}

[[nodiscard]] inline json system_to_json(const StateSpace& s) {
    return {{"A", detail::matrix_to(s.a())},
            {"B", detail::matrix_to(s.b())},
            {"C", detail::matrix_to(s.c())},
            {"D", detail::matrix_to(s.d())}};
}

/// A system file may hold the descriptor directly or under a "system" key.
[[nodiscard]] inline StateSpace load_system_file(const std::string& path) {
    const json j = load_json_file(path);
    return parse_system(j.contains("system") ? j.at("system") : j, path);
}

} // namespace ncsrobust
