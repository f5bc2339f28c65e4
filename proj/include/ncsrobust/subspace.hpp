#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ncsrobust/errors.hpp"
#include "ncsrobust/lti.hpp"

namespace ncsrobust {

/// Orthonormal basis for the column span of x; the columns must be linearly independent.
[[nodiscard]] inline Matrix orthonormal_basis(const Matrix& x) {
    if (x.cols() == 0 || x.rows() == 0) {
        throw InputError("basis must have at least one nonzero column");
    }
    Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    if (sv(0) == 0.0 || sv(sv.size() - 1) <= 1e-10 * sv(0) || x.cols() > x.rows()) {
        throw InputError("rank-deficient basis: columns are not linearly independent");
    }
    return svd.matrixU();
}

/// Principal angles between span(x) and span(y), ascending.
[[nodiscard]] inline std::vector<double> principal_angles(const Matrix& x, const Matrix& y) {
    if (x.rows() != y.rows()) {
        throw InputError("principal angles need bases in the same ambient space");
    }
    const Matrix qx = orthonormal_basis(x);
    const Matrix qy = orthonormal_basis(y);
    Eigen::JacobiSVD<Matrix> svd(qx.transpose() * qy);
    std::vector<double> out;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
        out.push_back(std::acos(std::clamp(svd.singularValues()(i), 0.0, 1.0)));
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace ncsrobust
