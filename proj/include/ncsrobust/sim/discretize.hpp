#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include <string>

#include "ncsrobust/errors.hpp"
#include "ncsrobust/lti.hpp"

namespace ncsrobust::sim {

enum class Method { zoh, tustin };

[[nodiscard]] inline std::string to_string(Method m) { return m == Method::zoh ? "zoh" : "tustin"; }

[[nodiscard]] inline Method parse_method(const std::string& s) {
    if (s == "zoh") {
        return Method::zoh;
    }
    if (s == "tustin") {
        return Method::tustin;
    }
    throw InputError("unknown discretization method '" + s + "' (expected zoh or tustin)");
}

/// Discrete-time realization x+ = A x + B u, y = C x + D u with step h.
[[nodiscard]] inline StateSpace discretize(const StateSpace& sys, double h, Method method = Method::zoh) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw InputError("step size must be positive");
    }
    const auto n = sys.states();
    const auto m = sys.inputs();
    if (n == 0) {
        return sys;
    }
    if (method == Method::zoh) {
        Matrix aug = Matrix::Zero(n + m, n + m);
        aug.topLeftCorner(n, n) = sys.a() * h;
        aug.topRightCorner(n, m) = sys.b() * h;
        const Matrix e = aug.exp();
        return {e.topLeftCorner(n, n), e.topRightCorner(n, m), sys.c(), sys.d()};
    }
    // Bilinear map s = (2/h)(z - 1)/(z + 1).
    const Matrix eye = Matrix::Identity(n, n);
    const auto lu = (eye - 0.5 * h * sys.a()).partialPivLu();
    const Matrix ad = lu.solve(eye + 0.5 * h * sys.a());
    const Matrix bd = lu.solve(sys.b()) * h;
    const Matrix cd = sys.c() * lu.solve(eye);
    const Matrix dd = sys.d() + 0.5 * sys.c() * lu.solve(sys.b()) * h;
    return {ad, bd, cd, dd};
}

/// Discrete DC gain C (I - A)^{-1} B + D.
[[nodiscard]] inline Matrix discrete_dc_gain(const StateSpace& sys) {
    const auto n = sys.states();
    if (n == 0) {
        return sys.d();
    }
    return sys.c() * (Matrix::Identity(n, n) - sys.a()).partialPivLu().solve(sys.b()) + sys.d();
}

} // namespace ncsrobust::sim
