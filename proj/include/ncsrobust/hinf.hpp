#pragma once

// H-infinity norm of stable LTI systems and the closed-loop stability margin
// ||P#C||^{-1}.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ncsrobust/errors.hpp"
#include "ncsrobust/frequency_sweep.hpp"
#include "ncsrobust/lti.hpp"

namespace ncsrobust {

enum class NormMethod { bisection, grid };

[[nodiscard]] inline std::string to_string(NormMethod m) { return m == NormMethod::bisection ? "bisection" : "grid"; }

struct NormResult {
    double value = 0.0;
    double peak_omega = 0.0; ///< +infinity when the supremum is the feedthrough
    NormMethod method = NormMethod::bisection;
    double lower = 0.0; ///< certified interval
    double upper = 0.0;
};

struct MarginResult {
    double norm = 1.0;
    double margin = 1.0;
    double arcsin_margin = 0.0;
    double peak_omega = 0.0;
    NormMethod method = NormMethod::bisection;
};

namespace detail {

/// Frequencies (>= 0) at which gamma is a singular value of G(jw): the
/// imaginary-axis eigenvalues of the associated Hamiltonian matrix.
[[nodiscard]] inline std::vector<double> hamiltonian_crossings(const StateSpace& g, double gamma) {
    const auto n = g.states();
    const auto m = g.inputs();
    const auto p = g.outputs();
    const Matrix& a = g.a();
    const Matrix& b = g.b();
    const Matrix& c = g.c();
    const Matrix& d = g.d();
    const double g2 = gamma * gamma;

    const Matrix r_inv = (d.transpose() * d - g2 * Matrix::Identity(m, m)).partialPivLu().inverse();
    const Matrix s_inv = (d * d.transpose() - g2 * Matrix::Identity(p, p)).partialPivLu().inverse();

    Matrix h(2 * n, 2 * n);
    h.topLeftCorner(n, n) = a - b * r_inv * d.transpose() * c;
    h.topRightCorner(n, n) = -gamma * b * r_inv * b.transpose();
    h.bottomLeftCorner(n, n) = gamma * c.transpose() * s_inv * c;
    h.bottomRightCorner(n, n) = -a.transpose() + c.transpose() * d * r_inv * b.transpose();

    Eigen::EigenSolver<Matrix> es(h, false);
    if (es.info() != Eigen::Success) {
        throw NumericalError("Hamiltonian eigenvalue iteration failed");
    }
    std::vector<double> out;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const Complex lam = es.eigenvalues()(i);
        if (std::abs(lam.real()) <= 1e-8 * (1.0 + std::abs(lam)) && lam.imag() >= 0.0) {
            out.push_back(lam.imag());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

template <class F>
[[nodiscard]] std::pair<double, double> golden_max(F&& f, double a, double b) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 200 && (b - a) > 1e-13 * std::max(1.0, std::abs(b)); ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    return f1 > f2 ? std::pair{f1, x1} : std::pair{f2, x2};
}

} // namespace detail

/// H-infinity norm by bisection on the Hamiltonian imaginary-eigenvalue test.
///
/// The bracket starts at [grid max, 2 * grid max] and is bisected until its
/// width is below tol * value. The reported value is the singular-value peak
/// located between the last crossing frequencies, clamped into the certified
/// interval. If the eigen-test disagrees with a level the grid has already
/// exhibited, the refined grid supremum is returned and the method is
/// flagged as grid.
[[nodiscard]] inline NormResult hinf_norm(const StateSpace& sys, double tol = 1e-8) {
    if (!(tol > 0.0)) {
        throw InputError("H-infinity tolerance must be positive");
    }
    const StateSpace g = minimal_realization(sys);
    if (!is_hurwitz(g)) {
        throw DomainError("norm infinite; G is not in RH-infinity (pole with Re >= 0)");
    }
    const double inf = std::numeric_limits<double>::infinity();
    const double dnorm = sigma_max(g.d());
    if (g.states() == 0) {
        return {dnorm, inf, NormMethod::bisection, dnorm, dnorm};
    }

    const FrequencyResponse fr(g);
    const auto sv = [&fr](double w) { return sigma_max(fr.at_omega(w)); };

    const PeakSearch sweep = refine_peak(sv, FrequencyGrid::standard());
    double lo = sweep.value;
    double peak = sweep.omega;
    if (const double dc = sv(0.0); dc >= lo) {
        lo = dc;
        peak = 0.0;
    }
    if (dnorm >= lo * (1.0 - 1e-9)) {
        lo = std::max(lo, dnorm);
        peak = inf;
    }
    if (lo == 0.0) {
        return {0.0, 0.0, NormMethod::bisection, 0.0, 0.0};
    }

    const auto grid_fallback = [&] { return NormResult{lo, peak, NormMethod::grid, lo, lo}; };

    std::vector<double> last;
    if (std::isfinite(peak)) {
        last = detail::hamiltonian_crossings(g, lo * (1.0 - 1e-6));
        if (last.empty()) {
            return grid_fallback();
        }
    }
    double hi = 2.0 * lo;
    for (int guard = 0;; ++guard) {
        auto crossings = detail::hamiltonian_crossings(g, hi);
        if (crossings.empty()) {
            break;
        }
        if (guard > 60) {
            return grid_fallback();
        }
        lo = hi;
        last = std::move(crossings);
        hi *= 2.0;
    }
    while (hi - lo > tol * lo) {
        const double mid = 0.5 * (lo + hi);
        auto crossings = detail::hamiltonian_crossings(g, mid);
        if (!crossings.empty()) {
            lo = mid;
            last = std::move(crossings);
        } else {
            hi = mid;
        }
    }

    // The peak lies where sigma_max exceeds lo, i.e. between crossing frequencies.
    double value = 0.5 * (lo + hi);
    if (!last.empty()) {
        last.insert(last.begin(), 0.0);
        double best = -inf;
        double best_w = peak;
        for (std::size_t i = 0; i + 1 < last.size(); ++i) {
            const auto [v, w] = detail::golden_max(sv, last[i], last[i + 1]);
            if (v > best) {
                best = v;
                best_w = w;
            }
        }
        for (double w : last) {
            if (const double v = sv(w); v > best) {
                best = v;
                best_w = w;
            }
        }
        if (best >= lo) {
            value = std::min(best, hi);
            peak = best_w;
        }
    }
    return {value, peak, NormMethod::bisection, lo, hi};
}

/// ||P#C||_inf^{-1} together with its arcsine.
[[nodiscard]] inline MarginResult stability_margin(const StateSpace& plant, const StateSpace& controller) {
    const StateSpace gof = gang_of_four(plant, controller);
    if (!is_hurwitz(gof)) {
        throw DomainError("nominal loop unstable; margin undefined");
    }
    const NormResult nr = hinf_norm(gof);
    const double margin = std::min(1.0, 1.0 / nr.value);
    return {nr.value, margin, std::asin(margin), nr.peak_omega, nr.method};
}

} // namespace ncsrobust
