#pragma once

// nu-gap between rational systems, the gap between finite-dimensional
// subspaces, and Pade-based estimates of the gap induced by a delay.
//
// The nu-gap is a lower bound on the gap metric; every GapResult carries
// lower_is_nu_gap = true so downstream reports can say which metric produced
// a radius.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "ncsrobust/errors.hpp"
#include "ncsrobust/frequency_sweep.hpp"
#include "ncsrobust/lti.hpp"
#include "ncsrobust/subspace.hpp"

namespace ncsrobust {

struct GapResult {
    double value = 0.0;
    bool winding_ok = true;
    double peak_omega = 0.0;
    bool lower_is_nu_gap = true;
    int winding_number = 0;
    std::vector<std::string> warnings;
};

/// Pointwise chordal distance
/// sigma_max((I + M2 M2^*)^{-1/2} (M2 - M1) (I + M1^* M1)^{-1/2}), in [0, 1].
[[nodiscard]] inline double chordal_distance(const CMatrix& m1, const CMatrix& m2) {
    if (m1.rows() != m2.rows() || m1.cols() != m2.cols()) {
        throw InputError("chordal_distance: matrices must have equal dimensions");
    }
    if (m1.rows() == 1 && m1.cols() == 1) {
        const Complex a = m1(0, 0), b = m2(0, 0);
        return std::min(1.0, std::abs(a - b) / std::sqrt((1.0 + std::norm(a)) * (1.0 + std::norm(b))));
    }
    const auto p = m1.rows();
    const auto m = m1.cols();
    const CMatrix left = CMatrix::Identity(p, p) + m2 * m2.adjoint();
    const CMatrix right = CMatrix::Identity(m, m) + m1.adjoint() * m1;
    Eigen::SelfAdjointEigenSolver<CMatrix> el(left), er(right);
    const CMatrix k = el.operatorInverseSqrt() * (m2 - m1) * er.operatorInverseSqrt();
    return std::min(1.0, sigma_max(k));
}

namespace detail {

struct PoleCensus {
    int rhp = 0;                  // open right half plane
    int imaginary = 0;            // on the imaginary axis
    std::vector<double> axis_freqs; // imaginary parts of the axis poles
};

[[nodiscard]] inline PoleCensus pole_census(const std::vector<Complex>& ps) {
    PoleCensus out;
    for (const Complex& p : ps) {
        const double tol = 1e-6 * (1.0 + std::abs(p));
        if (std::abs(p.real()) <= tol) {
            ++out.imaginary;
            out.axis_freqs.push_back(p.imag());
        } else if (p.real() > 0.0) {
            ++out.rhp;
        }
    }
    return out;
}

struct WindingOutcome {
    bool ok = true;
    int number = 0; // zeros minus poles of det(I + P2~ P1) inside the indented contour
    std::string reason;
};

/// Winding of det(I + P2(-s)^T P1(s)) around the right half plane, with
/// semicircular indentations into the RHP around imaginary-axis poles.
/// Phase is accumulated sample to sample; an interval is bisected whenever
/// its phase step exceeds pi/2.
[[nodiscard]] inline WindingOutcome winding(const FrequencyResponse& f1, const FrequencyResponse& f2,
                                            std::vector<double> indent_at) {
    using std::numbers::pi;
    const auto m = f1.system().inputs();
    const CMatrix eye = CMatrix::Identity(m, m);
    const auto det_at = [&](Complex s) {
        return (eye + f2.at(-s).transpose() * f1.at(s)).determinant();
    };

    double radius_scale = 1.0;
    for (const auto* f : {&f1, &f2}) {
        for (const Complex& p : f->poles()) {
            radius_scale = std::max(radius_scale, std::abs(p));
        }
    }
    const double big = 1e6 * radius_scale;

    std::sort(indent_at.begin(), indent_at.end());
    std::vector<double> centers;
    for (double w : indent_at) {
        if (centers.empty() || std::abs(w - centers.back()) > 1e-6 * (1.0 + std::abs(w))) {
            centers.push_back(w);
        }
    }
    std::vector<double> eps(centers.size());
    for (std::size_t i = 0; i < centers.size(); ++i) {
        double e = 1e-4 * (1.0 + std::abs(centers[i]));
        if (i > 0) {
            e = std::min(e, 0.25 * (centers[i] - centers[i - 1]));
        }
        if (i + 1 < centers.size()) {
            e = std::min(e, 0.25 * (centers[i + 1] - centers[i]));
        }
        eps[i] = e;
    }

    struct Segment {
        std::function<Complex(double)> path;
        double t0, t1;
        int samples;
        bool on_axis;
    };
    std::vector<Segment> segments;
    static constexpr double w0 = 1e-4;
    const auto axis = [&](double a, double b) {
        const double t0 = std::asinh(a / w0), t1 = std::asinh(b / w0);
        const int n = std::max(64, static_cast<int>(40.0 * (t1 - t0)));
        segments.push_back({[](double t) { return Complex(0.0, w0 * std::sinh(t)); }, t0, t1, n, true});
    };
    double cursor = -big;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        axis(cursor, centers[i] - eps[i]);
        const double c = centers[i], e = eps[i];
        segments.push_back({[c, e](double th) { return Complex(0.0, c) + e * std::polar(1.0, th); }, -pi / 2, pi / 2,
                            64, false});
        cursor = centers[i] + eps[i];
    }
    axis(cursor, big);
    segments.push_back({[big](double th) { return std::polar(big, th); }, pi / 2, -pi / 2, 64, false});

    WindingOutcome out;
    const auto normalizer = [&](Complex s) {
        const CMatrix p1 = f1.at(s), p2 = f2.at(s);
        const double a = std::abs((eye + p1.adjoint() * p1).determinant());
        const auto pp = p2.cols();
        const double b = std::abs((CMatrix::Identity(pp, pp) + p2.adjoint() * p2).determinant());
        return std::sqrt(a * b);
    };
    const auto sample = [&](const Segment& seg, double t) {
        const Complex s = seg.path(t);
        const Complex v = det_at(s);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) || v == Complex{0.0, 0.0}) {
            throw DomainError("det(I + P2~ P1) is singular or non-finite on the contour");
        }
        if (seg.on_axis && std::abs(v) <= 1e-10 * normalizer(s)) {
            std::ostringstream msg;
            msg << "det(I + P2* P1) vanishes at omega = " << s.imag();
            throw DomainError(msg.str());
        }
        return v;
    };

    double total = 0.0;
    try {
        const std::function<double(const Segment&, double, double, Complex, Complex, int)> step =
            [&](const Segment& seg, double ta, double tb, Complex ga, Complex gb, int depth) -> double {
            const double d = std::arg(gb / ga);
            if (std::abs(d) <= pi / 2) {
                return d;
            }
            if (depth > 50) {
                throw DomainError("phase of det(I + P2~ P1) could not be resolved");
            }
            const double tm = 0.5 * (ta + tb);
            const Complex gm = sample(seg, tm);
            return step(seg, ta, tm, ga, gm, depth + 1) + step(seg, tm, tb, gm, gb, depth + 1);
        };
        for (const Segment& seg : segments) {
            double ta = seg.t0;
            Complex ga = sample(seg, ta);
            for (int i = 1; i <= seg.samples; ++i) {
                const double tb = seg.t0 + (seg.t1 - seg.t0) * i / seg.samples;
                const Complex gb = sample(seg, tb);
                total += step(seg, ta, tb, ga, gb, 0);
                ta = tb;
                ga = gb;
            }
        }
    } catch (const DomainError& e) {
        out.ok = false;
        out.reason = e.what();
        return out;
    }
    // The contour runs clockwise around the right half plane.
    const double turns = -total / (2.0 * pi);
    out.number = static_cast<int>(std::lround(turns));
    if (std::abs(turns - out.number) > 0.25) {
        out.ok = false;
        out.reason = "accumulated phase is not an integer number of turns";
    }
    return out;
}

} // namespace detail

/// nu-gap between P1 and P2 sampled on `grid` (refined around the maximizer).
///
/// When det(I + P2~ P1) fails the winding condition
/// wno + eta(P1) - eta(P2) - eta0(P2) = 0, the value is 1.
[[nodiscard]] inline GapResult nu_gap(const StateSpace& p1, const StateSpace& p2,
                                      const FrequencyGrid& grid = FrequencyGrid::standard()) {
    if (p1.inputs() != p2.inputs() || p1.outputs() != p2.outputs()) {
        throw InputError("nu_gap: systems must have the same input and output dimensions");
    }
    const FrequencyResponse f1(minimal_realization(p1));
    const FrequencyResponse f2(minimal_realization(p2));
    const auto c1 = detail::pole_census(f1.poles());
    const auto c2 = detail::pole_census(f2.poles());

    GapResult out;
    std::vector<double> indent = c1.axis_freqs;
    indent.insert(indent.end(), c2.axis_freqs.begin(), c2.axis_freqs.end());
    const auto wind = detail::winding(f1, f2, indent);
    out.winding_number = wind.number;
    out.winding_ok = wind.ok && (wind.number + c1.rhp - c2.rhp - c2.imaginary == 0);
    if (!out.winding_ok) {
        out.value = 1.0;
        out.warnings.push_back(wind.ok ? "winding number condition fails (wno = " + std::to_string(wind.number) + ")"
                                       : wind.reason);
        return out;
    }

    const auto kappa = [&](double w) { return chordal_distance(f1.at_omega(w), f2.at_omega(w)); };
    const PeakSearch sweep = refine_peak(kappa, grid);
    if (sweep.skipped > 0) {
        out.warnings.push_back(std::to_string(sweep.skipped) +
                               " grid point(s) skipped: evaluation at an imaginary-axis pole");
    }
    out.value = std::isfinite(sweep.value) ? sweep.value : 0.0;
    out.peak_omega = sweep.omega;

    const double at_inf = chordal_distance(f1.system().d().cast<Complex>(), f2.system().d().cast<Complex>());
    if (at_inf > out.value) {
        out.value = at_inf;
        out.peak_omega = std::numeric_limits<double>::infinity();
    }
    if (c1.imaginary == 0 && c2.imaginary == 0) {
        if (const double dc = kappa(0.0); dc > out.value) {
            out.value = dc;
            out.peak_omega = 0.0;
        }
    }
    return out;
}

/// Gap between column spans: || Pi_X - Pi_Y ||_2.
[[nodiscard]] inline double subspace_gap(const Matrix& x, const Matrix& y) {
    if (x.rows() != y.rows()) {
        throw InputError("subspace_gap: bases must live in the same space");
    }
    const Matrix qx = orthonormal_basis(x);
    const Matrix qy = orthonormal_basis(y);
    const Matrix diff = qx * qx.transpose() - qy * qy.transpose();
    Eigen::JacobiSVD<Matrix> svd(diff);
    return svd.singularValues()(0);
}

struct DelayGapEstimate {
    double value = 0.0; ///< max over orders
    std::vector<int> orders;
    std::vector<double> values;
    double spread = 0.0;     ///< max - min over orders
    bool stabilizing = true; ///< successive differences do not grow
    bool winding_ok = true;
};

/// nu-gap between P and P * pade_delay(delay, order) for each listed order.
/// `delay` is the delay that multiplies P.
[[nodiscard]] inline DelayGapEstimate delay_gap_estimate(const StateSpace& plant, double delay,
                                                         std::vector<int> orders = {3, 4, 5},
                                                         const FrequencyGrid& grid = FrequencyGrid::standard()) {
    if (!(delay >= 0.0)) {
        throw InputError("delay must be non-negative");
    }
    if (orders.empty()) {
        throw InputError("delay_gap_estimate needs at least one Pade order");
    }
    DelayGapEstimate out;
    out.orders = orders;
    for (int order : orders) {
        const GapResult g = nu_gap(plant, with_input_delay(plant, delay, order), grid);
        out.values.push_back(g.value);
        out.winding_ok = out.winding_ok && g.winding_ok;
    }
    const auto [lo, hi] = std::minmax_element(out.values.begin(), out.values.end());
    out.value = *hi;
    out.spread = *hi - *lo;
    for (std::size_t i = 2; i < out.values.size(); ++i) {
        const double prev = std::abs(out.values[i - 1] - out.values[i - 2]);
        const double cur = std::abs(out.values[i] - out.values[i - 1]);
        if (cur > prev + 1e-12) {
            out.stabilizing = false;
        }
    }
    return out;
}

} // namespace ncsrobust
