#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

#include "ncsrobust/errors.hpp"
#include "ncsrobust/lti.hpp"

namespace ncsrobust {

struct PeakSearch {
    double value = -std::numeric_limits<double>::infinity();
    double omega = 0.0;
    std::size_t skipped = 0; // grid points rejected for pole proximity
};

/// Supremum of f over a grid, refined by trisection (in log-frequency) around
/// the grid maximizer until the bracket is narrower than rel_spacing.
/// Points where f throws PoleProximityError are skipped.
template <class F>
[[nodiscard]] PeakSearch refine_peak(F&& f, const FrequencyGrid& grid, double rel_spacing = 1e-6) {
    const auto& w = grid.omegas();
    const auto safe = [&f](double omega) {
        try {
            return static_cast<double>(f(omega));
        } catch (const PoleProximityError&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    PeakSearch out;
    std::size_t best = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double v = safe(w[i]);
        if (!std::isfinite(v)) {
            ++out.skipped;
            continue;
        }
        if (v > out.value) {
            out.value = v;
            out.omega = w[i];
            best = i;
        }
    }
    if (!std::isfinite(out.value)) {
        return out;
    }

    double xlo = std::log(best > 0 ? w[best - 1] : w[0] * w[0] / w[1]);
    double xhi = std::log(best + 1 < w.size() ? w[best + 1] : w.back() * w.back() / w[w.size() - 2]);
    while ((std::exp(xhi) - std::exp(xlo)) > rel_spacing * std::exp(0.5 * (xlo + xhi))) {
        const double m1 = xlo + (xhi - xlo) / 3.0;
        const double m2 = xhi - (xhi - xlo) / 3.0;
        const double f1 = safe(std::exp(m1));
        const double f2 = safe(std::exp(m2));
        if (f1 > out.value) {
            out.value = f1;
            out.omega = std::exp(m1);
        }
        if (f2 > out.value) {
            out.value = f2;
            out.omega = std::exp(m2);
        }
        if (f1 < f2) {
            xlo = m1;
        } else {
            xhi = m2;
        }
    }
    return out;
}

} // namespace ncsrobust
