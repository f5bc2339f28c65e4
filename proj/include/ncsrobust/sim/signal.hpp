#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ncsrobust/errors.hpp"

namespace ncsrobust::sim {

/// Uniformly sampled scalar signal starting at t = 0.
struct Signal {
    std::vector<double> values;
    double h = 1e-3;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] double time(std::size_t i) const noexcept { return static_cast<double>(i) * h; }
};

/// sqrt(h * sum_{t <= T} |x(t)|^2); T past the end uses the whole record.
[[nodiscard]] inline double truncated_l2(const std::vector<double>& x, double h, double horizon) {
    if (!(h > 0.0)) {
        throw InputError("sample period must be positive");
    }
    const auto last = static_cast<std::size_t>(std::floor(horizon / h + 1e-9));
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size() && i <= last; ++i) {
        acc += x[i] * x[i];
    }
    return std::sqrt(h * acc);
}

[[nodiscard]] inline double truncated_l2(const Signal& s, double horizon) { return truncated_l2(s.values, s.h, horizon); }

/// Combined truncated norm of several equally sampled channels.
[[nodiscard]] inline double truncated_l2_joint(const std::vector<const std::vector<double>*>& xs, double h, double horizon) {
    double acc = 0.0;
    for (const auto* x : xs) {
        const double n = truncated_l2(*x, h, horizon);
        acc += n * n;
    }
    return std::sqrt(acc);
}

[[nodiscard]] inline double peak_abs(const std::vector<double>& x, std::size_t from = 0, std::size_t to = static_cast<std::size_t>(-1)) {
    double m = 0.0;
    for (std::size_t i = from; i < x.size() && i < to; ++i) {
        m = std::max(m, std::abs(x[i]));
    }
    return m;
}

} // namespace ncsrobust::sim
