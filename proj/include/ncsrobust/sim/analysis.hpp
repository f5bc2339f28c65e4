#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ncsrobust/errors.hpp"
#include "ncsrobust/sim/blocks.hpp"
#include "ncsrobust/sim/engine.hpp"
#include "ncsrobust/sim/scenario.hpp"
#include "ncsrobust/sim/signal.hpp"

namespace ncsrobust::sim {

struct GainWindow {
    double horizon = 0.0;
    double ratio = 0.0;
    bool skipped = false; // zero input norm on this window
};

/// ||Gamma_T outputs|| / ||Gamma_T inputs|| for each horizon T.
[[nodiscard]] inline std::vector<GainWindow> finite_gain_estimate(const SimResult& res,
                                                                  const std::vector<std::string>& input_ports,
                                                                  const std::vector<std::string>& output_ports,
                                                                  const std::vector<double>& windows) {
    std::vector<const std::vector<double>*> in, out;
    for (const auto& p : input_ports) {
        in.push_back(&res.trace(p));
    }
    for (const auto& p : output_ports) {
        out.push_back(&res.trace(p));
    }
    std::vector<GainWindow> ratios;
    for (double T : windows) {
        GainWindow g{T};
        const double den = truncated_l2_joint(in, res.h, T);
        if (den == 0.0) {
            g.skipped = true;
        } else {
            g.ratio = truncated_l2_joint(out, res.h, T) / den;
        }
        ratios.push_back(g);
    }
    return ratios;
}

/// Largest |x| over the last `fraction` of the record divided by the global peak.
[[nodiscard]] inline double tail_to_peak(const std::vector<double>& x, double fraction = 0.2) {
    const double peak = peak_abs(x);
    if (peak == 0.0) {
        return 0.0;
    }
    const auto from = static_cast<std::size_t>(std::floor((1.0 - fraction) * static_cast<double>(x.size())));
    return peak_abs(x, from) / peak;
}

/// Peak |x| in each of `count` consecutive equal windows.
[[nodiscard]] inline std::vector<double> windowed_peaks(const std::vector<double>& x, std::size_t count) {
    std::vector<double> out;
    const std::size_t len = std::max<std::size_t>(1, x.size() / std::max<std::size_t>(1, count));
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(peak_abs(x, i * len, (i + 1) * len));
    }
    return out;
}

struct ProbeSettings {
    int probes = 200;
    std::uint64_t seed = 1;
    double h = 1e-3;
    double horizon = 20.0;
};

namespace detail {

// Random probe: multisine, step or impulse with log-uniform amplitude.
template <class Rng>
[[nodiscard]] std::vector<double> random_probe(Rng& rng, std::size_t steps, double h) {
    std::uniform_real_distribution<double> u01;
    const double amplitude = std::pow(10.0, -2.0 + 4.0 * u01(rng));
    const int kind = static_cast<int>(u01(rng) * 3.0);
    std::vector<double> x(steps, 0.0);
    if (kind == 0) {
        const int tones = 1 + static_cast<int>(u01(rng) * 3.0);
        for (int k = 0; k < tones; ++k) {
            const double w = std::pow(10.0, -2.0 + 4.0 * u01(rng));
            const double phase = 6.283185307179586 * u01(rng);
            for (std::size_t i = 0; i < steps; ++i) {
                x[i] += amplitude * std::sin(w * static_cast<double>(i) * h + phase);
            }
        }
    } else if (kind == 1) {
        const auto start = static_cast<std::size_t>(u01(rng) * 0.5 * static_cast<double>(steps));
        for (std::size_t i = start; i < steps; ++i) {
            x[i] = amplitude;
        }
    } else {
        x[static_cast<std::size_t>(u01(rng) * 0.5 * static_cast<double>(steps))] = amplitude / h;
    }
    return x;
}

[[nodiscard]] inline std::vector<double> run_block(const NonlinearBlock& b, const std::vector<double>& x, double h) {
    auto s = instantiate(b, h);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = s->evaluate(x[i]);
        s->commit(x[i]);
    }
    return y;
}

} // namespace detail

/// Monte-Carlo lower bound on the induced L2 gain of a block.
[[nodiscard]] inline double operator_gain_estimate(const NonlinearBlock& block, ProbeSettings ps = {}) {
    if (ps.probes < 10) {
        throw InputError("operator gain estimate needs at least 10 probes");
    }
    std::mt19937_64 rng(ps.seed);
    const auto steps = static_cast<std::size_t>(std::llround(ps.horizon / ps.h)) + 1;
    double best = 0.0;
    for (int i = 0; i < ps.probes; ++i) {
        const auto x = detail::random_probe(rng, steps, ps.h);
        const double nx = truncated_l2(x, ps.h, ps.horizon);
        if (nx > 0.0) {
            best = std::max(best, truncated_l2(detail::run_block(block, x, ps.h), ps.h, ps.horizon) / nx);
        }
    }
    return best;
}

/// Output pair of Delta(a, b) = (Ddiv a + Dminus b, Dplus a + Dtimes b).
[[nodiscard]] inline std::pair<std::vector<double>, std::vector<double>>
apply_quartet(const Quartet& q, const std::vector<double>& a, const std::vector<double>& b, double h) {
    std::vector<double> first(a.size(), 0.0), second(a.size(), 0.0);
    for (int i = 0; i < 4; ++i) {
        const auto& slot = detail::quartet_slot(q, i);
        if (!slot) {
            continue;
        }
        const auto y = detail::run_block(*slot, (i == 0 || i == 2) ? a : b, h);
        auto& dst = i < 2 ? first : second;
        for (std::size_t k = 0; k < y.size(); ++k) {
            dst[k] += y[k];
        }
    }
    return {first, second};
}

/// Monte-Carlo lower bound on the gain of the 2x2 operator Delta.
[[nodiscard]] inline double operator_gain_estimate(const Quartet& q, ProbeSettings ps = {}) {
    if (ps.probes < 10) {
        throw InputError("operator gain estimate needs at least 10 probes");
    }
    std::mt19937_64 rng(ps.seed);
    std::uniform_real_distribution<double> u01;
    const auto steps = static_cast<std::size_t>(std::llround(ps.horizon / ps.h)) + 1;
    double best = 0.0;
    for (int i = 0; i < ps.probes; ++i) {
        // drive one side or both
        const int mode = static_cast<int>(u01(rng) * 3.0);
        std::vector<double> a(steps, 0.0), b(steps, 0.0);
        if (mode != 1) {
            a = detail::random_probe(rng, steps, ps.h);
        }
        if (mode != 0) {
            b = detail::random_probe(rng, steps, ps.h);
        }
        const double nin = truncated_l2_joint({&a, &b}, ps.h, ps.horizon);
        if (nin == 0.0) {
            continue;
        }
        const auto [da, db] = apply_quartet(q, a, b, ps.h);
        best = std::max(best, truncated_l2_joint({&da, &db}, ps.h, ps.horizon) / nin);
    }
    return best;
}

} // namespace ncsrobust::sim
