#pragma once

// Worked example: double integrator with a round-trip input delay, the
// optimally robust controller, and one channel whose quartet is
//   Dminus = -(sqrt(3)/2) r * Lambda(g .),  Dtimes = -(r/2) g,  g = alpha/(s + alpha),
// with Lambda the unit saturator.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "ncsrobust/config.hpp"
#include "ncsrobust/errors.hpp"
#include "ncsrobust/lti.hpp"
#include "ncsrobust/sim/blocks.hpp"
#include "ncsrobust/sim/scenario.hpp"

namespace ncsrobust::sim {

[[nodiscard]] inline StateSpace double_integrator() { return tf_to_ss(RationalTransfer({1.0}, {1.0, 0.0, 0.0})); }

/// -((1 + sqrt2) s + 1) / (s + 1 + sqrt2), positive-feedback convention.
[[nodiscard]] inline StateSpace optimal_controller() {
    const double s2 = std::numbers::sqrt2;
    return tf_to_ss(RationalTransfer({-(1.0 + s2), -1.0}, {1.0, 1.0 + s2}));
}

[[nodiscard]] inline NonlinearBlock lowpass(double alpha) {
    return linear(tf_to_ss(RationalTransfer({alpha}, {1.0, alpha})));
}

[[nodiscard]] inline Quartet example_quartet(double r, double alpha) {
    Quartet q;
    q.delta_minus = series({lowpass(alpha), saturation(1.0), gain(-std::sqrt(3.0) / 2.0 * r)});
    q.delta_times = series({lowpass(alpha), gain(-r / 2.0)});
    q.declared_gain = r;
    return q;
}

struct ExampleDescriptor {
    json descriptor;
    std::vector<std::string> warnings;
};

[[nodiscard]] inline ExampleDescriptor paper_example_descriptor(double r, double tau, double alpha = 100.0,
                                                                double h = 1e-3, double duration = 40.0) {
    if (!(r >= 0.0 && r < 1.0)) {
        throw InputError("r must lie in [0, 1)");
    }
    if (!(tau >= 0.0) || !(alpha > 0.0) || !(h > 0.0) || !(duration > 0.0)) {
        throw InputError("tau must be non-negative and alpha, h, duration positive");
    }
    ExampleDescriptor out;
    const double exact = 2.0 * tau / h;
    const long steps = std::lround(exact);
    if (std::abs(exact - static_cast<double>(steps)) > 1e-6) {
        out.warnings.push_back("round-trip delay " + std::to_string(2.0 * tau) + " s is not a multiple of h; rounded to " +
                               std::to_string(steps) + " steps");
    }
    Scenario sc;
    sc.plant = double_integrator();
    sc.plant_delay_steps = static_cast<int>(steps);
    sc.controller = optimal_controller();
    sc.channels.push_back(example_quartet(r, alpha));
    sc.injections.push_back({"p1", "impulse", {{"amplitude", 1.0}}});
    sc.h = h;
    sc.duration = duration;
    sc.r_p.delay_gap = tau;
    out.descriptor = scenario_to_json(sc);
    out.descriptor["plant"] = {{"num", {1.0}}, {"den", {1.0, 0.0, 0.0}}, {"delay_steps", steps}};
    out.descriptor["controller"] = {{"num", {-(1.0 + std::numbers::sqrt2), -1.0}},
                                    {"den", {1.0, 1.0 + std::numbers::sqrt2}}};
    return out;
}

[[nodiscard]] inline Scenario paper_example_scenario(double r, double tau, double alpha = 100.0, double h = 1e-3,
                                                     double duration = 40.0) {
    auto d = paper_example_descriptor(r, tau, alpha, h, duration);
    Scenario sc = build_scenario(d.descriptor);
    sc.warnings = d.warnings;
    return sc;
}

/// Forward channel map (v, w) = T(a, b) = (a + Dminus b, b + Dtimes b) for the example quartet.
[[nodiscard]] inline std::pair<std::vector<double>, std::vector<double>>
example_channel_forward(double r, double alpha, const std::vector<double>& a, const std::vector<double>& b, double h) {
    const Quartet q = example_quartet(r, alpha);
    auto dminus = instantiate(*q.delta_minus, h);
    auto dtimes = instantiate(*q.delta_times, h);
    std::vector<double> v(a.size()), w(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        v[k] = a[k] + dminus->evaluate(b[k]);
        w[k] = b[k] + dtimes->evaluate(b[k]);
        dminus->commit(b[k]);
        dtimes->commit(b[k]);
    }
    return {v, w};
}

/// Closed-form inverse
///   b = (1 - (r/2) g)^{-1} w,   a = v + (sqrt(3)/2) r Lambda(g b),
/// with (1 - (r/2) g)^{-1} realized as the loop b = w + (r/2) g b.
[[nodiscard]] inline std::pair<std::vector<double>, std::vector<double>>
example_channel_inverse(double r, double alpha, const std::vector<double>& v, const std::vector<double>& w, double h) {
    auto g = instantiate(lowpass(alpha), h);
    std::vector<double> a(v.size()), b(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double gb = g->evaluate(0.0); // strictly proper
        b[k] = w[k] + 0.5 * r * gb;
        a[k] = v[k] + std::sqrt(3.0) / 2.0 * r * std::clamp(gb, -1.0, 1.0);
        g->commit(b[k]);
    }
    return {a, b};
}

} // namespace ncsrobust::sim
