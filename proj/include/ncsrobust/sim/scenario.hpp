#pragma once

// Scenario descriptors for the cascaded loop
//
//   plant P -- channel 1 -- ... -- channel l -- controller C
//
// Cut k (k = 0..l) sits between channel k and channel k+1; cut 0 is at the
// plant and cut l at the controller. At cut k the plant-side pair is
// (u_k, y_k) and the controller-side pair is (a_k, b_k) with
//   u_k = a_k + p_k,   b_k = y_k + q_k.
// Channel k applies T_k = I + Delta_k from its plant side (a_{k-1}, b_{k-1})
// to its controller side (u_k, y_k):
//   u_k = a_{k-1} + Ddiv(a_{k-1}) + Dminus(b_{k-1})
//   y_k = b_{k-1} + Dplus(a_{k-1}) + Dtimes(b_{k-1})
// and the controller closes w = b_l, v = +/- C(w), a_l = v.

#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ncsrobust/config.hpp"
#include "ncsrobust/errors.hpp"
#include "ncsrobust/lti.hpp"
#include "ncsrobust/sim/blocks.hpp"
#include "ncsrobust/sim/discretize.hpp"

namespace ncsrobust::sim {

struct Quartet {
    std::optional<NonlinearBlock> delta_div;
    std::optional<NonlinearBlock> delta_minus;
    std::optional<NonlinearBlock> delta_plus;
    std::optional<NonlinearBlock> delta_times;
    double declared_gain = 0.0;
};

struct Injection {
    std::string port; // p<k> or q<k>
    std::string kind; // impulse | step | multisine | samples
    json params = json::object();
};

/// Plant gap radius: either a number or a Pade nu-gap estimate for an input delay.
struct RadiusSpec {
    double value = 0.0;
    std::optional<double> delay_gap; // delay multiplying P
    std::vector<int> orders{3, 4, 5};
};

struct Scenario {
    StateSpace plant;
    int plant_delay_steps = 0;
    StateSpace controller;
    bool positive_feedback = true;
    std::vector<Quartet> channels;
    std::vector<Injection> injections;
    double h = 1e-3;
    double duration = 10.0;
    Method method = Method::zoh;
    RadiusSpec r_p;
    double r_c = 0.0;
    json descriptor; // canonical form
    std::vector<std::string> warnings;

    [[nodiscard]] std::size_t stages() const noexcept { return channels.size(); }
    [[nodiscard]] std::size_t steps() const noexcept {
        return static_cast<std::size_t>(std::llround(duration / h)) + 1;
    }
};

[[nodiscard]] inline std::optional<std::size_t> port_stage(const std::string& port, char prefix) {
    if (port.size() < 2 || port[0] != prefix) {
        return std::nullopt;
    }
    for (std::size_t i = 1; i < port.size(); ++i) {
        if (port[i] < '0' || port[i] > '9') {
            return std::nullopt;
        }
    }
    return static_cast<std::size_t>(std::stoul(port.substr(1)));
}

/// Samples of an injection over `steps` steps of size h.
[[nodiscard]] inline std::vector<double> injection_samples(const Injection& inj, double h, std::size_t steps) {
    std::vector<double> out(steps, 0.0);
    const json& p = inj.params;
    const auto number = [&](const char* key, double fallback) {
        if (!p.contains(key)) {
            return fallback;
        }
        if (!p.at(key).is_number()) {
            throw InputError("injection " + inj.port + ": '" + key + "' must be a number");
        }
        return p.at(key).get<double>();
    };
    const double amplitude = number("amplitude", 1.0);
    const double start = number("time", 0.0);
    const auto first = static_cast<std::size_t>(std::llround(std::max(0.0, start) / h));
    if (inj.kind == "impulse") {
        // One-sample pulse of area `amplitude`.
        if (first < steps) {
            out[first] = amplitude / h;
        }
    } else if (inj.kind == "step") {
        for (std::size_t i = first; i < steps; ++i) {
            out[i] = amplitude;
        }
    } else if (inj.kind == "multisine") {
        const auto freqs = detail::number_list(p.value("freqs", json::array({1.0})), "multisine freqs");
        std::vector<double> phases;
        if (p.contains("phases")) {
            phases = detail::number_list(p.at("phases"), "multisine phases");
            if (phases.size() != freqs.size()) {
                throw InputError("multisine phases must match freqs");
            }
        } else {
            std::mt19937_64 rng(static_cast<std::uint64_t>(number("seed", 1.0)));
            std::uniform_real_distribution<double> u(0.0, 2.0 * 3.141592653589793);
            for (std::size_t i = 0; i < freqs.size(); ++i) {
                phases.push_back(u(rng));
            }
        }
        for (std::size_t i = first; i < steps; ++i) {
            const double t = static_cast<double>(i - first) * h;
            double v = 0.0;
            for (std::size_t k = 0; k < freqs.size(); ++k) {
                v += std::sin(freqs[k] * t + phases[k]);
            }
            out[i] = amplitude * v;
        }
    } else if (inj.kind == "samples") {
        const auto vals = detail::number_list(p.value("values", json()), "samples values");
        for (std::size_t i = 0; i < vals.size() && first + i < steps; ++i) {
            out[first + i] = amplitude * vals[i];
        }
    } else {
        throw InputError("unknown injection kind '" + inj.kind + "'");
    }
    return out;
}

namespace detail {

inline constexpr const char* quartet_keys[4] = {"delta_div", "delta_minus", "delta_plus", "delta_times"};

[[nodiscard]] inline std::optional<NonlinearBlock>& quartet_slot(Quartet& q, int i) {
    switch (i) {
    case 0:
        return q.delta_div;
    case 1:
        return q.delta_minus;
    case 2:
        return q.delta_plus;
    default:
        return q.delta_times;
    }
}

[[nodiscard]] inline const std::optional<NonlinearBlock>& quartet_slot(const Quartet& q, int i) {
    return quartet_slot(const_cast<Quartet&>(q), i);
}

} // namespace detail

/// Validates a scenario: dimensions, radii, strong causality of every
/// uncertainty entry and the absence of instantaneous loops.
inline void check_well_posed(const Scenario& sc); // engine.hpp

[[nodiscard]] inline json scenario_to_json(const Scenario& sc) {
    json plant = system_to_json(sc.plant);
    plant["delay_steps"] = sc.plant_delay_steps;
    json channels = json::array();
    for (const auto& q : sc.channels) {
        json c;
        for (int i = 0; i < 4; ++i) {
            const auto& slot = detail::quartet_slot(q, i);
            c[detail::quartet_keys[i]] = slot ? block_to_json(*slot) : json(nullptr);
        }
        c["gain_bound"] = q.declared_gain;
        channels.push_back(c);
    }
    json injections = json::array();
    for (const auto& inj : sc.injections) {
        injections.push_back({{"port", inj.port}, {"kind", inj.kind}, {"params", inj.params}});
    }
    json rp = sc.r_p.delay_gap ? json{{"delay_gap", {{"delay", *sc.r_p.delay_gap}, {"orders", sc.r_p.orders}}}}
                               : json(sc.r_p.value);
    return {{"plant", plant},
            {"controller", system_to_json(sc.controller)},
            {"feedback_sign", sc.positive_feedback ? "positive" : "negative"},
            {"channels", channels},
            {"injections", injections},
            {"solver", {{"h", sc.h}, {"duration", sc.duration}, {"method", to_string(sc.method)}}},
            {"uncertainty", {{"r_p", rp}, {"r_c", sc.r_c}}}};
}

[[nodiscard]] inline Scenario build_scenario(const json& d) {
    if (!d.is_object()) {
        throw InputError("scenario must be a JSON object");
    }
    for (const char* key : {"plant", "controller"}) {
        if (!d.contains(key)) {
            throw InputError(std::string("scenario is missing '") + key + "'");
        }
    }
    Scenario sc;
    sc.plant = parse_system(d.at("plant"), "plant");
    if (d.at("plant").contains("delay_steps")) {
        const auto& ds = d.at("plant").at("delay_steps");
        if (!ds.is_number_integer() || ds.get<long>() < 0) {
            throw InputError("plant.delay_steps must be a non-negative integer");
        }
        sc.plant_delay_steps = ds.get<int>();
    }
    sc.controller = parse_system(d.at("controller"), "controller");
    if (sc.plant.inputs() != 1 || sc.plant.outputs() != 1 || sc.controller.inputs() != 1 ||
        sc.controller.outputs() != 1) {
        throw InputError("the simulator handles single-input single-output plant and controller only");
    }
    const std::string sign = d.value("feedback_sign", std::string("positive"));
    if (sign != "positive" && sign != "negative") {
        throw InputError("feedback_sign must be 'positive' or 'negative'");
    }
    sc.positive_feedback = sign == "positive";

    if (d.contains("channels")) {
        if (!d.at("channels").is_array()) {
            throw InputError("channels must be an array");
        }
        for (std::size_t k = 0; k < d.at("channels").size(); ++k) {
            const json& cj = d.at("channels")[k];
            const std::string where = "channels[" + std::to_string(k) + "]";
            if (!cj.is_object()) {
                throw InputError(where + " must be an object");
            }
            Quartet q;
            for (int i = 0; i < 4; ++i) {
                const char* key = detail::quartet_keys[i];
                if (cj.contains(key) && !cj.at(key).is_null()) {
                    detail::quartet_slot(q, i) = parse_block(cj.at(key), where + "." + key);
                }
            }
            if (!cj.contains("gain_bound") || !cj.at("gain_bound").is_number()) {
                throw InputError(where + ".gain_bound must be a number");
            }
            q.declared_gain = cj.at("gain_bound").get<double>();
            if (!(q.declared_gain >= 0.0 && q.declared_gain < 1.0)) {
                throw InputError(where + ".gain_bound must lie in [0, 1), got " + std::to_string(q.declared_gain));
            }
            sc.channels.push_back(std::move(q));
        }
    }

    if (d.contains("injections")) {
        if (!d.at("injections").is_array()) {
            throw InputError("injections must be an array");
        }
        for (const json& ij : d.at("injections")) {
            Injection inj;
            if (!ij.is_object() || !ij.contains("port") || !ij.at("port").is_string()) {
                throw InputError("each injection needs a string 'port'");
            }
            inj.port = ij.at("port").get<std::string>();
            inj.kind = ij.value("kind", std::string("impulse"));
            inj.params = ij.value("params", json::object());
            const auto stage = port_stage(inj.port, 'p') ? port_stage(inj.port, 'p') : port_stage(inj.port, 'q');
            if (!stage || *stage > sc.channels.size()) {
                throw InputError("injection port '" + inj.port + "' does not exist (expected p0..p" +
                                 std::to_string(sc.channels.size()) + " or q0..q" +
                                 std::to_string(sc.channels.size()) + ")");
            }
            sc.injections.push_back(std::move(inj));
        }
    }

    const json solver = d.value("solver", json::object());
    sc.h = solver.value("h", 1e-3);
    sc.duration = solver.value("duration", 10.0);
    sc.method = parse_method(solver.value("method", std::string("zoh")));
    if (!(sc.h > 0.0) || !std::isfinite(sc.h)) {
        throw InputError("solver.h must be positive");
    }
    if (!(sc.duration >= sc.h)) {
        throw InputError("solver.duration must be at least one step");
    }

    if (d.contains("uncertainty")) {
        const json& u = d.at("uncertainty");
        if (u.contains("r_p")) {
            const json& rp = u.at("r_p");
            if (rp.is_number()) {
                sc.r_p.value = rp.get<double>();
            } else if (rp.is_object() && rp.contains("delay_gap")) {
                const json& dg = rp.at("delay_gap");
                sc.r_p.delay_gap = dg.value("delay", 0.0);
                if (!(*sc.r_p.delay_gap >= 0.0)) {
                    throw InputError("uncertainty.r_p.delay_gap.delay must be non-negative");
                }
                if (dg.contains("orders")) {
                    sc.r_p.orders = dg.at("orders").get<std::vector<int>>();
                }
            } else {
                throw InputError("uncertainty.r_p must be a number or {\"delay_gap\": {...}}");
            }
        }
        sc.r_c = u.value("r_c", 0.0);
        for (double r : {sc.r_p.value, sc.r_c}) {
            if (!(r >= 0.0 && r < 1.0)) {
                throw InputError("uncertainty radii must lie in [0, 1)");
            }
        }
    }

    check_well_posed(sc);
    sc.descriptor = scenario_to_json(sc);
    return sc;
}

} // namespace ncsrobust::sim

#include "ncsrobust/sim/engine.hpp"
