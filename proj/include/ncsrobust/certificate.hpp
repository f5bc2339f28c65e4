#pragma once

// Arcsine robust-stability test for a cascaded two-port loop:
//   arcsin r_p + arcsin r_c + sum_k arcsin r_k  <  arcsin ||P#C||^{-1}.

#include <cmath>
#include <string>
#include <vector>

#include "ncsrobust/errors.hpp"
#include "ncsrobust/hinf.hpp"
#include "ncsrobust/lti.hpp"

namespace ncsrobust {

struct UncertaintyBudget {
    double r_p = 0.0;
    double r_c = 0.0;
    std::vector<double> channel_radii;
    std::string provenance = "declared"; ///< how r_p / r_c were obtained, e.g. "nu-gap (Pade 3,4,5)"

    void validate() const {
        const auto check = [](double r, const char* what) {
            if (!(r >= 0.0 && r < 1.0)) {
                throw InputError(std::string(what) + " must lie in [0, 1), got " + std::to_string(r));
            }
        };
        check(r_p, "r_p");
        check(r_c, "r_c");
        for (double r : channel_radii) {
            check(r, "channel radius");
        }
    }
};

enum class Verdict { certified, not_certified };

[[nodiscard]] inline std::string to_string(Verdict v) { return v == Verdict::certified ? "certified" : "not_certified"; }

struct Certificate {
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
    Verdict verdict = Verdict::not_certified;
    double margin = 0.0;
    double norm = 0.0;
    bool strongly_causal = true; ///< declared: P or C strongly causal
    std::string provenance;
};

[[nodiscard]] inline Certificate arcsine_certificate(const MarginResult& m, const UncertaintyBudget& budget,
                                                     bool strongly_causal = true) {
    budget.validate();
    Certificate c;
    c.lhs = std::asin(budget.r_p) + std::asin(budget.r_c);
    for (double r : budget.channel_radii) {
        c.lhs += std::asin(r);
    }
    c.rhs = m.arcsin_margin;
    c.slack = c.rhs - c.lhs;
    // A tie is not certified.
    c.verdict = c.slack > 0.0 ? Verdict::certified : Verdict::not_certified;
    c.margin = m.margin;
    c.norm = m.norm;
    c.strongly_causal = strongly_causal;
    c.provenance = budget.provenance;
    return c;
}

[[nodiscard]] inline Certificate arcsine_certificate(const StateSpace& plant, const StateSpace& controller,
                                                     const UncertaintyBudget& budget) {
    budget.validate();
    const bool strict = plant.strictly_proper() || controller.strictly_proper();
    return arcsine_certificate(stability_margin(plant, controller), budget, strict);
}

/// Equal per-channel radii leaving `eps` of slack.
[[nodiscard]] inline std::vector<double> max_equal_budget(const MarginResult& m, double r_p, double r_c, int l,
                                                          double eps = 0.0) {
    if (l < 1) {
        throw InputError("channel count must be at least 1");
    }
    UncertaintyBudget{r_p, r_c, {}, ""}.validate();
    const double remaining = m.arcsin_margin - std::asin(r_p) - std::asin(r_c) - eps;
    if (!(remaining > 0.0)) {
        throw DomainError("no remaining slack for channel uncertainty");
    }
    return std::vector<double>(static_cast<std::size_t>(l), std::sin(remaining / l));
}

[[nodiscard]] inline std::vector<double> max_equal_budget(const StateSpace& plant, const StateSpace& controller,
                                                          double r_p, double r_c, int l, double eps = 0.0) {
    return max_equal_budget(stability_margin(plant, controller), r_p, r_c, l, eps);
}

} // namespace ncsrobust
