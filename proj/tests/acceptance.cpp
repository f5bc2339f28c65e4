// Acceptance checks. Prints one PASS/FAIL line per criterion.
//   acceptance                 run all
//   acceptance --criterion N   run one

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ncsrobust/certificate.hpp"
#include "ncsrobust/cone_geometry.hpp"
#include "ncsrobust/gap.hpp"
#include "ncsrobust/hinf.hpp"
#include "ncsrobust/sim/analysis.hpp"
#include "ncsrobust/sim/paper_example.hpp"
#include "ncsrobust/two_port.hpp"
#include "oracles.hpp"

using namespace ncsrobust;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... xs) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, xs...);
    return buf;
}

const StateSpace& plant() {
    static const StateSpace p = sim::double_integrator();
    return p;
}
const StateSpace& controller() {
    static const StateSpace c = sim::optimal_controller();
    return c;
}

Outcome margin_reproduction() {
    const auto t0 = Clock::now();
    const MarginResult m = stability_margin(plant(), controller());
    const double dt = seconds_since(t0);
    const double norm = std::sqrt(4.0 + 2.0 * std::sqrt(2.0));
    const bool ok = std::abs(m.norm - norm) <= 1e-5 * norm && std::abs(m.margin - 1.0 / norm) <= 1e-5 / norm &&
                    std::abs(m.arcsin_margin - std::numbers::pi / 8) <= 1e-6 && dt < 1.0;
    return {ok, fmt("norm %.7f margin %.7f arcsin %.7f (%.3f s)", m.norm, m.margin, m.arcsin_margin, dt)};
}

Outcome certificate_case(double r, double tau, double lo, double hi, Verdict expected) {
    const auto t0 = Clock::now();
    const DelayGapEstimate gap = delay_gap_estimate(plant(), tau, {3, 4, 5});
    const Certificate c = arcsine_certificate(plant(), controller(), {gap.value, 0.0, {r}, "nu-gap"});
    const double dt = seconds_since(t0);
    const bool ok = c.lhs >= lo && c.lhs <= hi && c.verdict == expected && dt < 5.0;
    return {ok, fmt("r_p %.6f lhs %.6f rhs %.6f verdict %s (%.3f s)", gap.value, c.lhs, c.rhs, to_string(c.verdict).c_str(), dt)};
}

Outcome delay_gap_bound() {
    const auto t0 = Clock::now();
    const GapResult g4 = nu_gap(plant(), with_input_delay(plant(), 0.2, 4));
    const DelayGapEstimate est = delay_gap_estimate(plant(), 0.2, {3, 4, 5});
    const DelayGapEstimate half = delay_gap_estimate(plant(), 0.1, {3, 4, 5});
    const double dt = seconds_since(t0);
    const bool in_band = g4.value >= 0.05 && g4.value <= 0.0576;
    const bool stable = est.spread <= 5e-3;
    return {in_band && stable && dt < 5.0,
            fmt("nu-gap(0.2 s, order 4) %.6f, required [0.05, 0.0576]; spread over orders 3-5 %.2e; "
                "0.1 s delay gives %.6f (%.3f s)",
                g4.value, est.spread, half.value, dt)};
}

Outcome simulation_reproduction() {
    auto t0 = Clock::now();
    const sim::SimResult stable = sim::simulate(sim::paper_example_scenario(0.32, 0.1, 100.0, 1e-3, 40.0));
    const double t_stable = seconds_since(t0);
    t0 = Clock::now();
    const sim::SimResult unstable = sim::simulate(sim::paper_example_scenario(0.4, 0.2, 100.0, 1e-3, 40.0));
    const double t_unstable = seconds_since(t0);

    const double tail = sim::tail_to_peak(stable.trace("y0"));
    const auto peaks = sim::windowed_peaks(unstable.trace("y0"), 4);
    const double growth = peaks.front() > 0.0 ? peaks.back() / peaks.front() : 0.0;
    const bool stable_ok = tail <= 0.01 && !stable.diverged;
    const bool unstable_ok = unstable.diverged || growth >= 10.0;
    return {stable_ok && unstable_ok && t_stable < 30.0 && t_unstable < 30.0,
            fmt("stable tail/peak %.4f (need <= 0.01); unstable diverged %s, peak growth %.3f (need >= 10) "
                "(%.2f s, %.2f s)",
                tail, unstable.diverged ? "yes" : "no", growth, t_stable, t_unstable)};
}

Outcome hinf_suite() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(6006);
    std::uniform_int_distribution<int> dim(1, 3), order(1, 8);
    int agree = 0;
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const auto r = oracle::random_stable(rng, order(rng), dim(rng), dim(rng));
        const double grid = oracle::grid_norm(r, 10000);
        const double value = hinf_norm(StateSpace(r.a, r.b, r.c, r.d)).value;
        const double rel = std::abs(value - grid) / grid;
        worst = std::max(worst, rel);
        agree += rel <= 1e-3 ? 1 : 0;
    }
    const double peak = hinf_norm(tf_to_ss(RationalTransfer({1.0}, {1.0, 0.2, 1.0}))).value;
    const double dt = seconds_since(t0);
    const bool ok = agree == 50 && std::abs(peak - 5.02519) <= 1e-4 && dt < 30.0;
    return {ok, fmt("%d/50 within 1e-3 (worst %.2e); resonance peak %.6f (%.2f s)", agree, worst, peak, dt)};
}

Outcome cone_suite() {
    const auto t0 = Clock::now();
    const SelftestReport rep = geometry_selftest();
    const double dt = seconds_since(t0);
    std::ostringstream os;
    bool ok = true;
    for (const auto& c : rep.checks) {
        os << c.name << " " << c.passed << "/" << c.total << (c.informational ? " (info)" : "") << "; ";
        ok = ok && c.ok();
    }
    os << fmt("(%.2f s)", dt);
    return {ok && dt < 60.0, os.str()};
}

Outcome small_gain_consistency() {
    const auto t0 = Clock::now();
    const double margin = stability_margin(plant(), controller()).margin;
    std::mt19937_64 rng(808);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::uniform_int_distribution<int> order(1, 4);
    int hurwitz = 0;
    for (int i = 0; i < 200; ++i) {
        const auto r = oracle::random_stable(rng, order(rng), 2, 2, i % 2 == 0);
        const StateSpace raw(r.a, r.b, r.c, r.d);
        const StateSpace delta = raw.scaled(0.95 * margin * u(rng) / hinf_norm(raw).value);
        hurwitz += is_hurwitz(minimal_realization(channel_loop(plant(), controller(), {delta}))) ? 1 : 0;
    }
    const double dt = seconds_since(t0);
    return {hurwitz == 200 && dt < 60.0, fmt("%d/200 closed loops Hurwitz (%.2f s)", hurwitz, dt)};
}

Outcome quartet_gain() {
    const auto t0 = Clock::now();
    const double g = sim::operator_gain_estimate(sim::example_quartet(0.32, 100.0));
    const double dt = seconds_since(t0);
    return {g >= 0.288 && g <= 0.320 && dt < 30.0, fmt("estimate %.5f, required [0.288, 0.320] (%.2f s)", g, dt)};
}

Outcome channel_inversion() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double h = 1e-3;
    const std::size_t n = 20001;
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(n, 0.0), b(n, 0.0);
        const double scale = std::pow(10.0, -1.0 + 2.0 * u(rng));
        for (int k = 0; k < 5; ++k) {
            const double wa = 20.0 * u(rng), wb = 20.0 * u(rng), pa = 6.283 * u(rng), pb = 6.283 * u(rng);
            for (std::size_t i = 0; i < n; ++i) {
                a[i] += scale * std::sin(wa * static_cast<double>(i) * h + pa);
                b[i] += scale * std::sin(wb * static_cast<double>(i) * h + pb);
            }
        }
        const auto [v, w] = sim::example_channel_forward(0.32, 100.0, a, b, h);
        const auto [a2, b2] = sim::example_channel_inverse(0.32, 100.0, v, w, h);
        std::vector<double> da(n), db(n);
        for (std::size_t i = 0; i < n; ++i) {
            da[i] = a2[i] - a[i];
            db[i] = b2[i] - b[i];
        }
        const double T = static_cast<double>(n - 1) * h;
        worst = std::max(worst, sim::truncated_l2_joint({&da, &db}, h, T) / sim::truncated_l2_joint({&a, &b}, h, T));
    }
    const double dt = seconds_since(t0);
    return {worst <= 5e-3 && dt < 10.0, fmt("worst round-trip error %.2e over 50 inputs (%.2f s)", worst, dt)};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
    static const std::vector<std::pair<std::string, std::function<Outcome()>>> list{
        {"margin reproduction", margin_reproduction},
        {"stable-case certificate", [] { return certificate_case(0.32, 0.1, 0.381, 0.385, Verdict::certified); }},
        {"unstable-case certificate", [] { return certificate_case(0.4, 0.2, 0.522, 0.530, Verdict::not_certified); }},
        {"delay gap bound", delay_gap_bound},
        {"simulation qualitative behavior", simulation_reproduction},
        {"H-infinity norm suite", hinf_suite},
        {"cone geometry suite", cone_suite},
        {"small-gain consistency", small_gain_consistency},
        {"quartet gain estimate", quartet_gain},
        {"channel inversion", channel_inversion},
    };
    return list;
}

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--criterion" && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
            return 2;
        }
    }
    const auto& list = criteria();
    if (only < 0 || only > static_cast<int>(list.size())) {
        std::fprintf(stderr, "criterion must lie in 1..%zu\n", list.size());
        return 2;
    }
    int failed = 0;
    for (std::size_t k = 0; k < list.size(); ++k) {
        if (only != 0 && static_cast<int>(k + 1) != only) {
            continue;
        }
        Outcome o;
        try {
            o = list[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %2zu %s: %s - %s\n", k + 1, o.pass ? "PASS" : "FAIL", list[k].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
