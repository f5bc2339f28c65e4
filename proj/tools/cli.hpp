#pragma once

// ncsrobust command line: margin, nugap, certify, simulate, geometry-selftest,
// paper-example. run() does all the work and returns a report; main() prints it.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ncsrobust/certificate.hpp"
#include "ncsrobust/cone_geometry.hpp"
#include "ncsrobust/config.hpp"
#include "ncsrobust/errors.hpp"
#include "ncsrobust/gap.hpp"
#include "ncsrobust/hinf.hpp"
#include "ncsrobust/sim/analysis.hpp"
#include "ncsrobust/sim/engine.hpp"
#include "ncsrobust/sim/io.hpp"
#include "ncsrobust/sim/paper_example.hpp"
#include "ncsrobust/sim/scenario.hpp"

namespace ncsrobust::cli {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int not_certified = 1;
inline constexpr int usage = 2;
inline constexpr int input = 3;
inline constexpr int domain = 4;
} // namespace exit_code

struct RunReport {
    std::string command;
    json inputs = json::object();
    json outputs = json::object();
    int exit_code = exit_code::ok;
    std::string text; // what main() prints: outputs, usage or an error line
};

// ---- output helpers ------------------------------------------------------------

[[nodiscard]] inline double round_significant(double x, int digits) {
    if (!std::isfinite(x) || x == 0.0) {
        return x;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return std::strtod(buf, nullptr);
}

/// Rounds every float in j to `digits` significant digits; non-finite values become strings.
[[nodiscard]] inline json with_precision(const json& j, int digits) {
    if (j.is_object()) {
        json out = json::object();
        for (auto it = j.begin(); it != j.end(); ++it) {
            out[it.key()] = with_precision(it.value(), digits);
        }
        return out;
    }
    if (j.is_array()) {
        json out = json::array();
        for (const auto& v : j) {
            out.push_back(with_precision(v, digits));
        }
        return out;
    }
    if (j.is_number_float()) {
        const double x = j.get<double>();
        if (std::isnan(x)) {
            return "nan";
        }
        if (std::isinf(x)) {
            return x > 0 ? "inf" : "-inf";
        }
        return round_significant(x, digits);
    }
    return j;
}

[[nodiscard]] inline int default_precision() {
    if (const char* env = std::getenv("NCSROBUST_PRECISION")) {
        const int p = std::atoi(env);
        if (p >= 1 && p <= 17) {
            return p;
        }
    }
    return 6;
}

/// Accepts paths given with or without the .json suffix.
[[nodiscard]] inline std::string resolve_path(const std::string& path) {
    namespace fs = std::filesystem;
    if (fs::exists(path) || !fs::exists(path + ".json")) {
        return path;
    }
    return path + ".json";
}

[[nodiscard]] inline json margin_json(const MarginResult& m) {
    return {{"norm", m.norm},
            {"margin", m.margin},
            {"arcsin_margin", m.arcsin_margin},
            {"peak_omega", m.peak_omega},
            {"method", to_string(m.method)}};
}

[[nodiscard]] inline json gap_json(const GapResult& g) {
    return {{"value", g.value},
            {"winding_ok", g.winding_ok},
            {"peak_omega", g.peak_omega},
            {"winding_number", g.winding_number},
            {"lower_is_nu_gap", g.lower_is_nu_gap},
            {"warnings", g.warnings}};
}

[[nodiscard]] inline json delay_gap_json(const DelayGapEstimate& e) {
    return {{"value", e.value},  {"orders", e.orders},           {"values", e.values},
            {"spread", e.spread}, {"stabilizing", e.stabilizing}, {"winding_ok", e.winding_ok}};
}

[[nodiscard]] inline json certificate_json(const Certificate& c, const UncertaintyBudget& b) {
    return {{"lhs", c.lhs},
            {"rhs", c.rhs},
            {"slack", c.slack},
            {"verdict", to_string(c.verdict)},
            {"margin", c.margin},
            {"norm", c.norm},
            {"strongly_causal", c.strongly_causal},
            {"r_p", b.r_p},
            {"r_c", b.r_c},
            {"channel_radii", b.channel_radii},
            {"provenance", c.provenance}};
}

[[nodiscard]] inline std::string gap_provenance(const std::vector<int>& orders) {
    std::string s = "r_p = nu-gap between P and P with Pade-approximated delay (orders";
    for (std::size_t i = 0; i < orders.size(); ++i) {
        s += (i == 0 ? " " : ", ") + std::to_string(orders[i]);
    }
    return s + "); the nu-gap is a lower bound on the gap metric";
}

/// Budget of a scenario: r_p from its uncertainty block, channel radii from gain bounds.
[[nodiscard]] inline std::pair<UncertaintyBudget, json> scenario_budget(const sim::Scenario& sc) {
    UncertaintyBudget b;
    json extra = json::object();
    if (sc.r_p.delay_gap) {
        const auto est = delay_gap_estimate(sc.plant, *sc.r_p.delay_gap, sc.r_p.orders);
        b.r_p = est.value;
        b.provenance = gap_provenance(sc.r_p.orders);
        extra["gap"] = delay_gap_json(est);
        extra["gap"]["delay"] = *sc.r_p.delay_gap;
    } else {
        b.r_p = sc.r_p.value;
        b.provenance = "declared radii";
    }
    b.r_c = sc.r_c;
    for (const auto& q : sc.channels) {
        b.channel_radii.push_back(q.declared_gain);
    }
    return {b, extra};
}

[[nodiscard]] inline StateSpace loop_controller(const sim::Scenario& sc) {
    return sc.positive_feedback ? sc.controller : sc.controller.scaled(-1.0);
}

[[nodiscard]] inline json simulation_json(const sim::Scenario& sc, const sim::SimResult& res,
                                          const std::vector<double>& windows) {
    json j;
    j["steps"] = res.steps;
    j["h"] = res.h;
    j["diverged"] = res.diverged;
    j["divergence_time"] = res.divergence_time ? json(*res.divergence_time) : json(nullptr);
    const auto& y0 = res.trace("y0");
    j["output_peak"] = sim::peak_abs(y0);
    j["tail_to_peak"] = sim::tail_to_peak(y0);
    j["windowed_peaks"] = sim::windowed_peaks(y0, 4);
    json gains = json::array();
    std::vector<std::string> outputs;
    for (std::size_t k = 0; k <= sc.stages(); ++k) {
        outputs.push_back("u" + std::to_string(k));
        outputs.push_back("y" + std::to_string(k));
    }
    std::vector<std::string> seen;
    for (const auto& inj : sc.injections) {
        if (std::find(seen.begin(), seen.end(), inj.port) != seen.end()) {
            continue;
        }
        seen.push_back(inj.port);
        json w = json::array();
        json notices = json::array();
        for (const auto& g : sim::finite_gain_estimate(res, {inj.port}, outputs, windows)) {
            if (g.skipped) {
                notices.push_back("window T = " + std::to_string(g.horizon) + " skipped: zero input norm");
            } else {
                w.push_back({{"T", g.horizon}, {"ratio", g.ratio}});
            }
        }
        gains.push_back({{"input", inj.port}, {"windows", w}, {"notices", notices}});
    }
    j["finite_gain"] = gains;
    j["warnings"] = sc.warnings;
    return j;
}

[[nodiscard]] inline std::vector<double> default_windows(double duration) {
    std::vector<double> w;
    for (int i = 1; i <= 4; ++i) {
        w.push_back(duration * i / 4.0);
    }
    return w;
}

[[nodiscard]] inline std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

[[nodiscard]] inline std::string with_suffix(const std::string& path, const std::string& tag, std::size_t count) {
    if (count <= 1) {
        return path;
    }
    const std::filesystem::path p(path);
    return (p.parent_path() / (p.stem().string() + "_" + tag + p.extension().string())).string();
}

// ---- run -------------------------------------------------------------------------

[[nodiscard]] inline RunReport run(const std::vector<std::string>& argv) {
    CLI::App app{"Robust stability margins, nu-gap and simulation for two-port networked control loops",
                 "ncsrobust"};
    app.require_subcommand(1);
    int precision = default_precision();
    app.add_option("--precision", precision, "significant digits in JSON output (default 6, env NCSROBUST_PRECISION)")
        ->check(CLI::Range(1, 17));

    std::string plant_file, controller_file, scenario_file, p1_file, p2_file;
    auto* margin = app.add_subcommand("margin", "norm of the Gang of Four, stability margin and its arcsine");
    margin->add_option("--plant", plant_file, "plant descriptor (JSON)");
    margin->add_option("--controller", controller_file, "controller descriptor (JSON)");
    margin->add_option("--scenario", scenario_file, "take plant and controller from a scenario");

    double delay = -1.0;
    std::vector<int> orders{3, 4, 5};
    auto* nugap = app.add_subcommand("nugap", "nu-gap between two systems, or between P and P with an input delay");
    nugap->add_option("--p1", p1_file, "first system")->required();
    nugap->add_option("--p2", p2_file, "second system");
    nugap->add_option("--delay", delay, "compare P1 with P1 preceded by this delay (Pade approximated)");
    nugap->add_option("--orders", orders, "Pade orders for --delay")->delimiter(',');

    std::vector<double> radii;
    double r_p = -1.0, r_c = -1.0;
    auto* certify = app.add_subcommand("certify", "evaluate the arcsine robust-stability condition");
    certify->add_option("--scenario", scenario_file, "scenario file")->required();
    certify->add_option("--r-p", r_p, "override the plant radius");
    certify->add_option("--r-c", r_c, "override the controller radius");
    certify->add_option("--radii", radii, "override the channel radii")->delimiter(',');

    std::vector<std::string> scenario_files;
    std::string out_file, plot_file, plot_ports = "y0,u0";
    unsigned jobs = 1;
    auto* simulate = app.add_subcommand("simulate", "fixed-step simulation of scenario files");
    simulate->add_option("--scenario", scenario_files, "scenario file(s)")->required();
    simulate->add_option("--out", out_file, "CSV trace output");
    simulate->add_option("--plot", plot_file, "SVG plot output");
    simulate->add_option("--ports", plot_ports, "comma-separated ports to plot");
    simulate->add_option("--jobs", jobs, "concurrent runs")->check(CLI::Range(1u, 256u));

    std::uint64_t seed = 2024;
    auto* selftest = app.add_subcommand("geometry-selftest", "sampled checks of the cone characterizations");
    selftest->add_option("--seed", seed, "random seed");

    std::string which = "stable", write_scenario;
    double alpha = 100.0, h = 1e-3, duration = 40.0;
    auto* example = app.add_subcommand("paper-example", "gap estimate, certificate and simulation of the worked example");
    example->add_option("--case", which, "stable | unstable")->check(CLI::IsMember({"stable", "unstable"}));
    example->add_option("--alpha", alpha, "bandwidth of the strictly proper filter g");
    example->add_option("--step", h, "step size h");
    example->add_option("--duration", duration, "simulated time");
    example->add_option("--out", out_file, "CSV trace output");
    example->add_option("--plot", plot_file, "SVG plot output");
    example->add_option("--write-scenario", write_scenario, "write the scenario descriptor and exit");

    RunReport report;
    try {
        std::vector<std::string> args(argv.rbegin(), argv.rend());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        report.command = "help";
        report.text = app.help();
        return report;
    } catch (const CLI::ParseError& e) {
        report.command = argv.empty() ? "" : argv.front();
        report.exit_code = exit_code::usage;
        report.text = std::string(e.what()) + "\n\n" + app.help();
        return report;
    }

    const auto finish = [&](RunReport& r) {
        r.outputs = with_precision(r.outputs, precision);
        r.text = r.outputs.dump(2) + "\n";
    };

    try {
        if (*margin) {
            report.command = "margin";
            StateSpace plant, controller;
            if (!scenario_file.empty()) {
                const auto sc = sim::build_scenario(load_json_file(resolve_path(scenario_file)));
                plant = sc.plant;
                controller = loop_controller(sc);
                report.inputs = sc.descriptor;
            } else {
                if (plant_file.empty() || controller_file.empty()) {
                    throw InputError("margin needs --plant and --controller, or --scenario");
                }
                plant = load_system_file(resolve_path(plant_file));
                controller = load_system_file(resolve_path(controller_file));
                report.inputs = {{"plant", system_to_json(plant)}, {"controller", system_to_json(controller)}};
            }
            report.outputs = margin_json(stability_margin(plant, controller));
        } else if (*nugap) {
            report.command = "nugap";
            const StateSpace a = load_system_file(resolve_path(p1_file));
            report.inputs["p1"] = system_to_json(a);
            if (delay >= 0.0) {
                report.inputs["delay"] = delay;
                report.inputs["orders"] = orders;
                report.outputs = delay_gap_json(delay_gap_estimate(a, delay, orders));
            } else {
                if (p2_file.empty()) {
                    throw InputError("nugap needs --p2 or --delay");
                }
                const StateSpace b = load_system_file(resolve_path(p2_file));
                report.inputs["p2"] = system_to_json(b);
                report.outputs = gap_json(nu_gap(a, b));
            }
        } else if (*certify) {
            report.command = "certify";
            const auto sc = sim::build_scenario(load_json_file(resolve_path(scenario_file)));
            report.inputs = sc.descriptor;
            auto [budget, extra] = scenario_budget(sc);
            if (r_p >= 0.0) {
                budget.r_p = r_p;
                budget.provenance = "declared radii";
                extra.erase("gap");
            }
            if (r_c >= 0.0) {
                budget.r_c = r_c;
            }
            if (!radii.empty()) {
                budget.channel_radii = radii;
            }
            const Certificate c = arcsine_certificate(sc.plant, loop_controller(sc), budget);
            report.outputs = certificate_json(c, budget);
            report.outputs.update(extra);
            report.exit_code = c.verdict == Verdict::certified ? exit_code::ok : exit_code::not_certified;
        } else if (*simulate) {
            report.command = "simulate";
            std::vector<sim::Scenario> scenarios;
            for (const auto& f : scenario_files) {
                scenarios.push_back(sim::build_scenario(load_json_file(resolve_path(f))));
                report.inputs[f] = scenarios.back().descriptor;
            }
            std::vector<sim::SimResult> results(scenarios.size());
            std::atomic<std::size_t> next{0};
            const auto worker = [&] {
                for (std::size_t i = next++; i < scenarios.size(); i = next++) {
                    results[i] = sim::simulate(scenarios[i]);
                }
            };
            std::vector<std::thread> pool;
            for (unsigned t = 1; t < std::min<std::size_t>(jobs, scenarios.size()); ++t) {
                pool.emplace_back(worker);
            }
            worker();
            for (auto& t : pool) {
                t.join();
            }
            json runs = json::array();
            for (std::size_t i = 0; i < scenarios.size(); ++i) {
                json j = simulation_json(scenarios[i], results[i], default_windows(scenarios[i].duration));
                j["scenario"] = scenario_files[i];
                const std::string tag = std::filesystem::path(scenario_files[i]).stem().string();
                if (!out_file.empty()) {
                    const auto path = with_suffix(out_file, tag, scenarios.size());
                    sim::write_csv(path, results[i]);
                    j["csv"] = path;
                }
                if (!plot_file.empty()) {
                    const auto path = with_suffix(plot_file, tag, scenarios.size());
                    sim::write_svg(path, results[i], split_csv_list(plot_ports), tag);
                    j["svg"] = path;
                }
                runs.push_back(j);
            }
            report.outputs = runs.size() == 1 ? runs.front() : json{{"runs", runs}};
        } else if (*selftest) {
            report.command = "geometry-selftest";
            report.inputs = {{"seed", seed}};
            const auto rep = geometry_selftest(seed);
            json checks = json::array();
            for (const auto& c : rep.checks) {
                checks.push_back({{"name", c.name},
                                  {"passed", c.passed},
                                  {"total", c.total},
                                  {"informational", c.informational},
                                  {"ok", c.ok()}});
            }
            report.outputs = {{"checks", checks}, {"ok", rep.ok()}};
            report.exit_code = rep.ok() ? exit_code::ok : exit_code::not_certified;
        } else if (*example) {
            report.command = "paper-example";
            const bool stable = which == "stable";
            const double r = stable ? 0.32 : 0.4;
            const double tau = stable ? 0.1 : 0.2;
            auto desc = sim::paper_example_descriptor(r, tau, alpha, h, duration);
            report.inputs = {{"case", which}, {"r", r}, {"tau", tau}, {"alpha", alpha}, {"h", h}, {"duration", duration}};
            if (!write_scenario.empty()) {
                std::ofstream out(write_scenario);
                if (!out) {
                    throw InputError("cannot write '" + write_scenario + "'");
                }
                out << desc.descriptor.dump(2) << "\n";
                report.outputs = {{"scenario", write_scenario}, {"warnings", desc.warnings}};
            } else {
                auto sc = sim::build_scenario(desc.descriptor);
                sc.warnings = desc.warnings;
                const auto [budget, extra] = scenario_budget(sc);
                const Certificate cert = arcsine_certificate(sc.plant, loop_controller(sc), budget);
                const auto res = sim::simulate(sc);
                json out;
                out["case"] = which;
                out["parameters"] = {{"r", r},
                                     {"tau", tau},
                                     {"alpha", alpha},
                                     {"h", h},
                                     {"duration", duration},
                                     {"delay_steps", sc.plant_delay_steps}};
                out["gap"] = extra.at("gap");
                out["certificate"] = certificate_json(cert, budget);
                out["simulation"] = simulation_json(sc, res, default_windows(duration));

                // Impulse at every injection port, one stage at a time.
                json stages = json::array();
                for (std::size_t k = 0; k <= sc.stages(); ++k) {
                    for (const char* pre : {"p", "q"}) {
                        sim::Scenario probe = sc;
                        probe.injections = {{pre + std::to_string(k), "impulse", {{"amplitude", 1.0}}}};
                        const auto pr = sim::simulate(probe);
                        const auto sj = simulation_json(probe, pr, default_windows(duration));
                        stages.push_back({{"input", probe.injections.front().port},
                                          {"diverged", pr.diverged},
                                          {"windows", sj.at("finite_gain").front().at("windows")}});
                    }
                }
                out["stage_gains"] = stages;
                if (!out_file.empty()) {
                    sim::write_csv(out_file, res);
                    out["csv"] = out_file;
                }
                if (!plot_file.empty()) {
                    sim::write_svg(plot_file, res, {"y0"}, which + " case, output y0");
                    out["svg"] = plot_file;
                }
                report.outputs = out;
            }
        }
        finish(report);
    } catch (const InputError& e) {
        report.exit_code = exit_code::input;
        report.outputs = {{"error", e.what()}, {"class", "input"}};
        report.text = std::string("error: ") + e.what() + "\n";
    } catch (const json::exception& e) {
        report.exit_code = exit_code::input;
        report.outputs = {{"error", e.what()}, {"class", "input"}};
        report.text = std::string("error: malformed input: ") + e.what() + "\n";
    } catch (const Error& e) {
        report.exit_code = exit_code::domain;
        report.outputs = {{"error", e.what()}, {"class", "domain"}};
        report.text = std::string("error: ") + e.what() + "\n";
    }
    return report;
}

} // namespace ncsrobust::cli
