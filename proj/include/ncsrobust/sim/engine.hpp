#pragma once

// Fixed-step execution of a block diagram. Every node produces one scalar
// signal; strict blocks read only their state, everything else is evaluated
// in a topological order of the instantaneous-dependency graph.

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ncsrobust/errors.hpp"
#include "ncsrobust/sim/blocks.hpp"
#include "ncsrobust/sim/scenario.hpp"

namespace ncsrobust::sim {

class Diagram {
public:
    int add_source(const std::string& name, std::vector<double> samples) {
        const int id = new_signal(name);
        sources_.push_back({id, std::move(samples)});
        return id;
    }

    /// Declares a signal to be produced later by a node.
    int declare(const std::string& name) { return new_signal(name); }

    void set_block(int out, int in, std::unique_ptr<Stepper> block) {
        nodes_.push_back({out, {{in, 1.0}}, std::move(block)});
    }

    void set_sum(int out, std::vector<std::pair<int, double>> terms) {
        nodes_.push_back({out, std::move(terms), nullptr});
    }

    [[nodiscard]] int signal(const std::string& name) const {
        const auto it = index_.find(name);
        if (it == index_.end()) {
            throw InputError("unknown signal '" + name + "'");
        }
        return it->second;
    }
    [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }

    /// Orders nodes; an instantaneous cycle raises WellPosednessError naming its signals.
    void compile() {
        const auto n = nodes_.size();
        std::vector<int> producer(names_.size(), -1);
        for (std::size_t i = 0; i < n; ++i) {
            producer[static_cast<std::size_t>(nodes_[i].out)] = static_cast<int>(i);
        }
        std::vector<std::vector<std::size_t>> deps(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (nodes_[i].block && nodes_[i].block->strict()) {
                continue;
            }
            for (const auto& [sig, coef] : nodes_[i].terms) {
                (void)coef;
                if (const int p = producer[static_cast<std::size_t>(sig)]; p >= 0) {
                    deps[i].push_back(static_cast<std::size_t>(p));
                }
            }
        }
        // depth-first topological sort with cycle reporting
        std::vector<int> mark(n, 0);
        std::vector<std::size_t> stack;
        order_.clear();
        const std::function<void(std::size_t)> visit = [&](std::size_t i) {
            if (mark[i] == 2) {
                return;
            }
            if (mark[i] == 1) {
                std::string cycle;
                auto it = std::find(stack.begin(), stack.end(), i);
                for (; it != stack.end(); ++it) {
                    cycle += names_[static_cast<std::size_t>(nodes_[*it].out)] + " -> ";
                }
                cycle += names_[static_cast<std::size_t>(nodes_[i].out)];
                throw WellPosednessError("algebraic loop without a strictly causal block: " + cycle);
            }
            mark[i] = 1;
            stack.push_back(i);
            for (std::size_t d : deps[i]) {
                visit(d);
            }
            stack.pop_back();
            mark[i] = 2;
            order_.push_back(i);
        };
        for (std::size_t i = 0; i < n; ++i) {
            visit(i);
        }
        compiled_ = true;
    }

    struct Run {
        std::vector<std::vector<double>> traces; // per signal
        bool diverged = false;
        std::optional<double> divergence_time;
        std::size_t steps = 0;
    };

    [[nodiscard]] Run run(std::size_t steps, double h, double limit = 1e9) {
        if (!compiled_) {
            compile();
        }
        for (auto& node : nodes_) {
            if (node.block) {
                node.block->reset();
            }
        }
        Run out;
        out.traces.assign(names_.size(), {});
        for (auto& t : out.traces) {
            t.reserve(steps);
        }
        std::vector<double> v(names_.size(), 0.0);
        for (std::size_t k = 0; k < steps; ++k) {
            for (const auto& src : sources_) {
                v[static_cast<std::size_t>(src.out)] = k < src.samples.size() ? src.samples[k] : 0.0;
            }
            for (const auto& node : nodes_) {
                if (node.block && node.block->strict()) {
                    v[static_cast<std::size_t>(node.out)] = node.block->evaluate(0.0);
                }
            }
            for (std::size_t i : order_) {
                const Node& node = nodes_[i];
                if (node.block) {
                    if (!node.block->strict()) {
                        v[static_cast<std::size_t>(node.out)] =
                            node.block->evaluate(v[static_cast<std::size_t>(node.terms.front().first)]);
                    }
                } else {
                    double acc = 0.0;
                    for (const auto& [sig, coef] : node.terms) {
                        acc += coef * v[static_cast<std::size_t>(sig)];
                    }
                    v[static_cast<std::size_t>(node.out)] = acc;
                }
            }
            bool bad = false;
            for (std::size_t s = 0; s < v.size(); ++s) {
                out.traces[s].push_back(v[s]);
                bad = bad || !std::isfinite(v[s]) || std::abs(v[s]) > limit;
            }
            out.steps = k + 1;
            if (bad) {
                out.diverged = true;
                out.divergence_time = static_cast<double>(k) * h;
                break;
            }
            for (auto& node : nodes_) {
                if (node.block) {
                    node.block->commit(v[static_cast<std::size_t>(node.terms.front().first)]);
                }
            }
        }
        return out;
    }

private:
    struct Node {
        int out;
        std::vector<std::pair<int, double>> terms; // block: single input with unit weight
        std::unique_ptr<Stepper> block;
    };
    struct Source {
        int out;
        std::vector<double> samples;
    };

    int new_signal(const std::string& name) {
        if (index_.count(name) != 0) {
            throw InputError("duplicate signal '" + name + "'");
        }
        const int id = static_cast<int>(names_.size());
        names_.push_back(name);
        index_[name] = id;
        return id;
    }

    std::vector<std::string> names_;
    std::map<std::string, int> index_;
    std::vector<Node> nodes_;
    std::vector<Source> sources_;
    std::vector<std::size_t> order_;
    bool compiled_ = false;
};

/// Port signal names in CSV order: p_k, q_k, then u_k, y_k, then v, w.
[[nodiscard]] inline std::vector<std::string> port_names(std::size_t stages) {
    std::vector<std::string> out;
    for (std::size_t k = 0; k <= stages; ++k) {
        out.push_back("p" + std::to_string(k));
        out.push_back("q" + std::to_string(k));
    }
    for (std::size_t k = 0; k <= stages; ++k) {
        out.push_back("u" + std::to_string(k));
        out.push_back("y" + std::to_string(k));
    }
    out.push_back("v");
    out.push_back("w");
    return out;
}

/// Builds the cascaded loop of a scenario (see scenario.hpp for the wiring).
[[nodiscard]] inline Diagram build_diagram(const Scenario& sc) {
    const std::size_t l = sc.stages();
    const std::size_t steps = sc.steps();
    Diagram g;
    for (std::size_t k = 0; k <= l; ++k) {
        for (char prefix : {'p', 'q'}) {
            const std::string port = prefix + std::to_string(k);
            std::vector<double> samples(steps, 0.0);
            for (const auto& inj : sc.injections) {
                if (inj.port == port) {
                    const auto s = injection_samples(inj, sc.h, steps);
                    for (std::size_t i = 0; i < steps; ++i) {
                        samples[i] += s[i];
                    }
                }
            }
            g.add_source(port, std::move(samples));
        }
    }
    const auto K = [](const char* base, std::size_t k) { return std::string(base) + std::to_string(k); };
    for (std::size_t k = 0; k <= l; ++k) {
        g.declare(K("u", k));
        g.declare(K("y", k));
        g.declare(K("a", k));
        g.declare(K("b", k));
    }
    g.declare("v");
    g.declare("w");

    // plant
    std::vector<std::unique_ptr<Stepper>> plant;
    if (sc.plant_delay_steps > 0) {
        plant.push_back(std::make_unique<DelayStepper>(sc.plant_delay_steps));
    }
    plant.push_back(std::make_unique<LinearStepper>(sc.plant, sc.h, sc.method));
    g.set_block(g.signal("y0"), g.signal("u0"), std::make_unique<SeriesStepper>(std::move(plant)));

    // cuts
    for (std::size_t k = 0; k <= l; ++k) {
        g.set_sum(g.signal(K("u", k)), {{g.signal(K("a", k)), 1.0}, {g.signal(K("p", k)), 1.0}});
        g.set_sum(g.signal(K("b", k)), {{g.signal(K("y", k)), 1.0}, {g.signal(K("q", k)), 1.0}});
    }

    // channels
    for (std::size_t k = 1; k <= l; ++k) {
        const Quartet& q = sc.channels[k - 1];
        const int a_prev = g.signal(K("a", k - 1));
        const int b_prev = g.signal(K("b", k - 1));
        std::vector<std::pair<int, double>> a_terms{{g.signal(K("u", k)), 1.0}};
        std::vector<std::pair<int, double>> y_terms{{b_prev, 1.0}};
        const std::string tag = "ch" + std::to_string(k) + ".";
        for (int i = 0; i < 4; ++i) {
            const auto& slot = detail::quartet_slot(q, i);
            if (!slot) {
                continue;
            }
            const int out = g.declare(tag + detail::quartet_keys[i]);
            const int in = (i == 0 || i == 2) ? a_prev : b_prev;
            g.set_block(out, in, instantiate(*slot, sc.h));
            if (i < 2) {
                a_terms.push_back({out, -1.0});
            } else {
                y_terms.push_back({out, 1.0});
            }
        }
        g.set_sum(a_prev, std::move(a_terms));
        g.set_sum(g.signal(K("y", k)), std::move(y_terms));
    }

    // controller
    g.set_sum(g.signal("w"), {{g.signal(K("b", l)), 1.0}});
    const StateSpace c = sc.positive_feedback ? sc.controller : sc.controller.scaled(-1.0);
    g.set_block(g.signal("v"), g.signal("w"), std::make_unique<LinearStepper>(c, sc.h, sc.method));
    g.set_sum(g.signal(K("a", l)), {{g.signal("v"), 1.0}});
    return g;
}

inline void check_well_posed(const Scenario& sc) {
    for (std::size_t k = 0; k < sc.channels.size(); ++k) {
        for (int i = 0; i < 4; ++i) {
            const auto& slot = detail::quartet_slot(sc.channels[k], i);
            if (slot && !is_strict(*slot)) {
                throw WellPosednessError("channel " + std::to_string(k + 1) + " " + detail::quartet_keys[i] +
                                         " is not strongly causal (instantaneous feedthrough); "
                                         "the uncertainty loop is algebraic");
            }
        }
    }
    Diagram g = build_diagram(sc);
    g.compile();
}

struct SimResult {
    double h = 1e-3;
    std::vector<std::string> ports;
    std::map<std::string, std::vector<double>> traces;
    bool diverged = false;
    std::optional<double> divergence_time;
    std::size_t steps = 0;

    [[nodiscard]] const std::vector<double>& trace(const std::string& port) const {
        const auto it = traces.find(port);
        if (it == traces.end()) {
            throw InputError("no trace for port '" + port + "'");
        }
        return it->second;
    }
};

[[nodiscard]] inline SimResult simulate(const Scenario& sc) {
    Diagram g = build_diagram(sc);
    auto run = g.run(sc.steps(), sc.h);
    SimResult out;
    out.h = sc.h;
    out.ports = port_names(sc.stages());
    for (const auto& name : out.ports) {
        out.traces[name] = std::move(run.traces[static_cast<std::size_t>(g.signal(name))]);
    }
    out.diverged = run.diverged;
    out.divergence_time = run.divergence_time;
    out.steps = run.steps;
    return out;
}

} // namespace ncsrobust::sim
