#pragma once

// Scalar nonlinear operator blocks: descriptors, strictness rules and the
// stepping objects used by the simulator.

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "ncsrobust/config.hpp"
#include "ncsrobust/errors.hpp"
#include "ncsrobust/lti.hpp"
#include "ncsrobust/sim/discretize.hpp"

namespace ncsrobust::sim {

struct NonlinearBlock;

struct LinearBlock {
    StateSpace sys; // continuous time, SISO
};
struct Saturation {
    double limit = 1.0;
};
struct Table {
    std::vector<double> x; // strictly increasing breakpoints
    std::vector<double> y; // held constant beyond the ends
};
struct Delay {
    int steps = 1;
};
struct Gain {
    double k = 1.0;
};
struct Series {
    std::vector<NonlinearBlock> items; // applied first to last
};
struct Sum {
    std::vector<NonlinearBlock> items;
};

struct NonlinearBlock {
    std::variant<LinearBlock, Saturation, Table, Delay, Gain, Series, Sum> kind;
};

// ---- descriptor helpers ------------------------------------------------------

[[nodiscard]] inline NonlinearBlock linear(const StateSpace& s) { return {LinearBlock{s}}; }
[[nodiscard]] inline NonlinearBlock saturation(double limit = 1.0) { return {Saturation{limit}}; }
[[nodiscard]] inline NonlinearBlock delay(int steps) { return {Delay{steps}}; }
[[nodiscard]] inline NonlinearBlock gain(double k) { return {Gain{k}}; }
[[nodiscard]] inline NonlinearBlock series(std::vector<NonlinearBlock> items) { return {Series{std::move(items)}}; }
[[nodiscard]] inline NonlinearBlock sum(std::vector<NonlinearBlock> items) { return {Sum{std::move(items)}}; }

/// True iff the output at step t depends only on inputs before t.
[[nodiscard]] inline bool is_strict(const NonlinearBlock& b) {
    struct V {
        bool operator()(const LinearBlock& l) const { return l.sys.strictly_proper(); }
        bool operator()(const Saturation&) const { return false; }
        bool operator()(const Table&) const { return false; }
        bool operator()(const Delay& d) const { return d.steps >= 1; }
        bool operator()(const Gain& g) const { return g.k == 0.0; }
        bool operator()(const Series& s) const { return std::any_of(s.items.begin(), s.items.end(), is_strict); }
        bool operator()(const Sum& s) const { return std::all_of(s.items.begin(), s.items.end(), is_strict); }
    };
    return std::visit(V{}, b.kind);
}

inline void validate(const NonlinearBlock& b) {
    struct V {
        void operator()(const LinearBlock& l) const {
            if (l.sys.inputs() != 1 || l.sys.outputs() != 1) {
                throw InputError("linear block must be single-input single-output");
            }
        }
        void operator()(const Saturation& s) const {
            if (!(s.limit > 0.0)) {
                throw InputError("saturation limit must be positive");
            }
        }
        void operator()(const Table& t) const {
            if (t.x.size() < 2 || t.x.size() != t.y.size()) {
                throw InputError("table needs matching x and y lists with at least two points");
            }
            for (std::size_t i = 1; i < t.x.size(); ++i) {
                if (!(t.x[i] > t.x[i - 1])) {
                    throw InputError("table breakpoints must be strictly increasing");
                }
            }
            // The block must fix zero.
            const double at0 = [&] {
                if (0.0 <= t.x.front()) {
                    return t.y.front();
                }
                if (0.0 >= t.x.back()) {
                    return t.y.back();
                }
                const auto k = static_cast<std::size_t>(std::upper_bound(t.x.begin(), t.x.end(), 0.0) - t.x.begin());
                const double w = (0.0 - t.x[k - 1]) / (t.x[k] - t.x[k - 1]);
                return t.y[k - 1] + w * (t.y[k] - t.y[k - 1]);
            }();
            if (at0 != 0.0) {
                throw InputError("table must map 0 to 0");
            }
        }
        void operator()(const Delay& d) const {
            if (d.steps < 0) {
                throw InputError("delay steps must be non-negative");
            }
        }
        void operator()(const Gain& g) const {
            if (!std::isfinite(g.k)) {
                throw InputError("gain must be finite");
            }
        }
        void operator()(const Series& s) const {
            if (s.items.empty()) {
                throw InputError("series block needs at least one item");
            }
            for (const auto& i : s.items) {
                validate(i);
            }
        }
        void operator()(const Sum& s) const {
            if (s.items.empty()) {
                throw InputError("sum block needs at least one item");
            }
            for (const auto& i : s.items) {
                validate(i);
            }
        }
    };
    std::visit(V{}, b.kind);
}

// ---- JSON --------------------------------------------------------------------

[[nodiscard]] inline NonlinearBlock parse_block(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        throw InputError(where + ": block needs a string 'kind'");
    }
    const std::string kind = j.at("kind").get<std::string>();
    const auto num = [&](const char* key, double fallback) {
        if (!j.contains(key)) {
            return fallback;
        }
        if (!j.at(key).is_number()) {
            throw InputError(where + ": '" + key + "' must be a number");
        }
        return j.at(key).get<double>();
    };
    const auto list = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_array()) {
            throw InputError(where + ": '" + key + "' must be an array");
        }
        std::vector<NonlinearBlock> out;
        for (std::size_t i = 0; i < j.at(key).size(); ++i) {
            out.push_back(parse_block(j.at(key)[i], where + "." + key + "[" + std::to_string(i) + "]"));
        }
        return out;
    };
    NonlinearBlock b;
    if (kind == "linear" || kind == "linear_ss") {
        b = linear(parse_system(j, where));
    } else if (kind == "saturation" || kind == "static_saturation") {
        b = saturation(num("limit", 1.0));
    } else if (kind == "table" || kind == "static_custom") {
        b = {Table{detail::number_list(j.value("x", json()), where + ".x"),
                   detail::number_list(j.value("y", json()), where + ".y")}};
    } else if (kind == "delay") {
        const double s = num("steps", 1.0);
        if (s != std::floor(s)) {
            throw InputError(where + ": delay steps must be an integer");
        }
        b = delay(static_cast<int>(s));
    } else if (kind == "gain") {
        b = gain(num("k", 1.0));
    } else if (kind == "scale") {
        b = gain(num("alpha", 1.0));
    } else if (kind == "series") {
        b = series(list("blocks"));
    } else if (kind == "sum") {
        b = sum(list("blocks"));
    } else {
        throw InputError(where + ": unknown block kind '" + kind + "'");
    }
    try {
        validate(b);
    } catch (const InputError& e) {
        throw InputError(where + ": " + e.what());
    }
    return b;
}

[[nodiscard]] inline json block_to_json(const NonlinearBlock& b) {
    struct V {
        json operator()(const LinearBlock& l) const {
            json j = system_to_json(l.sys);
            j["kind"] = "linear";
            return j;
        }
        json operator()(const Saturation& s) const { return {{"kind", "saturation"}, {"limit", s.limit}}; }
        json operator()(const Table& t) const { return {{"kind", "table"}, {"x", t.x}, {"y", t.y}}; }
        json operator()(const Delay& d) const { return {{"kind", "delay"}, {"steps", d.steps}}; }
        json operator()(const Gain& g) const { return {{"kind", "gain"}, {"k", g.k}}; }
        json operator()(const Series& s) const {
            json items = json::array();
            for (const auto& i : s.items) {
                items.push_back(block_to_json(i));
            }
            return {{"kind", "series"}, {"blocks", items}};
        }
        json operator()(const Sum& s) const {
            json items = json::array();
            for (const auto& i : s.items) {
                items.push_back(block_to_json(i));
            }
            return {{"kind", "sum"}, {"blocks", items}};
        }
    };
    return std::visit(V{}, b.kind);
}

// ---- stepping objects ----------------------------------------------------------

/// evaluate() reads the output for the current step without touching state;
/// strict blocks ignore their argument. commit() advances one step.
class Stepper {
public:
    virtual ~Stepper() = default;
    [[nodiscard]] virtual double evaluate(double u) const = 0;
    virtual void commit(double u) = 0;
    virtual void reset() = 0;
    [[nodiscard]] virtual bool strict() const = 0;
};

class LinearStepper final : public Stepper {
public:
    LinearStepper(const StateSpace& continuous, double h, Method method = Method::zoh)
        : d_(discretize(continuous, h, method)) {
        x_ = Vector::Zero(d_.states());
        b_ = d_.b().col(0);
        c_ = d_.c().row(0);
        dd_ = d_.d()(0, 0);
    }
    [[nodiscard]] double evaluate(double u) const override {
        const double y = d_.states() > 0 ? c_.dot(x_) : 0.0;
        return dd_ == 0.0 ? y : y + dd_ * u;
    }
    void commit(double u) override {
        if (d_.states() > 0) {
            x_ = d_.a() * x_ + b_ * u;
        }
    }
    void reset() override { x_.setZero(); }
    [[nodiscard]] bool strict() const override { return dd_ == 0.0; }

private:
    StateSpace d_;
    Vector x_, b_, c_;
    double dd_ = 0.0;
};

class FunctionStepper final : public Stepper {
public:
    template <class F>
    explicit FunctionStepper(F f) : f_(std::move(f)) {}
    [[nodiscard]] double evaluate(double u) const override { return f_(u); }
    void commit(double) override {}
    void reset() override {}
    [[nodiscard]] bool strict() const override { return false; }

private:
    std::function<double(double)> f_;
};

class GainStepper final : public Stepper {
public:
    explicit GainStepper(double k) : k_(k) {}
    [[nodiscard]] double evaluate(double u) const override { return k_ == 0.0 ? 0.0 : k_ * u; }
    void commit(double) override {}
    void reset() override {}
    [[nodiscard]] bool strict() const override { return k_ == 0.0; }

private:
    double k_;
};

class DelayStepper final : public Stepper {
public:
    explicit DelayStepper(int steps) : buf_(static_cast<std::size_t>(steps), 0.0) {}
    [[nodiscard]] double evaluate(double u) const override { return buf_.empty() ? u : buf_.front(); }
    void commit(double u) override {
        if (!buf_.empty()) {
            buf_.pop_front();
            buf_.push_back(u);
        }
    }
    void reset() override { std::fill(buf_.begin(), buf_.end(), 0.0); }
    [[nodiscard]] bool strict() const override { return !buf_.empty(); }

private:
    std::deque<double> buf_;
};

class SeriesStepper final : public Stepper {
public:
    explicit SeriesStepper(std::vector<std::unique_ptr<Stepper>> items) : items_(std::move(items)) {
        strict_ = std::any_of(items_.begin(), items_.end(), [](const auto& s) { return s->strict(); });
    }
    [[nodiscard]] double evaluate(double u) const override {
        double v = u;
        for (const auto& s : items_) {
            v = s->evaluate(v);
        }
        return v;
    }
    void commit(double u) override {
        double v = u;
        for (auto& s : items_) {
            const double next = s->evaluate(v);
            s->commit(v);
            v = next;
        }
    }
    void reset() override {
        for (auto& s : items_) {
            s->reset();
        }
    }
    [[nodiscard]] bool strict() const override { return strict_; }

private:
    std::vector<std::unique_ptr<Stepper>> items_;
    bool strict_ = false;
};

class SumStepper final : public Stepper {
public:
    explicit SumStepper(std::vector<std::unique_ptr<Stepper>> items) : items_(std::move(items)) {
        strict_ = std::all_of(items_.begin(), items_.end(), [](const auto& s) { return s->strict(); });
    }
    [[nodiscard]] double evaluate(double u) const override {
        double v = 0.0;
        for (const auto& s : items_) {
            v += s->evaluate(u);
        }
        return v;
    }
    void commit(double u) override {
        for (auto& s : items_) {
            s->commit(u);
        }
    }
    void reset() override {
        for (auto& s : items_) {
            s->reset();
        }
    }
    [[nodiscard]] bool strict() const override { return strict_; }

private:
    std::vector<std::unique_ptr<Stepper>> items_;
    bool strict_ = false;
};

[[nodiscard]] inline std::unique_ptr<Stepper> instantiate(const NonlinearBlock& b, double h) {
    struct V {
        double h;
        std::unique_ptr<Stepper> operator()(const LinearBlock& l) const {
            return std::make_unique<LinearStepper>(l.sys, h);
        }
        std::unique_ptr<Stepper> operator()(const Saturation& s) const {
            const double lim = s.limit;
            return std::make_unique<FunctionStepper>([lim](double u) { return std::clamp(u, -lim, lim); });
        }
        std::unique_ptr<Stepper> operator()(const Table& t) const {
            return std::make_unique<FunctionStepper>([x = t.x, y = t.y](double u) {
                if (u <= x.front()) {
                    return y.front();
                }
                if (u >= x.back()) {
                    return y.back();
                }
                const auto k = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), u) - x.begin());
                const double w = (u - x[k - 1]) / (x[k] - x[k - 1]);
                return y[k - 1] + w * (y[k] - y[k - 1]);
            });
        }
        std::unique_ptr<Stepper> operator()(const Delay& d) const { return std::make_unique<DelayStepper>(d.steps); }
        std::unique_ptr<Stepper> operator()(const Gain& g) const { return std::make_unique<GainStepper>(g.k); }
        std::unique_ptr<Stepper> operator()(const Series& s) const {
            std::vector<std::unique_ptr<Stepper>> items;
            for (const auto& i : s.items) {
                items.push_back(std::visit(*this, i.kind));
            }
            return std::make_unique<SeriesStepper>(std::move(items));
        }
        std::unique_ptr<Stepper> operator()(const Sum& s) const {
            std::vector<std::unique_ptr<Stepper>> items;
            for (const auto& i : s.items) {
                items.push_back(std::visit(*this, i.kind));
            }
            return std::make_unique<SumStepper>(std::move(items));
        }
    };
    validate(b);
    return std::visit(V{h}, b.kind);
}

} // namespace ncsrobust::sim
