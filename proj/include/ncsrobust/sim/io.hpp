#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ncsrobust/errors.hpp"
#include "ncsrobust/sim/engine.hpp"

namespace ncsrobust::sim {

[[nodiscard]] inline std::string format_g9(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

/// Header "t,<ports...>", one row per step, 9 significant digits.
inline void write_csv(std::ostream& os, const SimResult& res) {
    os << "t";
    for (const auto& p : res.ports) {
        os << ',' << p;
    }
    os << '\n';
    for (std::size_t i = 0; i < res.steps; ++i) {
        os << format_g9(static_cast<double>(i) * res.h);
        for (const auto& p : res.ports) {
            os << ',' << format_g9(res.trace(p)[i]);
        }
        os << '\n';
    }
}

inline void write_csv(const std::string& path, const SimResult& res) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write '" + path + "'");
    }
    write_csv(out, res);
}

/// Static SVG line chart of the selected ports against time.
inline void write_svg(std::ostream& os, const SimResult& res, const std::vector<std::string>& ports,
                      const std::string& title = "") {
    constexpr double W = 800, H = 420, L = 70, R = 130, T = 40, B = 50;
    const double pw = W - L - R, ph = H - T - B;
    double lo = 0.0, hi = 0.0;
    for (const auto& p : ports) {
        for (double v : res.trace(p)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (hi == lo) {
        hi = lo + 1.0;
    }
    const double tmax = std::max(res.h, static_cast<double>(res.steps > 0 ? res.steps - 1 : 0) * res.h);
    const auto X = [&](double t) { return L + pw * t / tmax; };
    const auto Y = [&](double v) { return T + ph * (hi - v) / (hi - lo); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty()) {
        os << "<text x=\"" << L << "\" y=\"24\" font-size=\"15\">" << title << "</text>\n";
    }
    for (int i = 0; i <= 5; ++i) {
        const double v = lo + (hi - lo) * i / 5.0;
        const double t = tmax * i / 5.0;
        os << "<line x1=\"" << L << "\" y1=\"" << Y(v) << "\" x2=\"" << L + pw << "\" y2=\"" << Y(v)
           << "\" stroke=\"#ddd\"/>\n";
        os << "<line x1=\"" << X(t) << "\" y1=\"" << T << "\" x2=\"" << X(t) << "\" y2=\"" << T + ph
           << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << L - 8 << "\" y=\"" << Y(v) + 4 << "\" text-anchor=\"end\">" << format_g9(std::round(v * 1e4) / 1e4)
           << "</text>\n";
        os << "<text x=\"" << X(t) << "\" y=\"" << T + ph + 18 << "\" text-anchor=\"middle\">"
           << format_g9(std::round(t * 1e3) / 1e3) << "</text>\n";
    }
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">t [s]</text>\n";

    // at most ~2000 vertices per line
    const std::size_t stride = std::max<std::size_t>(1, res.steps / 2000);
    for (std::size_t k = 0; k < ports.size(); ++k) {
        const auto& x = res.trace(ports[k]);
        const char* color = colors[k % 6];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < res.steps; i += stride) {
            os << X(static_cast<double>(i) * res.h) << ',' << Y(x[i]) << ' ';
        }
        os << "\"/>\n";
        const double ly = T + 16.0 * static_cast<double>(k + 1);
        os << "<line x1=\"" << L + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << L + pw + 32 << "\" y2=\"" << ly - 4
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << L + pw + 38 << "\" y=\"" << ly << "\">" << ports[k] << "</text>\n";
    }
    os << "</svg>\n";
}

inline void write_svg(const std::string& path, const SimResult& res, const std::vector<std::string>& ports,
                      const std::string& title = "") {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write '" + path + "'");
    }
    write_svg(out, res, ports, title);
}

} // namespace ncsrobust::sim
