#pragma once

// LTI assembly of the cascaded loop P -- T_1 -- ... -- T_l -- C with
// T_k = I + Delta_k, using the cut conventions of sim/scenario.hpp:
//   u_k = a_k + p_k,  b_k = y_k + q_k,
//   u_k = a_{k-1} + Delta_k^(1)(a_{k-1}, b_{k-1}),
//   y_k = b_{k-1} + Delta_k^(2)(a_{k-1}, b_{k-1}),
//   y_0 = P u_0,  a_l = C b_l.

#include <vector>

#include "ncsrobust/errors.hpp"
#include "ncsrobust/lti.hpp"

namespace ncsrobust {

/// Closed loop from d = [p_0; q_0; ...; p_l; q_l] to z = [u_0; ...; u_l; y_0; ...; y_l].
/// Each Delta_k maps [a; b] (m + p inputs) to m + p outputs.
[[nodiscard]] inline StateSpace channel_loop(const StateSpace& plant, const StateSpace& controller,
                                             const std::vector<StateSpace>& deltas) {
    const auto m = plant.inputs();
    const auto p = plant.outputs();
    if (controller.inputs() != p || controller.outputs() != m) {
        throw InputError("channel_loop: controller must map plant outputs to plant inputs");
    }
    const auto l = static_cast<Eigen::Index>(deltas.size());
    for (const auto& d : deltas) {
        if (d.inputs() != m + p || d.outputs() != m + p) {
            throw InputError("channel_loop: each Delta must be (m+p) x (m+p)");
        }
    }
    std::vector<StateSpace> parts{plant, controller};
    parts.insert(parts.end(), deltas.begin(), deltas.end());
    const StateSpace g = block_diagonal(parts);

    const Eigen::Index ny = p + m + l * (m + p);
    const Eigen::Index nd = (l + 1) * (m + p);
    struct Lin {
        Matrix y, d;
        Lin operator+(const Lin& o) const { return {y + o.y, d + o.d}; }
        Lin operator-(const Lin& o) const { return {y - o.y, d - o.d}; }
    };
    const auto pick_y = [&](Eigen::Index off, Eigen::Index rows) {
        Lin s{Matrix::Zero(rows, ny), Matrix::Zero(rows, nd)};
        s.y.block(0, off, rows, rows) = Matrix::Identity(rows, rows);
        return s;
    };
    const auto pick_d = [&](Eigen::Index off, Eigen::Index rows) {
        Lin s{Matrix::Zero(rows, ny), Matrix::Zero(rows, nd)};
        s.d.block(0, off, rows, rows) = Matrix::Identity(rows, rows);
        return s;
    };
    const auto delta1 = [&](Eigen::Index k) { return pick_y(p + m + (k - 1) * (m + p), m); };
    const auto delta2 = [&](Eigen::Index k) { return pick_y(p + m + (k - 1) * (m + p) + m, p); };
    const auto inj_p = [&](Eigen::Index k) { return pick_d(k * (m + p), m); };
    const auto inj_q = [&](Eigen::Index k) { return pick_d(k * (m + p) + m, p); };

    std::vector<Lin> a(static_cast<std::size_t>(l + 1)), u(static_cast<std::size_t>(l + 1));
    std::vector<Lin> b(static_cast<std::size_t>(l + 1)), y(static_cast<std::size_t>(l + 1));
    const auto at = [](Eigen::Index k) { return static_cast<std::size_t>(k); };
    a[at(l)] = pick_y(p, m); // controller output v
    for (Eigen::Index k = l; k >= 1; --k) {
        u[at(k)] = a[at(k)] + inj_p(k);
        a[at(k - 1)] = u[at(k)] - delta1(k);
    }
    u[0] = a[0] + inj_p(0);
    y[0] = pick_y(0, p);
    b[0] = y[0] + inj_q(0);
    for (Eigen::Index k = 1; k <= l; ++k) {
        y[at(k)] = b[at(k - 1)] + delta2(k);
        b[at(k)] = y[at(k)] + inj_q(k);
    }

    const Eigen::Index nu = g.inputs();
    Matrix kk(nu, ny), ee(nu, nd);
    Eigen::Index row = 0;
    const auto put = [&](Matrix& dy, Matrix& dd, const Lin& s) {
        dy.middleRows(row, s.y.rows()) = s.y;
        dd.middleRows(row, s.d.rows()) = s.d;
        row += s.y.rows();
    };
    put(kk, ee, u[0]);
    put(kk, ee, b[at(l)]);
    for (Eigen::Index k = 1; k <= l; ++k) {
        put(kk, ee, a[at(k - 1)]);
        put(kk, ee, b[at(k - 1)]);
    }

    const Eigen::Index nz = (l + 1) * (m + p);
    Matrix ff(nz, ny), hh(nz, nd);
    row = 0;
    for (Eigen::Index k = 0; k <= l; ++k) {
        put(ff, hh, u[at(k)]);
    }
    for (Eigen::Index k = 0; k <= l; ++k) {
        put(ff, hh, y[at(k)]);
    }
    return interconnect(g, kk, ee, ff, hh);
}

} // namespace ncsrobust
