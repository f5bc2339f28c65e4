#pragma once

// Independent reference computations for the test suite. Nothing here calls
// into the library's frequency-response, norm or gap code.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace oracle {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

/// Polynomial in descending powers, evaluated term by term.
inline cd poly(const std::vector<double>& c, cd s) {
    cd acc = 0.0;
    const auto n = c.size();
    for (std::size_t i = 0; i < n; ++i) {
        acc += c[i] * std::pow(s, static_cast<int>(n - 1 - i));
    }
    return acc;
}

inline cd rational(const std::vector<double>& num, const std::vector<double>& den, cd s) {
    return poly(num, s) / poly(den, s);
}

/// D + C (sI - A)^{-1} B via a full-pivot LU solve.
inline CMat response(const Mat& a, const Mat& b, const Mat& c, const Mat& d, cd s) {
    const auto n = a.rows();
    CMat m = s * CMat::Identity(n, n) - a.cast<cd>();
    CMat x = m.fullPivLu().solve(b.cast<cd>());
    return d.cast<cd>() + c.cast<cd>() * x;
}

inline double largest_singular_value(const CMat& m) {
    Eigen::JacobiSVD<CMat> svd(m);
    return svd.singularValues()(0);
}

/// Closed-loop map [1; P](1 - C P)^{-1}[1, -C] for scalar P, C at s.
inline CMat gang_of_four(cd p, cd c) {
    const cd s = 1.0 / (1.0 - c * p);
    CMat g(2, 2);
    g << s, -c * s, p * s, -p * c * s;
    return g;
}

/// |a - b| / sqrt((1 + |a|^2)(1 + |b|^2)).
inline double chordal(cd a, cd b) { return std::abs(a - b) / std::sqrt((1.0 + std::norm(a)) * (1.0 + std::norm(b))); }

/// Chordal distance between 1/s^2 and e^{-sd}/s^2 on a dense grid (exact delay).
inline double double_integrator_delay_gap(double d) {
    double best = 0.0;
    for (int i = 0; i <= 200000; ++i) {
        const double w = std::pow(10.0, -3.0 + 6.0 * i / 200000.0);
        const double v = 2.0 * std::abs(std::sin(w * d / 2.0)) * w * w / (1.0 + std::pow(w, 4));
        best = std::max(best, v);
    }
    return best;
}

struct Realization {
    Mat a, b, c, d;
};

/// Random stable system: block-diagonal real/complex pole pairs, random similarity.
template <class Rng>
Realization random_stable(Rng& rng, int n, int m, int p, bool feedthrough = true) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    Mat a = Mat::Zero(n, n);
    int i = 0;
    while (i < n) {
        if (i + 1 < n && u(rng) < 0.5) {
            const double omega = std::pow(10.0, -1.0 + 2.0 * u(rng));
            const double sigma = -omega * std::pow(10.0, -1.3 + 1.3 * u(rng)); // damping 0.05 .. 1
            a(i, i) = sigma;
            a(i + 1, i + 1) = sigma;
            a(i, i + 1) = omega;
            a(i + 1, i) = -omega;
            i += 2;
        } else {
            a(i, i) = -std::pow(10.0, -1.0 + 2.0 * u(rng));
            i += 1;
        }
    }
    Mat t = Mat::Identity(n, n);
    for (int r = 0; r < n; ++r) {
        for (int k = 0; k < n; ++k) {
            t(r, k) += 0.3 * g(rng);
        }
    }
    Realization s;
    s.a = t * a * t.inverse();
    s.b = Mat(n, m);
    s.c = Mat(p, n);
    s.d = Mat::Zero(p, m);
    for (int r = 0; r < n; ++r) {
        for (int k = 0; k < m; ++k) {
            s.b(r, k) = g(rng);
        }
    }
    for (int r = 0; r < p; ++r) {
        for (int k = 0; k < n; ++k) {
            s.c(r, k) = g(rng);
        }
        if (feedthrough) {
            for (int k = 0; k < m; ++k) {
                s.d(r, k) = 0.5 * g(rng);
            }
        }
    }
    return s;
}

/// max sigma_max over a log grid, plus omega = 0.
inline double grid_norm(const Realization& s, int points, double lo = 1e-4, double hi = 1e4) {
    double best = largest_singular_value(response(s.a, s.b, s.c, s.d, 0.0));
    for (int i = 0; i < points; ++i) {
        const double w = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
        best = std::max(best, largest_singular_value(response(s.a, s.b, s.c, s.d, cd(0.0, w))));
    }
    return best;
}

/// sup over random unit vectors of ||(P_X - P_Y) v||.
template <class Rng>
double sampled_projection_gap(const Mat& x, const Mat& y, int samples, Rng& rng) {
    const Mat qx = x.householderQr().householderQ() * Mat::Identity(x.rows(), x.cols());
    const Mat qy = y.householderQr().householderQ() * Mat::Identity(y.rows(), y.cols());
    const Mat diff = qx * qx.transpose() - qy * qy.transpose();
    std::normal_distribution<double> g(0.0, 1.0);
    double best = 0.0;
    for (int i = 0; i < samples; ++i) {
        Eigen::VectorXd v(x.rows());
        for (Eigen::Index k = 0; k < v.size(); ++k) {
            v(k) = g(rng);
        }
        v.normalize();
        best = std::max(best, (diff * v).norm());
    }
    return best;
}

/// Taylor coefficients of num/den around s = 0 (ascending), up to `terms`.
inline std::vector<double> taylor(std::vector<double> num, std::vector<double> den, int terms) {
    std::vector<double> n(num.rbegin(), num.rend()), d(den.rbegin(), den.rend());
    n.resize(static_cast<std::size_t>(terms), 0.0);
    d.resize(static_cast<std::size_t>(terms), 0.0);
    std::vector<double> q(static_cast<std::size_t>(terms), 0.0);
    for (int k = 0; k < terms; ++k) {
        double acc = n[static_cast<std::size_t>(k)];
        for (int j = 1; j <= k; ++j) {
            acc -= d[static_cast<std::size_t>(j)] * q[static_cast<std::size_t>(k - j)];
        }
        q[static_cast<std::size_t>(k)] = acc / d[0];
    }
    return q;
}

} // namespace oracle
