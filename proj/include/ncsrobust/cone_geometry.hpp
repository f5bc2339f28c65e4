#pragma once

// Conelike neighborhoods S(M, r) = {v : exists u in M, ||v - u|| <= r ||u||} u {0}
// around finite-dimensional subspaces, with brute-force membership oracles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ncsrobust/errors.hpp"
#include "ncsrobust/lti.hpp"
#include "ncsrobust/subspace.hpp"

namespace ncsrobust {

/// Acute angle between the lines through x and y; +inf if either is zero.
[[nodiscard]] inline double acute_angle(const Vector& x, const Vector& y) {
    if (x.size() != y.size()) {
        throw InputError("acute_angle: vectors must have equal length");
    }
    const double nx = x.norm(), ny = y.norm();
    if (nx == 0.0 || ny == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    const double c = std::abs(x.dot(y)) / (nx * ny);
    const double s = (x / nx - (x.dot(y) >= 0 ? 1.0 : -1.0) * y / ny).norm();
    // atan2 form stays accurate near 0 and pi/2.
    return std::atan2(std::sqrt(std::max(0.0, s * s * (1.0 - s * s / 4.0))), c);
}

/// Angle between v and the subspace spanned by the columns of m0.
[[nodiscard]] inline double angle_to_subspace(const Vector& v, const Matrix& m0) {
    if (v.size() != m0.rows()) {
        throw InputError("angle_to_subspace: dimension mismatch");
    }
    if (v.norm() == 0.0) {
        throw InputError("angle_to_subspace: zero vector has no direction");
    }
    const Matrix q = orthonormal_basis(m0);
    const Vector proj = q * (q.transpose() * v);
    return std::atan2((v - proj).norm(), proj.norm());
}

struct ConeSpec {
    Matrix center_basis;       // orthonormal columns
    std::vector<double> radii; // chain M_j = S(M_{j-1}, r_j)

    void validate() const {
        if (center_basis.cols() == 0 || center_basis.rows() == 0) {
            throw InputError("cone center must be a nonempty basis");
        }
        const auto k = center_basis.cols();
        if ((center_basis.transpose() * center_basis - Matrix::Identity(k, k)).norm() > 1e-9) {
            throw InputError("cone center basis must be orthonormal");
        }
        for (double r : radii) {
            if (!(r >= 0.0 && r < 1.0)) {
                throw InputError("cone radius must lie in [0, 1)");
            }
        }
    }

    [[nodiscard]] double arcsin_sum() const {
        double s = 0.0;
        for (double r : radii) {
            s += std::asin(r);
        }
        return s;
    }
};

inline constexpr double cone_angle_tol = 1e-9;

[[nodiscard]] inline bool cone_contains(const ConeSpec& spec, const Vector& v) {
    spec.validate();
    if (v.size() != spec.center_basis.rows()) {
        throw InputError("cone_contains: dimension mismatch");
    }
    if (v.norm() == 0.0) {
        return true;
    }
    return angle_to_subspace(v, spec.center_basis) <= spec.arcsin_sum() + cone_angle_tol;
}

enum class ConeMode { forward, inverse };

namespace detail {

// min over t > 0 of ratio(t), coarse log grid then golden section.
template <class F>
[[nodiscard]] double scale_search(F&& ratio, double scale, int coarse) {
    double best = std::numeric_limits<double>::infinity();
    int best_i = 0;
    const double lo = -8.0, hi = 8.0;
    const auto t_at = [&](double e) { return scale * std::pow(10.0, e); };
    for (int i = 0; i <= coarse; ++i) {
        const double e = lo + (hi - lo) * i / coarse;
        if (const double r = ratio(t_at(e)); r < best) {
            best = r;
            best_i = i;
        }
    }
    double a = lo + (hi - lo) * std::max(0, best_i - 1) / coarse;
    double b = lo + (hi - lo) * std::min(coarse, best_i + 1) / coarse;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = ratio(t_at(x1)), f2 = ratio(t_at(x2));
    for (int it = 0; it < 120 && b - a > 1e-14; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = ratio(t_at(x1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = ratio(t_at(x2));
        }
    }
    return std::min({best, f1, f2});
}

} // namespace detail

/// Numerical minimum of ||v - u|| / ||u|| (forward) or ||v - u|| / ||v|| (inverse)
/// over u in span(m0). Directions: the projection of v plus `samples` random
/// unit vectors in the subspace; each direction gets a search over scaling.
[[nodiscard]] inline double brute_force_ratio(const Matrix& m0, const Vector& v, ConeMode mode, int samples,
                                              std::uint64_t seed = 7) {
    const Matrix q = orthonormal_basis(m0);
    const double nv = v.norm();
    if (nv == 0.0) {
        return 0.0;
    }
    const auto along = [&](const Vector& w, int coarse) {
        const auto ratio = [&](double t) {
            const double num = (v - t * w).norm();
            return mode == ConeMode::forward ? num / t : num / nv;
        };
        return detail::scale_search(ratio, nv, coarse);
    };

    double best = mode == ConeMode::inverse ? 1.0 : std::numeric_limits<double>::infinity();
    const Vector proj = q * (q.transpose() * v);
    if (proj.norm() > 0.0) {
        best = std::min(best, along(proj / proj.norm(), 160));
    } else if (mode == ConeMode::forward) {
        best = std::min(best, 1.0); // approached as t -> infinity
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    for (int i = 0; i < samples; ++i) {
        Vector c(q.cols());
        for (Eigen::Index j = 0; j < c.size(); ++j) {
            c(j) = n01(rng);
        }
        const Vector w = q * c.normalized();
        // both orientations of the line
        best = std::min({best, along(w, 16), along(-w, 16)});
    }
    return best;
}

[[nodiscard]] inline bool brute_force_membership(const Matrix& m0, double r, const Vector& v, ConeMode mode,
                                                 int samples, std::uint64_t seed = 7) {
    if (!(r >= 0.0 && r < 1.0)) {
        throw InputError("cone radius must lie in [0, 1)");
    }
    if (v.norm() == 0.0) {
        return true;
    }
    return brute_force_ratio(m0, v, mode, samples, seed) <= r + 1e-9;
}

struct DisjointnessResult {
    double min_angle = 0.0;      // closed form
    double sampled_min_angle = 0.0;
    double principal_angle = 0.0;
    bool disjoint = false;
    bool witness_found = false; // a sampled nonzero member of both cones
};

/// Random member of S(span(q), r) built as cos(theta) w + sin(theta) n with
/// w in the subspace, n orthogonal to it; half the draws sit on the boundary.
template <class Rng>
[[nodiscard]] Vector sample_cone_member(const Matrix& q, double r, Rng& rng) {
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> u01;
    const auto dim = q.rows();
    Vector c(q.cols());
    for (Eigen::Index j = 0; j < c.size(); ++j) {
        c(j) = n01(rng);
    }
    const Vector w = q * c.normalized();
    Vector z(dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        z(j) = n01(rng);
    }
    z -= q * (q.transpose() * z);
    const double a = std::asin(r);
    const double theta = u01(rng) < 0.5 ? a : a * u01(rng);
    if (z.norm() < 1e-12 || theta == 0.0) {
        return w;
    }
    return std::cos(theta) * w + std::sin(theta) * z.normalized();
}

[[nodiscard]] inline DisjointnessResult cone_disjointness_check(const Matrix& mp, double rp, const Matrix& mc, double rc,
                                                                int samples, std::uint64_t seed = 11) {
    for (double r : {rp, rc}) {
        if (!(r >= 0.0 && r < 1.0)) {
            throw InputError("cone radius must lie in [0, 1)");
        }
    }
    const auto angles = principal_angles(mp, mc);
    DisjointnessResult out;
    out.principal_angle = angles.front();
    out.min_angle = std::max(0.0, out.principal_angle - std::asin(rp) - std::asin(rc));
    out.disjoint = out.min_angle > 0.0;

    const Matrix qp = orthonormal_basis(mp), qc = orthonormal_basis(mc);
    std::mt19937_64 rng(seed);
    out.sampled_min_angle = std::numbers::pi / 2;
    for (int i = 0; i < samples; ++i) {
        const Vector u = sample_cone_member(qp, rp, rng);
        const Vector v = sample_cone_member(qc, rc, rng);
        out.sampled_min_angle = std::min(out.sampled_min_angle, acute_angle(u, v));
        if (!out.witness_found) {
            out.witness_found = angle_to_subspace(u, qc) <= std::asin(rc) + cone_angle_tol ||
                                angle_to_subspace(v, qp) <= std::asin(rp) + cone_angle_tol;
        }
    }
    return out;
}

// ---- sampled self-test suite -------------------------------------------------

struct SelftestCheck {
    std::string name;
    long passed = 0;
    long total = 0;
    bool informational = false;

    [[nodiscard]] bool ok() const { return informational || passed == total; }
};

struct SelftestReport {
    std::vector<SelftestCheck> checks;

    [[nodiscard]] bool ok() const {
        return std::all_of(checks.begin(), checks.end(), [](const SelftestCheck& c) { return c.ok(); });
    }
};

namespace detail {

template <class Rng>
[[nodiscard]] Matrix random_basis(Eigen::Index dim, Eigen::Index k, Rng& rng) {
    std::normal_distribution<double> n01;
    Matrix m(dim, k);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            m(i, j) = n01(rng);
        }
    }
    return orthonormal_basis(m);
}

// Unit vector at angle theta from span(q): in the plane of a random w in q and a random normal.
template <class Rng>
[[nodiscard]] Vector vector_at_angle(const Matrix& q, double theta, Rng& rng) {
    std::normal_distribution<double> n01;
    Vector c(q.cols());
    for (Eigen::Index j = 0; j < c.size(); ++j) {
        c(j) = n01(rng);
    }
    const Vector w = q * c.normalized();
    Vector z(q.rows());
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        z(j) = n01(rng);
    }
    z -= q * (q.transpose() * z);
    return std::cos(theta) * w + std::sin(theta) * z.normalized();
}

} // namespace detail

struct SelftestSizes {
    int equivalence = 1000;
    int scaling = 1000;
    int containment = 10000;
    int disjointness = 200;
    int oracle_samples = 1000;
};

/// Seeded sampled checks of the cone characterizations in R^5 (R^2 for the
/// line-pair disjointness check).
[[nodiscard]] inline SelftestReport geometry_selftest(std::uint64_t seed = 2024, SelftestSizes sizes = {}) {
    using std::numbers::pi;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01;
    SelftestReport report;
    constexpr Eigen::Index dim = 5;

    {
        SelftestCheck c{"forward/inverse/angle agreement"};
        for (int i = 0; i < sizes.equivalence; ++i) {
            const Matrix q = detail::random_basis(dim, 1 + static_cast<int>(u01(rng) * 2.0), rng);
            const double r = 0.95 * u01(rng);
            const double theta = std::clamp(std::asin(r) + 0.6 * (u01(rng) - 0.5), 0.0, pi / 2);
            const Vector v = (0.1 + 10.0 * u01(rng)) * detail::vector_at_angle(q, theta, rng);
            const bool fwd = brute_force_membership(q, r, v, ConeMode::forward, sizes.oracle_samples / 10, rng());
            const bool inv = brute_force_membership(q, r, v, ConeMode::inverse, sizes.oracle_samples / 10, rng());
            const bool ang = cone_contains({q, {r}}, v);
            c.passed += (fwd == inv && inv == ang) ? 1 : 0;
            ++c.total;
        }
        report.checks.push_back(c);
    }
    {
        SelftestCheck c{"scaling invariance"};
        for (int i = 0; i < sizes.scaling; ++i) {
            const Matrix q = detail::random_basis(dim, 1 + static_cast<int>(u01(rng) * 2.0), rng);
            const double r = 0.95 * u01(rng);
            const double theta = std::clamp(std::asin(r) + 0.6 * (u01(rng) - 0.5), 0.0, pi / 2);
            const Vector v = detail::vector_at_angle(q, theta, rng);
            const double alpha = (u01(rng) < 0.5 ? -1.0 : 1.0) * std::pow(10.0, 6.0 * u01(rng) - 3.0);
            const auto s = rng();
            const bool a = brute_force_membership(q, r, v, ConeMode::forward, sizes.oracle_samples / 10, s);
            const bool b = brute_force_membership(q, r, Vector(alpha * v), ConeMode::forward, sizes.oracle_samples / 10, s);
            c.passed += (a == b) ? 1 : 0;
            ++c.total;
        }
        report.checks.push_back(c);
    }
    {
        SelftestCheck c{"chained-cone containment"};
        SelftestCheck rev{"reverse inclusion (informational)", 0, 0, true};
        std::normal_distribution<double> n01;
        for (int i = 0; i < sizes.containment; ++i) {
            const Matrix q = detail::random_basis(dim, 1 + static_cast<int>(u01(rng) * 2.0), rng);
            const int len = 1 + static_cast<int>(u01(rng) * 4.0);
            std::vector<double> radii(len);
            double sum = 0.0;
            for (double& r : radii) {
                r = 0.95 * u01(rng);
                sum += std::asin(r);
            }
            if (sum > pi / 2) {
                for (double& r : radii) {
                    r = std::sin(std::asin(r) * (pi / 2) / sum);
                }
            }
            Vector coeff(q.cols());
            for (Eigen::Index j = 0; j < coeff.size(); ++j) {
                coeff(j) = n01(rng);
            }
            Vector v = q * coeff;
            for (double r : radii) {
                Vector e(dim);
                for (Eigen::Index j = 0; j < dim; ++j) {
                    e(j) = n01(rng);
                }
                const double len_step = r * v.norm() * (u01(rng) < 0.5 ? 1.0 : u01(rng));
                v += len_step * e.normalized();
            }
            const ConeSpec spec{q, radii};
            c.passed += cone_contains(spec, v) ? 1 : 0;
            ++c.total;

            if (len == 2 && q.cols() == 1) {
                // Rotate stage by stage in the plane of M0 and a target vector.
                const double target = spec.arcsin_sum() * u01(rng);
                const Vector t = detail::vector_at_angle(q, target, rng);
                const Vector base = q * (q.transpose() * t);
                const double a1 = std::min(target, std::asin(radii[0]));
                const Vector perp = (t - base).norm() > 0 ? Vector((t - base).normalized()) : Vector(Vector::Zero(dim));
                const Vector mid = std::cos(a1) * base.normalized() + std::sin(a1) * perp;
                const bool stage1 = brute_force_membership(q, radii[0], mid, ConeMode::forward, 50, rng());
                const bool stage2 = brute_force_membership(mid, radii[1], t, ConeMode::forward, 50, rng());
                rev.passed += (stage1 && stage2) ? 1 : 0;
                ++rev.total;
            }
        }
        report.checks.push_back(c);
        report.checks.push_back(rev);
    }
    {
        SelftestCheck c{"disjointness vs arcsine inequality"};
        int accepted = 0;
        while (accepted < sizes.disjointness) {
            const Matrix lp = detail::random_basis(2, 1, rng);
            const Matrix lc = detail::random_basis(2, 1, rng);
            const double rp = 0.9 * u01(rng), rc = 0.9 * u01(rng);
            const double phi = principal_angles(lp, lc).front();
            const double a = std::asin(rp) + std::asin(rc);
            if (std::abs(a - phi) < 1e-2) {
                continue;
            }
            ++accepted;
            const auto res = cone_disjointness_check(lp, rp, lc, rc, 20 * sizes.oracle_samples, rng());
            const bool sampled_disjoint = !res.witness_found;
            c.passed += (sampled_disjoint == (a < phi)) ? 1 : 0;
            ++c.total;
        }
        report.checks.push_back(c);
    }
    return report;
}

} // namespace ncsrobust
