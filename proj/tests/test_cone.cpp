#include <catch2/catch_amalgamated.hpp>

#include "ncsrobust/cone_geometry.hpp"
#include "oracles.hpp"

using namespace ncsrobust;
using Catch::Approx;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

Matrix e1(int dim) {
    Matrix m = Matrix::Zero(dim, 1);
    m(0, 0) = 1.0;
    return m;
}

/// min over t > 0 of ||v - t w|| / (t ||w||) by a dense scan in log t
double ray_ratio(const Vector& v, const Vector& w) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 4000; ++i) {
        const double t = std::pow(10.0, -3.0 + 6.0 * i / 4000.0) * v.norm() / w.norm();
        best = std::min(best, (v - t * w).norm() / (t * w.norm()));
    }
    return best;
}

} // namespace

TEST_CASE("acute angle", "[cone]") {
    CHECK(acute_angle(vec({1, 0}), vec({0, 1})) == Approx(M_PI / 2));
    CHECK(acute_angle(vec({1, 0}), vec({1, 1})) == Approx(M_PI / 4));
    CHECK(acute_angle(vec({1, 0}), vec({-1, -1})) == Approx(M_PI / 4));
    CHECK(std::isinf(acute_angle(vec({1, 0, 0}), vec({0, 0, 0}))));
}

TEST_CASE("angle to a subspace", "[cone]") {
    const Matrix m = e1(3);
    CHECK(angle_to_subspace(vec({2, 0, 0}), m) == Approx(0.0).margin(1e-15));
    CHECK(angle_to_subspace(vec({0, 1, 1}), m) == Approx(M_PI / 2));
    CHECK(angle_to_subspace(vec({std::sqrt(3.0), 1, 0}), m) == Approx(M_PI / 6).epsilon(1e-14));
    CHECK_THROWS_AS(angle_to_subspace(vec({0, 0, 0}), m), InputError);

    // infimum of acute angles over sampled members of the subspace
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    const Vector v = vec({std::sqrt(3.0), 1, 0});
    double best = M_PI;
    for (int i = 0; i < 100000; ++i) {
        best = std::min(best, acute_angle(m * Vector::Constant(1, g(rng)), v));
    }
    CHECK(std::abs(best - M_PI / 6) < 1e-3);
}

TEST_CASE("cone membership by angle", "[cone]") {
    const ConeSpec one{e1(3), {0.5}};
    CHECK(cone_contains(one, vec({0, 0, 0})));
    CHECK(cone_contains(one, vec({std::sqrt(3.0), 1, 0})));
    CHECK_FALSE(cone_contains(one, vec({std::sqrt(3.0), 1.01, 0})));

    const ConeSpec chain{e1(3), {0.3, 0.4}};
    const double theta = std::asin(0.3) + std::asin(0.4) + 0.01;
    const Vector outside = vec({std::cos(theta), std::sin(theta), 0});
    CHECK_FALSE(cone_contains(chain, outside));

    // two-stage brute force: no sampled intermediate member w of S(M0, 0.3) admits v in S(ray w, 0.4)
    std::mt19937_64 rng(2);
    const Matrix q = e1(3);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3000; ++i) {
        const Vector w = sample_cone_member(q, 0.3, rng);
        best = std::min(best, ray_ratio(outside, w));
    }
    CHECK(best > 0.4);

    const Vector inside = vec({std::cos(theta - 0.02), std::sin(theta - 0.02), 0});
    CHECK(cone_contains(chain, inside));

    CHECK_THROWS_AS(cone_contains(ConeSpec{e1(3), {1.0}}, inside), InputError);
}

TEST_CASE("brute-force membership", "[cone]") {
    const Matrix m = e1(3);
    for (double r : {0.0, 0.2, 0.9}) {
        CHECK(brute_force_membership(m, r, vec({3, 0, 0}), ConeMode::forward, 1000));
        CHECK(brute_force_membership(m, r, vec({-3, 0, 0}), ConeMode::inverse, 1000));
    }
    const Vector v = vec({std::sqrt(3.0), 1, 0});
    CHECK(brute_force_membership(m, 0.5, v, ConeMode::forward, 1000));
    CHECK(brute_force_membership(m, 0.5, v, ConeMode::inverse, 1000));
    CHECK_FALSE(brute_force_membership(m, 0.49, v, ConeMode::forward, 1000));
    CHECK_FALSE(brute_force_membership(m, 0.49, v, ConeMode::inverse, 1000));
}

TEST_CASE("forward, inverse and angle verdicts agree in R^5", "[cone][property]") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u;
    int agree = 0;
    const int trials = 300;
    for (int i = 0; i < trials; ++i) {
        Matrix m(5, 1 + i % 2);
        for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = g(rng);
        const double r = 0.95 * u(rng);
        Vector v(5);
        for (Eigen::Index k = 0; k < 5; ++k) v(k) = g(rng);
        const bool angle = cone_contains(ConeSpec{orthonormal_basis(m), {r}}, v);
        const bool fwd = brute_force_membership(m, r, v, ConeMode::forward, 1000, 5 + i);
        const bool inv = brute_force_membership(m, r, v, ConeMode::inverse, 1000, 5 + i);
        agree += (angle == fwd && fwd == inv) ? 1 : 0;
    }
    CHECK(agree == trials);
}

TEST_CASE("membership is scale invariant", "[cone][property]") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int i = 0; i < 200; ++i) {
        Matrix m(5, 2);
        for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = g(rng);
        Vector v(5);
        for (Eigen::Index k = 0; k < 5; ++k) v(k) = g(rng);
        double a = std::pow(10.0, 3.0 * g(rng) / 2.0);
        a = g(rng) < 0.0 ? -a : a;
        const bool x = brute_force_membership(m, 0.6, v, ConeMode::forward, 1000);
        const bool y = brute_force_membership(m, 0.6, Vector(a * v), ConeMode::forward, 1000);
        CHECK(x == y);
    }
}

TEST_CASE("disjointness examples", "[cone]") {
    const Matrix x = e1(2);
    Matrix y(2, 1);
    y << 0.0, 1.0;
    const auto perp = cone_disjointness_check(x, 0.0, y, 0.0, 1000);
    CHECK(perp.min_angle == Approx(M_PI / 2));
    CHECK(perp.disjoint);

    const double a = 0.6;
    const auto touch = cone_disjointness_check(x, std::sin(a), y, std::sin(M_PI / 2 - a), 1000);
    CHECK(touch.min_angle == Approx(0.0).margin(1e-12));
    CHECK_FALSE(touch.disjoint);

    Matrix l(2, 1);
    l << std::cos(0.9), std::sin(0.9);
    const auto mid = cone_disjointness_check(x, std::sin(0.2), l, std::sin(0.3), 5000);
    CHECK(mid.principal_angle == Approx(0.9));
    CHECK(mid.min_angle == Approx(0.4).epsilon(1e-12));
    CHECK(std::abs(mid.sampled_min_angle - 0.4) < 1e-2);
    CHECK_FALSE(mid.witness_found);
}

TEST_CASE("disjointness matches the arcsine inequality on random lines", "[cone][property]") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u;
    int checked = 0;
    for (int i = 0; i < 200; ++i) {
        const double phi = (M_PI / 2) * u(rng);
        const double a = phi * 1.6 * u(rng), split = u(rng);
        const double rp = std::sin(std::min(a * split, 1.5)), rc = std::sin(std::min(a * (1 - split), 1.5));
        if (std::abs(std::asin(rp) + std::asin(rc) - phi) < 1e-2) {
            continue;
        }
        Matrix x(2, 1), y(2, 1);
        x << 1.0, 0.0;
        y << std::cos(phi), std::sin(phi);
        const auto res = cone_disjointness_check(x, rp, y, rc, 20000, 100 + i);
        const bool predicted = std::asin(rp) + std::asin(rc) < phi;
        CHECK(res.disjoint == predicted);
        CHECK(res.witness_found == !predicted); // sampled overlap iff not disjoint
        ++checked;
    }
    CHECK(checked > 150);
}

TEST_CASE("geometry self-test passes", "[cone]") {
    SelftestSizes small;
    small.equivalence = 200;
    small.scaling = 200;
    small.containment = 2000;
    small.disjointness = 50;
    const SelftestReport rep = geometry_selftest(42, small);
    for (const auto& c : rep.checks) {
        INFO(c.name << ": " << c.passed << "/" << c.total);
        CHECK(c.ok());
    }
    CHECK(rep.ok());
}
