#include <catch2/catch_amalgamated.hpp>

#include "ncsrobust/hinf.hpp"
#include "oracles.hpp"

using namespace ncsrobust;
using Catch::Approx;

namespace {

StateSpace tf(std::vector<double> num, std::vector<double> den) { return tf_to_ss(RationalTransfer(num, den)); }

StateSpace plant() { return tf({1.0}, {1.0, 0.0, 0.0}); }
StateSpace controller() {
    const double s2 = std::sqrt(2.0);
    return tf({-(1.0 + s2), -1.0}, {1.0, 1.0 + s2});
}

} // namespace

TEST_CASE("first-order low-pass has unit norm at DC", "[hinf]") {
    const NormResult r = hinf_norm(tf({1.0}, {1.0, 1.0}));
    CHECK(r.value == Approx(1.0).epsilon(1e-8));
    CHECK(r.peak_omega == Approx(0.0).margin(1e-3));
    CHECK(r.lower <= r.value);
    CHECK(r.value <= r.upper);
}

TEST_CASE("resonance peak for zeta = 0.1", "[hinf]") {
    const double zeta = 0.1;
    const NormResult r = hinf_norm(tf({1.0}, {1.0, 2.0 * zeta, 1.0}));
    const double expected = 1.0 / (2.0 * zeta * std::sqrt(1.0 - zeta * zeta));
    CHECK(r.value == Approx(expected).epsilon(1e-8));
    CHECK(std::abs(r.value - 5.02519) < 1e-4);
    CHECK(r.peak_omega == Approx(std::sqrt(1.0 - 2.0 * zeta * zeta)).epsilon(1e-4));
    CHECK(r.method == NormMethod::bisection);
}

TEST_CASE("worked-example loop norm", "[hinf]") {
    const double expected = std::sqrt(4.0 + 2.0 * std::sqrt(2.0));
    const NormResult r = hinf_norm(gang_of_four(plant(), controller()));
    CHECK(r.value == Approx(expected).epsilon(1e-7));
    CHECK(r.upper - r.lower <= 1e-8 * r.value * 1.0001);
    CHECK(r.value >= sigma_max(Matrix(gang_of_four(plant(), controller()).d())) - 1e-12);
}

TEST_CASE("stability margin of the worked example", "[hinf]") {
    const MarginResult m = stability_margin(plant(), controller());
    CHECK(m.norm == Approx(2.613126).epsilon(1e-6));
    CHECK(m.margin == Approx(0.3826834).epsilon(1e-6));
    CHECK(m.arcsin_margin == Approx(M_PI / 8.0).margin(1e-6));
}

TEST_CASE("stability margin special cases", "[hinf]") {
    const MarginResult m = stability_margin(StateSpace::gain(0.0), StateSpace::gain(0.0));
    CHECK(m.margin == Approx(1.0).epsilon(1e-12));
    CHECK(m.arcsin_margin == Approx(M_PI / 2.0).epsilon(1e-6));
    CHECK_THROWS_AS(stability_margin(plant(), StateSpace::gain(0.0)), DomainError);
    CHECK_THROWS_WITH(stability_margin(plant(), StateSpace::gain(0.0)), Catch::Matchers::ContainsSubstring("nominal loop unstable"));
}

TEST_CASE("unstable system has no finite norm", "[hinf]") {
    CHECK_THROWS_AS(hinf_norm(tf({1.0}, {1.0, -1.0})), DomainError);
    CHECK_THROWS_AS(hinf_norm(plant()), DomainError);
}

TEST_CASE("static systems", "[hinf]") {
    Matrix d(2, 2);
    d << 3.0, 0.0, 0.0, -4.0;
    const NormResult r = hinf_norm(StateSpace::gain(d));
    CHECK(r.value == Approx(4.0));
    CHECK(std::isinf(r.peak_omega));
}

TEST_CASE("bisection agrees with a dense grid on random stable systems", "[hinf][property]") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> dim(1, 3), order(1, 6);
    for (int trial = 0; trial < 50; ++trial) {
        const auto r = oracle::random_stable(rng, order(rng), dim(rng), dim(rng));
        const StateSpace s(r.a, r.b, r.c, r.d);
        const double grid = oracle::grid_norm(r, 10000);
        const NormResult nr = hinf_norm(s);
        INFO("trial " << trial);
        CHECK(std::abs(nr.value - grid) <= 1e-3 * grid);
        CHECK(nr.value >= grid * (1.0 - 1e-9));
    }
}

TEST_CASE("norm scales with the system", "[hinf][property]") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> alpha(-5.0, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto r = oracle::random_stable(rng, 4, 2, 2);
        const StateSpace s(r.a, r.b, r.c, r.d);
        const double a = alpha(rng);
        CHECK(hinf_norm(s.scaled(a)).value == Approx(std::abs(a) * hinf_norm(s).value).epsilon(1e-7));
    }
}

TEST_CASE("loop norm is at least one", "[hinf][property]") {
    std::mt19937_64 rng(23);
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const auto rp = oracle::random_stable(rng, 2, 1, 1);
        const auto rc = oracle::random_stable(rng, 2, 1, 1, false);
        const StateSpace p(rp.a, rp.b, rp.c, rp.d), c(rc.a, rc.b, rc.c, rc.d);
        try {
            const MarginResult m = stability_margin(p, c.scaled(0.1));
            CHECK(m.norm >= 1.0 - 1e-8);
            CHECK(m.margin > 0.0);
            CHECK(m.margin <= 1.0);
            ++checked;
        } catch (const DomainError&) {
        }
    }
    CHECK(checked > 10);
}
