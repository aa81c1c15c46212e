#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sausagelab/analytic.hpp"
#include "sausagelab/rng.hpp"

using namespace sausagelab;

TEST_CASE("annulus_hit_prob endpoints and symmetry") {
    CHECK(annulus_hit_prob(0.25, 0.25, 1.0) == 1.0);
    CHECK(annulus_hit_prob(1.0, 0.25, 1.0) == 0.0);
    CHECK(annulus_hit_prob(0.5, 0.25, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("annulus_hit_prob rejects bad domains") {
    CHECK_THROWS_AS(annulus_hit_prob(0.5, 1.0, 0.25), std::invalid_argument);
    CHECK_THROWS_AS(annulus_hit_prob(0.1, 0.25, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(annulus_hit_prob(2.0, 0.25, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(annulus_hit_prob(0.5, -0.25, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(annulus_hit_prob(0.5, 0.5, 0.5), std::invalid_argument);
}

TEST_CASE("annulus_hit_prob is monotone decreasing in the start radius") {
    double prev = 1.0;
    for (int k = 0; k <= 40; ++k) {
        const double z = 0.1 + (1.0 - 0.1) * k / 40.0;
        const double p = annulus_hit_prob(z, 0.1, 1.0);
        CHECK(p <= prev + 1e-15);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        prev = p;
    }
}

TEST_CASE("exit_below_prob gambler's ruin values") {
    CHECK(exit_below_prob(0.5, 0.0, 1.0) == 0.5);
    CHECK(exit_below_prob(0.0, 0.0, 1.0) == 1.0);
    CHECK(exit_below_prob(1.0, 0.0, 1.0) == 0.0);
    CHECK_THROWS_AS(exit_below_prob(0.5, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("gaussian_disk_prob centered closed form") {
    CHECK(gaussian_disk_prob(0.0, 1.0, 1.0) ==
          doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-10));
    CHECK(gaussian_disk_prob(0.0, 2.0, 0.5) ==
          doctest::Approx(1.0 - std::exp(-0.5 * 0.25 / 4.0)).epsilon(1e-10));
    CHECK(gaussian_disk_prob(3.0, 1.0, 0.0) == 0.0);
}

TEST_CASE("gaussian_disk_prob off-center reference value") {
    // Poisson-mixture evaluation of the unit-offset case, frozen from an
    // independent high-precision computation.
    CHECK(gaussian_disk_prob(1.0, 1.0, 1.0) == doctest::Approx(0.2671201962031798).epsilon(1e-9));
}

TEST_CASE("gaussian_disk_prob agrees with a Monte Carlo oracle") {
    const std::int64_t n = 1000000;
    RngStream rng(424242, 0);
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        const Vec2 z = rng.normal_pair();
        const double dx = z.x + 1.0;
        if (dx * dx + z.y * z.y <= 1.0) ++hits;
    }
    const double mc = static_cast<double>(hits) / static_cast<double>(n);
    const double p = gaussian_disk_prob(1.0, 1.0, 1.0);
    const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    CHECK(std::fabs(mc - p) <= 4.0 * sigma);
}

TEST_CASE("gaussian_disk_prob monotonicity grid") {
    for (int di = 0; di < 6; ++di) {
        double prev = -1.0;
        for (int ri = 0; ri <= 8; ++ri) {
            const double p = gaussian_disk_prob(0.3 * di, 0.7, 0.25 * ri);
            CHECK(p >= prev - 1e-12);  // increasing in radius
            prev = p;
        }
    }
    for (int ri = 1; ri <= 4; ++ri) {
        double prev = 2.0;
        for (int di = 0; di <= 8; ++di) {
            const double p = gaussian_disk_prob(0.4 * di, 0.7, 0.3 * ri);
            CHECK(p <= prev + 1e-12);  // decreasing in center distance
            prev = p;
        }
    }
}

TEST_CASE("gaussian_disk_prob far tail underflows to zero") {
    CHECK(gaussian_disk_prob(100.0, 0.5, 1.0) == 0.0);
}

TEST_CASE("corridor_centers boustrophedon sequences") {
    CHECK(corridor_centers(1).center_abscissas == std::vector<double>{1.0});
    CHECK(corridor_centers(2).center_abscissas == std::vector<double>{0.5, 1.0, 0.5, 0.0});
    const auto n3 = corridor_centers(3).center_abscissas;
    const std::vector<double> want = {1.0 / 3, 2.0 / 3, 1.0, 2.0 / 3, 1.0 / 3,
                                      0.0,     1.0 / 3, 2.0 / 3, 1.0};
    CHECK(n3 == want);
}

TEST_CASE("corridor_centers invariants for N in 1..50") {
    for (int n = 1; n <= 50; ++n) {
        const CorridorSpec spec = corridor_centers(n);
        REQUIRE(spec.center_abscissas.size() == static_cast<std::size_t>(n) * n);
        CHECK(std::fabs(spec.radius * n - 1.0) <= 1e-15);
        CHECK(std::fabs(spec.checkpoint_dt * n * n - 1.0) <= 1e-15);
        CHECK(spec.center_abscissas.front() == doctest::Approx(1.0 / n).epsilon(1e-15));
        long prev_step = std::lround(spec.center_abscissas[0] * n);
        CHECK(prev_step == 1);
        for (std::size_t j = 1; j < spec.center_abscissas.size(); ++j) {
            const double x = spec.center_abscissas[j];
            CHECK(x >= 0.0);
            CHECK(x <= 1.0);
            const long k = std::lround(x * n);
            CHECK(std::fabs(x - static_cast<double>(k) / n) <= 1e-15);
            CHECK(std::labs(k - prev_step) == 1);  // consecutive differ by exactly 1/N
            prev_step = k;
        }
    }
    CHECK_THROWS_AS(corridor_centers(0), std::invalid_argument);
}

TEST_CASE("theorem1_bounds reference evaluations") {
    BoundParams p;
    const double eps = std::exp(-std::exp(1.0));
    const auto c = theorem1_bounds(eps, 0.5, p);
    CHECK(c.upper == doctest::Approx(std::exp(-std::exp(2.0))).epsilon(1e-12));

    const auto c2 = theorem1_bounds(0.1, 0.5, p);
    const double l10 = std::log(10.0);
    CHECK(c2.lower == doctest::Approx(std::exp(-l10 * l10 * l10 * l10)).epsilon(1e-12));

    // theta at the 1 - 3 eps boundary stays finite and positive
    const double eps3 = 0.05;
    const auto c3 = theorem1_bounds(eps3, 1.0 - 3.0 * eps3, p);
    CHECK(c3.lower_measure > 0.0);
    CHECK(std::isfinite(c3.lower_measure));
}

TEST_CASE("theorem1_bounds domain checks") {
    BoundParams p;
    CHECK_THROWS_AS(theorem1_bounds(0.4, 0.5, p), std::invalid_argument);  // >= 1/e
    CHECK_THROWS_AS(theorem1_bounds(0.1, 0.0, p), std::invalid_argument);
    CHECK_THROWS_AS(theorem1_bounds(0.1, 1.5, p), std::invalid_argument);
    BoundParams bad;
    bad.c2 = -1.0;
    CHECK_THROWS_AS(theorem1_bounds(0.1, 0.5, bad), std::invalid_argument);
}

TEST_CASE("theorem1_bounds upper vs lower on the default grid flags, not throws") {
    BoundParams p;
    for (const double eps : {0.05, 0.02, 0.01, 0.001}) {
        const auto c = theorem1_bounds(eps, 0.5, p);
        // with all constants 1 the sausage-coverage curves are ordered
        CHECK(c.upper >= c.lower);
    }
}
