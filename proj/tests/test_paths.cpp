#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sausagelab/paths.hpp"

using namespace sausagelab;

TEST_CASE("philox known-answer vectors") {
    // Random123 kat_vectors, philox4x32 with 10 rounds
    const auto zero = detail::philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(zero == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    const auto ones = detail::philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                         {0xffffffffu, 0xffffffffu});
    CHECK(ones == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    const auto pi = detail::philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                       {0xa4093822u, 0x299f31d0u});
    CHECK(pi == std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("identical streams give bit-identical paths") {
    RngStream a(7, 42), b(7, 42);
    const PathSample pa = sample_path(0.01, 1.0, a);
    const PathSample pb = sample_path(0.01, 1.0, b);
    REQUIRE(pa.points.size() == pb.points.size());
    for (std::size_t i = 0; i < pa.points.size(); ++i) CHECK(pa.points[i] == pb.points[i]);
    RngStream c(7, 43);
    const PathSample pc = sample_path(0.01, 1.0, c);
    CHECK(pa.points[100].x != pc.points[100].x);
}

TEST_CASE("sample_path basics") {
    RngStream rng(1, 0);
    const PathSample two = sample_path(1.0, 1.0, rng);
    CHECK(two.points.size() == 2);
    CHECK(two.start() == Vec2{0.0, 0.0});
    CHECK(two.duration() == doctest::Approx(1.0));
    CHECK_THROWS_AS(sample_path(0.0, 1.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(sample_path(2.0, 1.0, rng), std::invalid_argument);
    const double nan = std::nan("");
    CHECK_THROWS_AS(sample_path(nan, 1.0, rng), std::invalid_argument);
}

TEST_CASE("sample_path terminal variance matches the analytic value") {
    const std::int64_t n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        RngStream rng(11, static_cast<std::uint64_t>(i));
        const PathSample p = sample_path(0.25, 1.0, rng);
        const double x = p.points.back().x;
        sum += x;
        sum2 += x * x;
    }
    const double var = (sum2 - sum * sum / n) / (n - 1.0);
    CHECK(std::fabs(var - 1.0) <= 3.0 * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST_CASE("restricted half-duration law matches, two-sample KS at 1%") {
    const std::int64_t n = 10000;
    std::vector<double> a(n), b(n);
    for (std::int64_t i = 0; i < n; ++i) {
        RngStream r1(21, static_cast<std::uint64_t>(i));
        const PathSample full = sample_path(0.05, 1.0, r1);
        a[static_cast<std::size_t>(i)] = full.points[full.points.size() / 2].x;  // time 1/2
        RngStream r2(22, static_cast<std::uint64_t>(i));
        const PathSample half = sample_path(0.05, 0.5, r2);
        b[static_cast<std::size_t>(i)] = half.points.back().x;
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
        if (a[ia] <= b[ib]) ++ia;
        else ++ib;
        d = std::max(d, std::fabs(static_cast<double>(ia) / a.size() -
                                  static_cast<double>(ib) / b.size()));
    }
    const double crit = 1.628 * std::sqrt(2.0 / static_cast<double>(n));
    CHECK(d <= crit);
}

TEST_CASE("bridge endpoints are pinned exactly") {
    RngStream rng(3, 5);
    const BridgeSpec spec{{0.3, -0.2}, {1.5, 0.7}, 2.0};
    const PathSample p = sample_bridge(spec, 0.1, rng);
    CHECK(p.points.front() == spec.q1);
    CHECK(p.points.back() == spec.q2);
    const PathSample two = sample_bridge(spec, 2.0, rng);
    REQUIRE(two.points.size() == 2);
    CHECK(two.points[0] == spec.q1);
    CHECK(two.points[1] == spec.q2);
}

TEST_CASE("bridge midpoint moments") {
    const std::int64_t n = 100000;
    const double duration = 2.0;
    double sx = 0.0, sxx = 0.0, sy = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        RngStream rng(33, static_cast<std::uint64_t>(i));
        const PathSample p = sample_bridge({{0, 0}, {0, 0}, duration}, duration / 2.0, rng);
        const Vec2 mid = p.points[1];
        sx += mid.x;
        sxx += mid.x * mid.x;
        sy += mid.y;
    }
    const double tol_mean = 3.0 * std::sqrt(duration / 4.0 / static_cast<double>(n));
    CHECK(std::fabs(sx / n) <= tol_mean);
    CHECK(std::fabs(sy / n) <= tol_mean);
    const double var = (sxx - sx * sx / n) / (n - 1.0);
    // midpoint variance s(T-s)/T = T/4
    CHECK(std::fabs(var - duration / 4.0) <=
          3.0 * std::sqrt(2.0 / static_cast<double>(n)) * duration / 4.0);
}

TEST_CASE("bridge interior marginal moments at s = T/4") {
    const std::int64_t n = 50000;
    const double duration = 1.0;
    const Vec2 q1{1.0, 0.0}, q2{3.0, 1.0};
    double sx = 0.0, sxx = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        RngStream rng(34, static_cast<std::uint64_t>(i));
        const PathSample p = sample_bridge({q1, q2, duration}, 0.25, rng);
        sx += p.points[1].x;
        sxx += p.points[1].x * p.points[1].x;
    }
    const double s = 0.25;
    const double mean_want = q1.x + (s / duration) * (q2.x - q1.x);
    const double var_want = s * (duration - s) / duration;
    const double mean = sx / n;
    CHECK(std::fabs(mean - mean_want) <= 3.0 * std::sqrt(var_want / n));
    const double var = (sxx - sx * sx / n) / (n - 1.0);
    CHECK(std::fabs(var - var_want) <= 3.0 * std::sqrt(2.0 / n) * var_want);
}

TEST_CASE("refine preserves grid points and is the identity at factor 1") {
    RngStream rng(4, 9);
    const PathSample base = sample_path(0.25, 1.0, rng);
    RngStream r2(4, 10);
    const PathSample same = refine(base, 1, r2);
    CHECK(same.points == base.points);
    RngStream r3(4, 11);
    const PathSample fine = refine(base, 4, r3);
    CHECK(fine.dt == doctest::Approx(base.dt / 4.0));
    REQUIRE(fine.points.size() == (base.points.size() - 1) * 4 + 1);
    for (std::size_t i = 0; i < base.points.size(); ++i)
        CHECK(fine.points[i * 4] == base.points[i]);
}

TEST_CASE("refined increments have the fine-grid variance") {
    const std::int64_t n = 100000;
    double s = 0.0, s2 = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        RngStream rng(55, static_cast<std::uint64_t>(i));
        PathSample two;
        two.dt = 1.0;
        two.points = {{0, 0}, {0, 0}};
        two.points[1] = rng.normal_pair();
        const PathSample fine = refine(two, 2, rng);
        const double inc = fine.points[1].x - fine.points[0].x;
        s += inc;
        s2 += inc * inc;
    }
    const double var = (s2 - s * s / n) / (n - 1.0);
    const double want = 0.5;  // dt / factor
    CHECK(std::fabs(var - want) <= 3.0 * std::sqrt(2.0 / n) * want);
}

TEST_CASE("first_exit_index scans the y coordinate") {
    PathSample p;
    p.dt = 1.0;
    p.points = {{0, 0}, {0, 0.5}, {0, 1.2}};
    CHECK(first_exit_index(p, 1.0) == std::size_t{2});
    CHECK(first_exit_index(p, 0.4) == std::size_t{1});
    PathSample flat;
    flat.dt = 1.0;
    flat.points = {{0, 0}, {0, 0}, {0, 0}};
    CHECK(!first_exit_index(flat, 1.0).has_value());
    CHECK_THROWS_AS(first_exit_index(p, 0.0), std::invalid_argument);
}

TEST_CASE("simple random walk structure and moments") {
    RngStream rng(6, 0);
    const auto single = sample_srw(0, rng);
    REQUIRE(single.size() == 1);
    CHECK(single[0] == std::array<int, 2>{0, 0});

    RngStream rng2(6, 1);
    const auto walk = sample_srw(500, rng2);
    for (std::size_t i = 1; i < walk.size(); ++i) {
        const int l1 = std::abs(walk[i][0] - walk[i - 1][0]) + std::abs(walk[i][1] - walk[i - 1][1]);
        CHECK(l1 == 1);
    }

    const std::int64_t n = 100000;
    double sx = 0.0, sy = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        RngStream r(66, static_cast<std::uint64_t>(i));
        const auto w = sample_srw(100, r);
        sx += w.back()[0];
        sy += w.back()[1];
    }
    const double tol = 3.0 * std::sqrt(50.0 / static_cast<double>(n));  // var = steps/2
    CHECK(std::fabs(sx / n) <= tol);
    CHECK(std::fabs(sy / n) <= tol);
}

TEST_CASE("path csv dump") {
    PathSample p;
    p.dt = 0.5;
    p.points = {{0, 0}, {1, -1}};
    std::ostringstream os;
    write_path_csv(p, os);
    CHECK(os.str() == "t,x,y\n0,0,0\n0.5,1,-1\n");
}
