#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sausagelab/sausage.hpp"

using namespace sausagelab;

namespace {

PathSample make_path(std::vector<Vec2> pts, double dt = 1.0) {
    PathSample p;
    p.dt = dt;
    p.points = std::move(pts);
    return p;
}

// Independent oracle: fraction of a fine x-grid within eps of the polyline.
double scan_measure(const PathSample& path, double eps, int n_grid = 100000) {
    int hits = 0;
    for (int k = 0; k < n_grid; ++k) {
        const double x = (static_cast<double>(k) + 0.5) / n_grid;
        const Vec2 q{x, 0.0};
        double d = dist(q, path.points[0]);
        for (std::size_t i = 0; i + 1 < path.points.size(); ++i)
            d = std::min(d, dist_point_segment(q, path.points[i], path.points[i + 1]));
        if (d <= eps) ++hits;
    }
    return static_cast<double>(hits) / n_grid;
}

PathSample random_polyline(std::uint64_t seed, std::uint64_t i, int n_pts = 6) {
    RngStream rng(seed, i);
    std::vector<Vec2> pts;
    for (int k = 0; k < n_pts; ++k)
        pts.push_back({-0.25 + 1.5 * rng.uniform(), -0.6 + 1.2 * rng.uniform()});
    return make_path(std::move(pts));
}

}  // namespace

TEST_CASE("stationary point path covers a chord") {
    const PathSample p = make_path({{0.5, 0.0}});
    const IntervalUnion u = cover_intervals(p, 0.1);
    REQUIRE(u.intervals().size() == 1);
    CHECK(u.intervals()[0].first == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(u.intervals()[0].second == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(xi_measure(u) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("straight axis path covers the whole segment exactly") {
    const PathSample p = make_path({{0.0, 0.0}, {1.0, 0.0}});
    for (const double eps : {1e-6, 0.01, 0.3}) {
        const IntervalUnion u = cover_intervals(p, eps);
        REQUIRE(u.intervals().size() == 1);
        CHECK(u.intervals()[0] == std::pair<double, double>{0.0, 1.0});
        CHECK(xi_measure(u) == 1.0);
        CHECK(covers_segment(u, 0.0));
    }
}

TEST_CASE("path too far above the axis covers nothing") {
    const double eps = 0.1;
    const PathSample p = make_path({{0.0, 2 * eps}, {1.0, 2 * eps}});
    CHECK(cover_intervals(p, eps).empty());
}

TEST_CASE("xi_measure arithmetic") {
    CHECK(xi_measure(IntervalUnion{}) == 0.0);
    CHECK(xi_measure(IntervalUnion::normalize({{0.0, 1.0}})) == 1.0);
    CHECK(xi_measure(IntervalUnion::normalize({{0.1, 0.2}, {0.5, 0.9}})) ==
          doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("covers_segment merge and gap handling") {
    CHECK(covers_segment(IntervalUnion::normalize({{0.0, 1.0}}), 0.0));
    CHECK(covers_segment(IntervalUnion::normalize({{0.0, 0.5}, {0.5, 1.0}}), 0.0));
    CHECK(!covers_segment(IntervalUnion::normalize({{0.0, 0.4}, {0.6, 1.0}}), 0.0));
    CHECK(covers_segment(IntervalUnion::normalize({{0.1, 0.9}}), 0.1));
    CHECK_THROWS_AS(covers_segment(IntervalUnion{}, -0.1), std::invalid_argument);
}

TEST_CASE("covering with zero slack forces measure exactly one") {
    for (std::uint64_t i = 0; i < 200; ++i) {
        const PathSample p = random_polyline(901, i);
        const IntervalUnion u = cover_intervals(p, 0.35);
        if (covers_segment(u, 0.0)) CHECK(xi_measure(u) == 1.0);
    }
}

TEST_CASE("interval normalization invariants") {
    const IntervalUnion u = IntervalUnion::normalize({{0.5, 0.6}, {-1.0, 0.2}, {0.2, 0.3}, {0.9, 2.0}});
    const auto& iv = u.intervals();
    REQUIRE(iv.size() == 3);
    CHECK(iv[0] == std::pair<double, double>{0.0, 0.3});
    CHECK(iv[1] == std::pair<double, double>{0.5, 0.6});
    CHECK(iv[2] == std::pair<double, double>{0.9, 1.0});
    for (std::size_t i = 0; i + 1 < iv.size(); ++i) CHECK(iv[i].second < iv[i + 1].first);
    CHECK(u.contains_point(0.25));
    CHECK(!u.contains_point(0.4));
}

TEST_CASE("cover agrees with the brute-force scan") {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 150; ++i) {
        const PathSample p = random_polyline(902, i);
        for (const double eps : {0.05, 0.1, 0.3}) {
            const double xi = xi_measure(cover_intervals(p, eps));
            const double scan = scan_measure(p, eps);
            worst = std::max(worst, std::fabs(xi - scan));
        }
    }
    CHECK(worst <= 2e-4);
}

TEST_CASE("monotone in epsilon as exact set containment") {
    for (std::uint64_t i = 0; i < 200; ++i) {
        const PathSample p = random_polyline(903, i);
        const IntervalUnion small = cover_intervals(p, 0.08);
        const IntervalUnion big = cover_intervals(p, 0.15);
        CHECK(big.contains(small));
        CHECK(xi_measure(big) >= xi_measure(small));
    }
}

TEST_CASE("monotone in time via stop_index") {
    for (std::uint64_t i = 0; i < 100; ++i) {
        const PathSample p = random_polyline(904, i);
        const IntervalUnion early = cover_intervals(p, 0.1, std::size_t{2});
        const IntervalUnion late = cover_intervals(p, 0.1, std::size_t{5});
        CHECK(late.contains(early));
    }
    const PathSample p = random_polyline(904, 0);
    CHECK_THROWS_AS(cover_intervals(p, 0.1, std::size_t{99}), std::invalid_argument);
    // stop at index 0: only the starting point's disk
    const IntervalUnion at0 = cover_intervals(p, 0.1, std::size_t{0});
    CHECK(xi_measure(at0) <= 0.2 + 1e-12);
}

TEST_CASE("translation consistency along the axis") {
    for (std::uint64_t i = 0; i < 100; ++i) {
        PathSample p = random_polyline(905, i);
        // keep both copies interior so clipping to [0,1] is inactive
        for (auto& q : p.points) q.x = 0.3 + 0.2 * (q.x - 0.5);
        PathSample shifted = p;
        const double delta = 0.25;
        for (auto& q : shifted.points) q.x += delta;
        const auto a = cover_intervals(p, 0.05).intervals();
        const auto b = cover_intervals(shifted, 0.05).intervals();
        REQUIRE(a.size() == b.size());
        for (std::size_t k = 0; k < a.size(); ++k) {
            CHECK(b[k].first == doctest::Approx(a[k].first + delta).epsilon(1e-12));
            CHECK(b[k].second == doctest::Approx(a[k].second + delta).epsilon(1e-12));
        }
    }
}

TEST_CASE("adaptive_cover trivial modes") {
    RngStream rng(7, 0);
    const PathSample axis = make_path({{0.0, 0.0}, {1.0, 0.0}}, 1.0);
    const auto res = adaptive_cover(axis, {0.1, 0.5, 2.0}, rng);
    CHECK(xi_measure(res.cover) == 1.0);

    const PathSample p = random_polyline(906, 3);
    RngStream r2(7, 1);
    const auto no_margin = adaptive_cover(p, {0.1, 0.5, 0.0}, r2);
    CHECK(no_margin.cover.intervals() == cover_intervals(p, 0.1).intervals());
    CHECK(no_margin.rounds == 0);
}

TEST_CASE("adaptive_cover closes the coarse-grid coverage gap") {
    // derived oracle: full refinement to dt/64 of the same coarse paths
    const double eps = 0.1;
    const int n_paths = 250;
    double coarse_sum = 0.0, fine_sum = 0.0, adaptive_sum = 0.0;
    for (int i = 0; i < n_paths; ++i) {
        RngStream rng(907, static_cast<std::uint64_t>(i));
        const PathSample coarse = sample_path(0.01, 1.0, rng);
        coarse_sum += xi_measure(cover_intervals(coarse, eps));
        RngStream r_fine(908, static_cast<std::uint64_t>(i));
        fine_sum += xi_measure(cover_intervals(refine(coarse, 64, r_fine), eps));
        RngStream r_ad(909, static_cast<std::uint64_t>(i));
        const auto ad = adaptive_cover(coarse, {eps, 0.5, 2.0}, r_ad);
        adaptive_sum += xi_measure(ad.cover);
    }
    const double coarse_mean = coarse_sum / n_paths;
    const double fine_mean = fine_sum / n_paths;
    const double adaptive_mean = adaptive_sum / n_paths;
    // refinement only (statistically) adds coverage; 3 sigma of Xi in [0,1]
    const double slack = 3.0 * 0.5 / std::sqrt(static_cast<double>(n_paths));
    CHECK(fine_mean >= coarse_mean - slack / 10.0);
    CHECK(adaptive_mean >= coarse_mean - slack / 10.0);
    CHECK(std::fabs(adaptive_mean - fine_mean) <= slack);
}
