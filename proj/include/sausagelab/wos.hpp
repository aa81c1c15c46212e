#pragma once

#include <cstdint>
#include <vector>

#include "sausagelab/estimate.hpp"
#include "sausagelab/geom.hpp"

namespace sausagelab {

// Hierarchical stream layout: a 32-bit sample id and a 32-bit lane within it.
// Every stochastic operation draws from RngStream(seed, substream(sample, lane)),
// which pins results to (seed, sample) regardless of scheduling.
inline std::uint64_t substream(std::uint64_t sample, std::uint64_t lane) {
    return (sample << 32) | (lane & 0xFFFFFFFFull);
}

struct WosConfig {
    double epsilon = 0.05;     // target ball radius
    double stop_shell = 0.0;   // absorption tolerance; 0 defaults to epsilon/100
    double x_cutoff = 12.0;    // walks beyond |x - alpha| > x_cutoff score 0
    int max_steps = 100000;
    std::int64_t n_walks = 100000;

    double shell() const { return stop_shell > 0.0 ? stop_shell : epsilon / 100.0; }
};

void validate(const WosConfig& cfg);

struct WosEstimate {
    Estimate estimate;
    std::int64_t truncated = 0;  // walks that hit max_steps, scored 0
};

// P[hit the epsilon-ball around (alpha,0) before leaving the strip |y| <= 1],
// estimated by walk-on-spheres from `start`. Deterministic in (seed, sample).
WosEstimate wos_estimate(Vec2 start, double alpha, const WosConfig& cfg, std::uint64_t seed,
                         std::uint64_t sample, int workers = 0);

// Five-point Laplace solve on [-x_cutoff, x_cutoff] x [-1, 1] with value 1 on
// the epsilon-disk at the origin (Shortley-Weller arms at the circle) and 0 on
// the outer boundary. Red-black SOR to a max-norm residual <= tol.
struct FdGrid {
    double h = 0.0;
    double x_cutoff = 0.0;
    int nx = 0;  // cells in x; nodes are (nx+1) * (ny+1)
    int ny = 0;
    std::vector<double> values;  // row-major, j * (nx+1) + i
    double residual = 0.0;
    int sweeps = 0;

    double node(int i, int j) const { return values[static_cast<std::size_t>(j) * (nx + 1) + i]; }
    double value_at(double x, double y) const;  // bilinear
};

FdGrid fd_oracle(double epsilon, double h, double x_cutoff, double tol = 1e-8,
                 int max_sweeps = 200000);

// Inscribed / circumscribed annulus bounds for the strip-minus-ball hitting
// probability started at distance r from the ball center.
struct AnnulusSandwich {
    double lower = 0.0;  // inscribed disk of radius 1
    double upper = 1.0;  // circumscribed disk of the cutoff rectangle
};
AnnulusSandwich annulus_sandwich(double r, double epsilon, double x_cutoff);

struct AlphaGrid {
    double spacing = 0.25;
};

// g(y) = integral over alpha of f((0,y), alpha): trapezoid over the symmetric
// alpha grid on [-A, A], A the largest grid multiple within x_cutoff. The
// integrand tail beyond A is reported as a bias bound from its e^{-alpha}
// decay (unit-constant form).
struct GEstimate {
    Estimate estimate;
    double tail_bias_bound = 0.0;
    double spacing = 0.0;
    std::int64_t truncated = 0;
};

GEstimate g_of_y(double y, double epsilon, const WosConfig& cfg, const AlphaGrid& grid,
                 std::uint64_t seed, std::uint64_t sample_base, int workers = 0);

// Central-difference check of -g'(y) = g(y) / (1 - y).
struct Eq9Report {
    GEstimate g_minus, g_center, g_plus;
    double lhs = 0.0, lhs_stderr = 0.0;   // -(g(y+dy) - g(y-dy)) / (2 dy)
    double rhs = 0.0, rhs_stderr = 0.0;   // g(y) / (1 - y)
    double ratio = 0.0;
    double combined_stderr = 0.0;         // of lhs - rhs
    bool inconclusive = false;            // stderr exceeds 25% of predicted value
};

Eq9Report eq9_identity_check(double y, double epsilon, double dy, const WosConfig& cfg,
                             const AlphaGrid& grid, std::uint64_t seed, int workers = 0);

// Decay-shape checks of the hitting probability: fitted sup constants for the
// |log|y||/|log eps| profile in y and the e^{-alpha} profile in alpha, plus
// monotone-decrease checks at 3 sigma.
struct ShapeRow {
    double coord = 0.0;
    Estimate estimate;
    double shape = 0.0;  // profile reference value at this coordinate
    double ratio = 0.0;  // estimate / shape, the fitted constant candidate
    bool inconclusive = false;
};

struct Lemma4Epsilon {
    double epsilon = 0.0;
    std::vector<ShapeRow> y_rows;
    std::vector<ShapeRow> alpha_rows;
    double c5_fit = 0.0;
    double c6_fit = 0.0;
    bool y_monotone = true;      // within 3 sigma
    bool alpha_monotone = true;  // within 3 sigma
};

struct Lemma4Report {
    std::vector<Lemma4Epsilon> per_epsilon;
};

Lemma4Report lemma4_shape_checks(const std::vector<double>& epsilon_list, const WosConfig& cfg,
                                 std::uint64_t seed, int workers = 0);

}  // namespace sausagelab
