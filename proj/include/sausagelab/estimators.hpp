#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sausagelab/analytic.hpp"
#include "sausagelab/estimate.hpp"
#include "sausagelab/paths.hpp"
#include "sausagelab/sausage.hpp"
#include "sausagelab/wos.hpp"

namespace sausagelab {

// ---------------------------------------------------------------- naive MC

struct XiSummary {
    double mean = 0.0;
    double sd = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::vector<std::int64_t> hist;  // 20 bins over [0,1]
    std::int64_t n = 0;
};

struct NaiveResult {
    Estimate p_cover;  // P[sausage covers the whole segment]
    Estimate p_theta;  // P[Xi >= theta]
    XiSummary xi;
    double dt = 0.0;
};

// Samples n unit-duration paths, computes Xi through the sausage geometry.
// dt <= 0 selects the default (epsilon/4)^2.
NaiveResult naive_mc(const SausageParams& params, std::int64_t n, double dt, std::uint64_t seed,
                     int workers = 0);

// ------------------------------------------------------------ corridor IS

struct CorridorRun {
    CorridorSpec spec;
    std::vector<Vec2> checkpoints;  // N^2 points, one per ball
    double log_weight = 0.0;        // sum of log one-step ball probabilities
    PathSample fine_path;           // bridge infill through all checkpoints
};

// One corridor-conditioned path: checkpoints drawn sequentially, each Gaussian
// step conditioned into its ball by rejection; the exact step probability is
// accumulated into log_weight. N = ceil(gamma * K_tune * |log(epsilon/2)|).
CorridorRun corridor_sample(double epsilon, double gamma, double k_tune, double dt_fine,
                            std::uint64_t seed, std::uint64_t sample);

struct IsLowerResult {
    Estimate log_p_theta;           // log-domain estimate of P[{Xi >= theta} and corridor event]
    Estimate log_p_cover;           // same for full coverage
    Estimate log_p_theta_discrete;  // grid-point criterion from the construction
    std::int64_t n_theta_success = 0;
    std::int64_t n_cover_success = 0;
    std::int64_t n_discrete_success = 0;
    int n_balls = 0;  // realized N
    double gamma = 0.0;
    double mean_checkpoint_coverage = 0.0;  // realized fraction of grid points covered
    double log_upper_bound_theta = 0.0;     // 95% bound when zero successes
    bool zero_success_theta = false;
    bool zero_success_cover = false;
};

// Importance-sampling lower bound: mean of exp(log_weight) * indicator over n
// corridor samples, reported in the log domain. gamma <= 0 selects the
// tuning gamma = |log((1-theta)/3)|.
IsLowerResult is_lower_bound(const SausageParams& params, double gamma, double k_tune,
                             std::int64_t n, double dt_fine, std::uint64_t seed, int workers = 0);

// --------------------------------------------------------- local time tail

struct LocalTimeProfile {
    double bin_width = 0.0;
    std::vector<double> bin_centers;
    std::vector<double> density;  // occupation time / bin width
    double sup_stat = 0.0;        // U = max density
};

// Binned occupation density of a 1D sample path observed at step left points.
LocalTimeProfile local_time_profile(const std::vector<double>& values, double dt,
                                    double bin_width);

struct LocalTimeTailReport {
    double slope = 0.0;      // of log P[U >= u] against u^2
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<std::pair<double, double>> tail_points;  // (u, empirical tail prob)
    double max_conservation_error = 0.0;                 // worst |integral - duration|
    double u_mean = 0.0;
    std::int64_t n = 0;
    bool inconclusive = false;  // too few tail samples
};

LocalTimeTailReport local_time_tail(std::int64_t n_paths, double dt, double bin_width,
                                    std::uint64_t seed, int workers = 0);

// -------------------------------------------------------- bridge small ball

struct BridgeHitRow {
    double delta = 0.0;
    Estimate p_hat;
    double p_log_delta = 0.0;  // p_hat * |log delta|
};

struct BridgeHitReport {
    std::vector<BridgeHitRow> rows;
    double fitted_inv_k = 0.0;  // min over rows of p_hat * |log delta|
    bool monotone = true;       // p_hat nonincreasing as delta shrinks, within 3 sigma
};

struct BridgeGeometry {
    Vec2 q1, q2, q3;  // pairwise distances <= 3 in rescaled units
};

// Probability a unit-duration bridge from q1 to q2 enters the delta-ball
// around q3, with recursive bridge refinement near the ball down to
// dt = delta^2/16 per target.
BridgeHitReport bridge_hit_experiment(const std::vector<double>& delta_list, std::int64_t n,
                                      const BridgeGeometry& geometry, std::uint64_t seed,
                                      int workers = 0);

// ------------------------------------------------------- strip conditioning

struct StripCondReport {
    Estimate p_g2;           // P[Xi >= theta]
    Estimate p_g2_given_g1;  // conditioned on no strip exit before time 1
    Estimate p_g1;
    double difference = 0.0;  // conditional minus unconditional
    double diff_stderr = 0.0;
    std::int64_t n_g1 = 0;
    bool inconclusive = false;  // fewer than 1e3 conditioning paths
};

StripCondReport strip_conditioning_check(const SausageParams& params, std::int64_t n, double dt,
                                         std::uint64_t seed, int workers = 0);

// ---------------------------------------------------------- martingale track

struct MartingaleCheckpoint {
    double t = 0.0;
    double y = 0.0;          // path y-coordinate at the checkpoint
    double covered = 0.0;    // m(A_t)
    double mhat = 0.0;       // covered + remaining-hit integral estimate
    double noise_var = 0.0;  // WoS variance propagated into mhat
    bool active = false;     // checkpoint before the strip exit
    bool skipped = false;    // WoS budget exhausted here
};

struct MartingaleTrack {
    std::vector<MartingaleCheckpoint> checkpoints;
    std::optional<std::size_t> tau_index;  // strip exit index on the path grid
};

// Tracks Mhat_t = m(A_t) + sum over uncovered alpha of f(B_t, alpha) dalpha at
// ~n_checkpoints times along one path; frozen at m(A_tau) after the strip exit.
MartingaleTrack martingale_track(const PathSample& path, double epsilon, double alpha_spacing,
                                 const WosConfig& wos_cfg, std::uint64_t seed,
                                 std::uint64_t sample_base, int n_checkpoints = 50,
                                 int workers = 0);

struct MartingaleReport {
    double mean_increment = 0.0;
    double mean_increment_stderr = 0.0;
    std::int64_t n_increments = 0;
    double fitted_c0 = 0.0;        // 99th percentile of squared-increment / unit ceiling
    double fraction_below = 0.0;   // of squared increments below the fitted ceiling
    double m0_mean = 0.0;          // average Mhat at t = 0
    double m0_bound = 0.0;         // g(0) reference it must not exceed
    double m0_bound_stderr = 0.0;
    std::int64_t skipped_checkpoints = 0;
    std::int64_t n_paths = 0;
    double azuma_tail_at_half = 0.0;  // exp(-(1/2 - M0)^2 / 2L) overlay, L from fitted c0
};

MartingaleReport martingale_experiment(std::int64_t n_paths, double epsilon, double alpha_spacing,
                                       const WosConfig& wos_cfg, double dt, std::uint64_t seed,
                                       int n_checkpoints = 50, int workers = 0);

// -------------------------------------------------------------- discrete SRW

// P[simple random walk of n_sites^2 steps visits >= theta * n_sites of the
// marked sites (1,0), ..., (n_sites,0)].
Estimate srw_cover(int n_sites, std::int64_t n_walks, double theta, std::uint64_t seed,
                   int workers = 0);

}  // namespace sausagelab
