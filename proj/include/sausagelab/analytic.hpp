#pragma once

#include <vector>

#include "sausagelab/estimate.hpp"

namespace sausagelab {

// Dimensionless constants of the coverage-probability bound curves. The
// curves only assert existence, so these are configuration / fit parameters.
struct BoundParams {
    double c1 = 1.0;
    double c2 = 1.0;
    double c3 = 1.0;
    double c4 = 1.0;
};

// The boustrophedon ball sequence used by the corridor sampler: N^2 balls of
// radius 1/N centered on the x-axis, sweeping [0,1] back and forth N times,
// one checkpoint every 1/N^2 units of time.
struct CorridorSpec {
    int n_balls_param = 0;                  // N
    std::vector<double> center_abscissas;   // N^2 entries
    double radius = 0.0;                    // 1/N
    double checkpoint_dt = 0.0;             // 1/N^2
};

struct Theorem1Curves {
    double upper = 0.0;          // c1 * exp(-|log e|^2 / (c2 log^2|log e|))
    double lower = 0.0;          // exp(-c4 |log e|^4)
    double upper_measure = 0.0;  // exp(-|log e|^2 theta^2 / (c3 log^2|log e|))
    double lower_measure = 0.0;  // exp(-c4 |log((1-theta)/3)|^2 |log e|^2)
};

// P_z[hit circle radius a before circle radius b], started at |z| = z_radius,
// for 0 < a <= z_radius <= b. Result clamped to [0,1].
double annulus_hit_prob(double z_radius, double a, double b);

// 1D Brownian motion from y hits lo before hi: (hi - y) / (hi - lo).
double exit_below_prob(double y, double lo, double hi);

// Probability that an isotropic planar Gaussian (per-coordinate std sigma)
// centered center_dist away from a disk center lands inside the disk of the
// given radius. Absolute error <= 1e-10.
double gaussian_disk_prob(double center_dist, double sigma, double radius);

CorridorSpec corridor_centers(int n);

Theorem1Curves theorem1_bounds(double epsilon, double theta, const BoundParams& params);

}  // namespace sausagelab
