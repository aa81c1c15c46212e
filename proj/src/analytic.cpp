#include "sausagelab/analytic.hpp"

#include <cmath>
#include <stdexcept>

namespace sausagelab {

namespace {

double clamp01(double p) {
    if (p < 0.0) return 0.0;
    if (p > 1.0) return 1.0;
    return p;
}

}  // namespace

double annulus_hit_prob(double z_radius, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0) || !(z_radius > 0.0))
        throw std::invalid_argument("annulus_hit_prob: radii must be positive");
    if (!(a < b)) throw std::invalid_argument("annulus_hit_prob: need a < b");
    if (z_radius < a || z_radius > b)
        throw std::invalid_argument("annulus_hit_prob: start radius outside [a, b]");
    return clamp01(std::log(b / z_radius) / std::log(b / a));
}

double exit_below_prob(double y, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("exit_below_prob: need lo < hi");
    if (y < lo || y > hi) throw std::invalid_argument("exit_below_prob: y outside [lo, hi]");
    return clamp01((hi - y) / (hi - lo));
}

// Poisson mixture of central chi-square(2m) tails: with lam = (d/s)^2 and
// x = (r/s)^2, the probability is sum_k Poisson(k; lam/2) * P[chi2_{2k+2} <= x].
// Each term is the exact radial integral of one series term of the Bessel-type
// integrand, so truncating after the Poisson mass is spent bounds the absolute
// error by the unspent mass.
double gaussian_disk_prob(double center_dist, double sigma, double radius) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_disk_prob: sigma must be positive");
    if (center_dist < 0.0 || radius < 0.0)
        throw std::invalid_argument("gaussian_disk_prob: distances must be nonnegative");
    if (radius == 0.0) return 0.0;

    const double lam_half = 0.5 * (center_dist / sigma) * (center_dist / sigma);
    const double x_half = 0.5 * (radius / sigma) * (radius / sigma);

    // Far-field: the whole disk is in the Gaussian's tail.
    if (center_dist > radius) {
        const double gap = (center_dist - radius) / sigma;
        if (0.5 * gap * gap > 80.0) return 0.0;  // below 1e-34, far under target error
    }

    constexpr double kTol = 1e-12;
    constexpr int kMaxTerms = 200000;

    double pois = std::exp(-lam_half);        // Poisson(k; lam/2) weight
    double spent = pois;                      // Poisson mass consumed so far
    double chi_term = std::exp(-x_half);      // e^{-x/2} (x/2)^j / j! at j = k
    double chi_tail = chi_term;               // sum_{j<=k} of the above
    double cdf = 1.0 - chi_tail;              // P[chi2_{2k+2} <= x]
    double total = pois * cdf;
    for (int k = 1; k < kMaxTerms; ++k) {
        if (1.0 - spent < kTol) return clamp01(total);
        pois *= lam_half / k;
        chi_term *= x_half / k;
        chi_tail += chi_term;
        cdf = 1.0 - chi_tail;
        if (cdf < 0.0) cdf = 0.0;
        total += pois * cdf;
        spent += pois;
    }
    if (1.0 - spent < kTol) return clamp01(total);
    throw NumericalError("gaussian_disk_prob: series did not converge", 1.0 - spent);
}

CorridorSpec corridor_centers(int n) {
    if (n < 1) throw std::invalid_argument("corridor_centers: N must be >= 1");
    CorridorSpec spec;
    spec.n_balls_param = n;
    spec.radius = 1.0 / n;
    spec.checkpoint_dt = 1.0 / (static_cast<double>(n) * n);
    spec.center_abscissas.reserve(static_cast<std::size_t>(n) * n);
    for (long j = 1; j <= static_cast<long>(n) * n; ++j) {
        const long m = j % (2L * n);
        const long k = m <= n ? m : 2L * n - m;  // triangle wave in units of 1/N
        spec.center_abscissas.push_back(static_cast<double>(k) / n);
    }
    return spec;
}

Theorem1Curves theorem1_bounds(double epsilon, double theta, const BoundParams& params) {
    if (!(params.c1 > 0.0 && params.c2 > 0.0 && params.c3 > 0.0 && params.c4 > 0.0))
        throw std::invalid_argument("theorem1_bounds: constants must be positive");
    if (!(epsilon > 0.0) || epsilon >= std::exp(-1.0))
        throw std::invalid_argument("theorem1_bounds: need 0 < epsilon < 1/e");
    if (!(theta > 0.0) || theta > 1.0)
        throw std::invalid_argument("theorem1_bounds: need theta in (0, 1]");
    const double le = std::fabs(std::log(epsilon));   // > 1
    const double lle = std::log(le);                  // > 0
    Theorem1Curves c;
    c.upper = params.c1 * std::exp(-le * le / (params.c2 * lle * lle));
    c.lower = std::exp(-params.c4 * le * le * le * le);
    c.upper_measure = std::exp(-le * le * theta * theta / (params.c3 * lle * lle));
    const double lt = std::fabs(std::log((1.0 - theta) / 3.0));
    c.lower_measure = std::exp(-params.c4 * lt * lt * le * le);
    return c;
}

}  // namespace sausagelab
