#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "sausagelab/rng.hpp"

namespace sausagelab {

// Numerical routine failed to reach its target accuracy.
struct NumericalError : std::runtime_error {
    NumericalError(const std::string& what, double achieved)
        : std::runtime_error(what + " (achieved error " + std::to_string(achieved) + ")"),
          achieved_error(achieved) {}
    double achieved_error;
};

// A Monte Carlo result. When log_domain is set, mean and std_error describe
// the natural log of the estimated quantity.
struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t n = 0;
    SeedRecord seed;
    bool log_domain = false;
};

// Wilson score interval half-width at z standard deviations; stays positive
// at p_hat = 0 so zero-success runs still carry an uncertainty.
inline double wilson_half_width(double p_hat, std::int64_t n, double z = 1.0) {
    if (n <= 0) return 0.0;
    const double nn = static_cast<double>(n);
    const double z2 = z * z;
    return z * std::sqrt(p_hat * (1.0 - p_hat) / nn + z2 / (4.0 * nn * nn)) / (1.0 + z2 / nn);
}

inline Estimate proportion_estimate(std::int64_t successes, std::int64_t n, SeedRecord seed) {
    Estimate e;
    e.n = n;
    e.seed = seed;
    e.mean = n > 0 ? static_cast<double>(successes) / static_cast<double>(n) : 0.0;
    e.std_error = wilson_half_width(e.mean, n);
    return e;
}

}  // namespace sausagelab
