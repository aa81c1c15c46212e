#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "sausagelab/geom.hpp"
#include "sausagelab/rng.hpp"

namespace sausagelab {

// A discretized planar trajectory on a uniform time grid. Immutable after
// creation; points[0] is the start.
struct PathSample {
    double dt = 0.0;
    std::vector<Vec2> points;
    SeedRecord seed_record;

    Vec2 start() const { return points.front(); }
    std::size_t size() const { return points.size(); }
    double duration() const { return static_cast<double>(points.size() - 1) * dt; }
};

struct BridgeSpec {
    Vec2 q1;
    Vec2 q2;
    double duration = 0.0;
};

// Standard planar Brownian motion from the origin, duration/dt steps of
// per-coordinate variance dt. dt is snapped to duration/round(duration/dt)
// so the grid is exactly uniform.
PathSample sample_path(double dt, double duration, RngStream& rng);

// Brownian bridge pinned at q1 and q2, sequential conditional-Gaussian
// construction; endpoints are exact.
PathSample sample_bridge(const BridgeSpec& spec, double dt, RngStream& rng);

// Bridge infill between existing grid points: new spacing dt/factor, original
// points preserved at their times.
PathSample refine(const PathSample& path, int factor, RngStream& rng);

// Smallest index i with |y_i| >= band, if any.
std::optional<std::size_t> first_exit_index(const PathSample& path, double band);

// Simple random walk on Z^2 from the origin, each neighbor probability 1/4.
// Returns n_steps + 1 lattice points.
std::vector<std::array<int, 2>> sample_srw(int n_steps, RngStream& rng);

// Debug dump: one CSV row per grid point (t, x, y), header included.
void write_path_csv(const PathSample& path, std::ostream& out);

}  // namespace sausagelab
