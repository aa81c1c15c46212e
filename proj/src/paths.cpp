#include "sausagelab/paths.hpp"

#include <cmath>
#include <stdexcept>

#include "sausagelab/io.hpp"

namespace sausagelab {

namespace {

std::size_t step_count(double dt, double duration) {
    if (!std::isfinite(dt) || !std::isfinite(duration))
        throw std::invalid_argument("path sampling: non-finite dt or duration");
    if (!(dt > 0.0) || !(dt <= duration))
        throw std::invalid_argument("path sampling: need 0 < dt <= duration");
    return static_cast<std::size_t>(std::llround(duration / dt));
}

}  // namespace

PathSample sample_path(double dt, double duration, RngStream& rng) {
    const std::size_t n = std::max<std::size_t>(1, step_count(dt, duration));
    PathSample path;
    path.dt = duration / static_cast<double>(n);
    path.seed_record = rng.record();
    path.points.reserve(n + 1);
    path.points.emplace_back(0.0, 0.0);
    const double sd = std::sqrt(path.dt);
    Vec2 p{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        p += rng.normal_pair() * sd;
        path.points.push_back(p);
    }
    return path;
}

PathSample sample_bridge(const BridgeSpec& spec, double dt, RngStream& rng) {
    if (!(spec.duration > 0.0)) throw std::invalid_argument("sample_bridge: duration must be positive");
    const std::size_t n = std::max<std::size_t>(1, step_count(dt, spec.duration));
    PathSample path;
    path.dt = spec.duration / static_cast<double>(n);
    path.seed_record = rng.record();
    path.points.reserve(n + 1);
    path.points.push_back(spec.q1);
    Vec2 p = spec.q1;
    for (std::size_t i = 1; i < n; ++i) {
        // Given position p with m sub-steps left to reach q2, the next grid
        // point is Gaussian with mean p + (q2-p)/m and variance dt*(m-1)/m.
        const double m = static_cast<double>(n - i + 1);
        const Vec2 mean = p + (spec.q2 - p) * (1.0 / m);
        const double sd = std::sqrt(path.dt * (m - 1.0) / m);
        p = mean + rng.normal_pair() * sd;
        path.points.push_back(p);
    }
    path.points.push_back(spec.q2);
    return path;
}

PathSample refine(const PathSample& path, int factor, RngStream& rng) {
    if (factor < 1) throw std::invalid_argument("refine: factor must be >= 1");
    if (path.points.empty()) throw std::invalid_argument("refine: empty path");
    if (factor == 1 || path.points.size() == 1) return path;
    PathSample fine;
    fine.dt = path.dt / factor;
    fine.seed_record = path.seed_record;
    fine.points.reserve((path.points.size() - 1) * factor + 1);
    fine.points.push_back(path.points.front());
    for (std::size_t seg = 0; seg + 1 < path.points.size(); ++seg) {
        const Vec2 target = path.points[seg + 1];
        Vec2 p = path.points[seg];
        for (int k = 1; k < factor; ++k) {
            const double m = static_cast<double>(factor - k + 1);
            const Vec2 mean = p + (target - p) * (1.0 / m);
            const double sd = std::sqrt(fine.dt * (m - 1.0) / m);
            p = mean + rng.normal_pair() * sd;
            fine.points.push_back(p);
        }
        fine.points.push_back(target);
    }
    return fine;
}

std::optional<std::size_t> first_exit_index(const PathSample& path, double band) {
    if (!(band > 0.0)) throw std::invalid_argument("first_exit_index: band must be positive");
    for (std::size_t i = 0; i < path.points.size(); ++i)
        if (std::fabs(path.points[i].y) >= band) return i;
    return std::nullopt;
}

std::vector<std::array<int, 2>> sample_srw(int n_steps, RngStream& rng) {
    if (n_steps < 0) throw std::invalid_argument("sample_srw: n_steps must be >= 0");
    std::vector<std::array<int, 2>> walk;
    walk.reserve(static_cast<std::size_t>(n_steps) + 1);
    walk.push_back({0, 0});
    int x = 0, y = 0;
    for (int i = 0; i < n_steps; ++i) {
        switch (rng.next_u64() & 3u) {
            case 0: ++x; break;
            case 1: --x; break;
            case 2: ++y; break;
            default: --y; break;
        }
        walk.push_back({x, y});
    }
    return walk;
}

void write_path_csv(const PathSample& path, std::ostream& out) {
    out << "t,x,y\n";
    for (std::size_t i = 0; i < path.points.size(); ++i) {
        out << format_g17(static_cast<double>(i) * path.dt) << ',' << format_g17(path.points[i].x)
            << ',' << format_g17(path.points[i].y) << '\n';
    }
}

}  // namespace sausagelab
