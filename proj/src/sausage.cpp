#include "sausagelab/sausage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sausagelab {

namespace {

struct XInterval {
    double lo = 1.0;
    double hi = 0.0;
    bool ok = false;
};

void widen(XInterval& acc, double lo, double hi) {
    if (!(lo <= hi)) return;
    if (!acc.ok) {
        acc = {lo, hi, true};
    } else {
        acc.lo = std::min(acc.lo, lo);
        acc.hi = std::max(acc.hi, hi);
    }
}

// x-chord of the disk of radius eps around q.
void add_disk_chord(XInterval& acc, const Vec2& q, double eps) {
    if (std::fabs(q.y) > eps) return;
    const double w = std::sqrt(eps * eps - q.y * q.y);
    widen(acc, q.x - w, q.x + w);
}

// x-interval of the capsule of radius eps around segment [p0, p1] intersected
// with the x-axis. The capsule is convex, so the union of the two end-disk
// chords and the perpendicular band is one interval.
XInterval capsule_axis_slice(const Vec2& p0, const Vec2& p1, double eps) {
    XInterval acc;
    add_disk_chord(acc, p0, eps);
    add_disk_chord(acc, p1, eps);

    const Vec2 d = p1 - p0;
    const double len2 = d.norm2();
    if (len2 > 0.0) {
        const double len = std::sqrt(len2);
        // Perpendicular distance <= eps: |a x + b| <= eps * len, linear in x.
        const double a = -d.y;
        const double b = d.y * p0.x - d.x * p0.y;
        // Foot parameter in [0,1]: 0 <= c x + e <= len2.
        const double c = d.x;
        const double e = -d.x * p0.x - d.y * p0.y;

        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        bool feasible = true;

        if (a != 0.0) {
            const double r1 = (-b - eps * len) / a;
            const double r2 = (-b + eps * len) / a;
            lo = std::max(lo, std::min(r1, r2));
            hi = std::min(hi, std::max(r1, r2));
        } else if (std::fabs(b) > eps * len) {
            feasible = false;
        }
        if (feasible) {
            if (c != 0.0) {
                const double r1 = (0.0 - e) / c;
                const double r2 = (len2 - e) / c;
                lo = std::max(lo, std::min(r1, r2));
                hi = std::min(hi, std::max(r1, r2));
            } else if (e < 0.0 || e > len2) {
                feasible = false;
            }
            if (feasible && lo <= hi) widen(acc, lo, hi);
        }
    }
    return acc;
}

double dist_segment_segment(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1) {
    // Proper intersection means distance zero.
    const Vec2 da = a1 - a0, db = b1 - b0;
    const double d1 = da.cross(b0 - a0), d2 = da.cross(b1 - a0);
    const double d3 = db.cross(a0 - b0), d4 = db.cross(a1 - b0);
    if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0)
        return 0.0;
    return std::min(std::min(dist_point_segment(a0, b0, b1), dist_point_segment(a1, b0, b1)),
                    std::min(dist_point_segment(b0, a0, a1), dist_point_segment(b1, a0, a1)));
}

}  // namespace

IntervalUnion IntervalUnion::normalize(std::vector<std::pair<double, double>> raw) {
    std::vector<std::pair<double, double>> clipped;
    clipped.reserve(raw.size());
    for (auto& [lo, hi] : raw) {
        const double l = std::max(lo, 0.0);
        const double h = std::min(hi, 1.0);
        if (l < h) clipped.emplace_back(l, h);
    }
    std::sort(clipped.begin(), clipped.end());
    IntervalUnion u;
    for (const auto& iv : clipped) {
        if (!u.intervals_.empty() && iv.first <= u.intervals_.back().second + kMergeTol)
            u.intervals_.back().second = std::max(u.intervals_.back().second, iv.second);
        else
            u.intervals_.push_back(iv);
    }
    return u;
}

bool IntervalUnion::contains(const IntervalUnion& other, double tol) const {
    std::size_t i = 0;
    for (const auto& [lo, hi] : other.intervals_) {
        while (i < intervals_.size() && intervals_[i].second + tol < hi) ++i;
        if (i == intervals_.size()) return false;
        if (intervals_[i].first > lo + tol || intervals_[i].second + tol < hi) return false;
    }
    return true;
}

bool IntervalUnion::contains_point(double x) const {
    for (const auto& [lo, hi] : intervals_) {
        if (x < lo) return false;
        if (x <= hi) return true;
    }
    return false;
}

void validate(const SausageParams& params) {
    if (!(params.epsilon > 0.0)) throw std::invalid_argument("SausageParams: epsilon must be positive");
    if (!(params.theta > 0.0) || params.theta > 1.0)
        throw std::invalid_argument("SausageParams: theta must be in (0, 1]");
    if (params.refine_margin < 0.0)
        throw std::invalid_argument("SausageParams: refine_margin must be nonnegative");
}

IntervalUnion cover_intervals(const PathSample& path, double epsilon,
                              std::optional<std::size_t> stop_index) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("cover_intervals: epsilon must be positive");
    if (path.points.empty()) throw std::invalid_argument("cover_intervals: empty path");
    const std::size_t last =
        stop_index ? std::min(*stop_index, path.points.size() - 1) : path.points.size() - 1;
    if (stop_index && *stop_index >= path.points.size())
        throw std::invalid_argument("cover_intervals: stop_index past end of path");

    std::vector<std::pair<double, double>> raw;
    raw.reserve(last + 1);
    if (last == 0) {
        const XInterval s = capsule_axis_slice(path.points[0], path.points[0], epsilon);
        if (s.ok) raw.emplace_back(s.lo, s.hi);
    }
    for (std::size_t i = 0; i < last; ++i) {
        const XInterval s = capsule_axis_slice(path.points[i], path.points[i + 1], epsilon);
        if (s.ok) raw.emplace_back(s.lo, s.hi);
    }
    return IntervalUnion::normalize(std::move(raw));
}

double xi_measure(const IntervalUnion& u) {
    double total = 0.0;
    for (const auto& [lo, hi] : u.intervals()) total += hi - lo;
    return total;
}

bool covers_segment(const IntervalUnion& u, double slack) {
    if (slack < 0.0) throw std::invalid_argument("covers_segment: slack must be nonnegative");
    const double lo = slack, hi = 1.0 - slack;
    if (lo >= hi) return true;
    for (const auto& [l, h] : u.intervals())
        if (l <= lo && h >= hi) return true;
    return false;
}

AdaptiveCoverResult adaptive_cover(const PathSample& path, const SausageParams& params,
                                   RngStream& rng, const AdaptiveCoverOptions& opts) {
    validate(params);
    AdaptiveCoverResult res;
    res.final_dt = path.dt;
    if (params.refine_margin == 0.0 || path.points.size() < 2) {
        res.cover = cover_intervals(path, params.epsilon);
        return res;
    }
    const double dt_min = opts.dt_min > 0.0 ? opts.dt_min : path.dt / 64.0;
    const Vec2 t0{0.0, 0.0}, t1{1.0, 0.0};

    PathSample cur = path;
    for (;;) {
        const double margin =
            params.refine_margin * std::sqrt(cur.dt * std::fabs(std::log(cur.dt)));
        bool qualifies = false;
        for (std::size_t i = 0; i + 1 < cur.points.size(); ++i) {
            const double d = dist_segment_segment(cur.points[i], cur.points[i + 1], t0, t1);
            if (d > params.epsilon - margin && d < params.epsilon + margin) {
                qualifies = true;
                break;
            }
        }
        if (!qualifies) break;
        if (cur.dt / 2.0 < dt_min) break;
        if (res.rounds >= opts.max_rounds) {
            res.budget_limited = true;
            break;
        }
        cur = refine(cur, 2, rng);
        ++res.rounds;
    }
    res.final_dt = cur.dt;
    res.cover = cover_intervals(cur, params.epsilon);
    return res;
}

}  // namespace sausagelab
