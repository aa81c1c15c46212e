#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "sausagelab/paths.hpp"

namespace sausagelab {

// Sorted disjoint closed subintervals of [0,1]; the covered part of the
// target segment. Intervals closer than the merge tolerance are coalesced so
// floating-point seams cannot split a covered stretch.
class IntervalUnion {
public:
    static constexpr double kMergeTol = 1e-12;

    IntervalUnion() = default;

    // Clips to [0,1], drops empty pieces, sorts and merges.
    static IntervalUnion normalize(std::vector<std::pair<double, double>> raw);

    const std::vector<std::pair<double, double>>& intervals() const { return intervals_; }
    bool empty() const { return intervals_.empty(); }

    // Set containment up to tol on endpoints (used by monotonicity checks).
    bool contains(const IntervalUnion& other, double tol = 0.0) const;
    bool contains_point(double x) const;

private:
    std::vector<std::pair<double, double>> intervals_;
};

struct SausageParams {
    double epsilon = 0.0;       // sausage radius
    double theta = 1.0;         // coverage threshold, in (0, 1]
    double refine_margin = 0.0; // adaptive refinement band scale
};

void validate(const SausageParams& params);

// {x in [0,1] : dist((x,0), polyline up to stop_index) <= epsilon}, exact for
// the polyline: each linear segment's capsule is convex, so it meets the axis
// in a single interval found from the two end-disk chords plus the
// perpendicular band of the segment body.
IntervalUnion cover_intervals(const PathSample& path, double epsilon,
                              std::optional<std::size_t> stop_index = std::nullopt);

// Lebesgue measure of the union.
double xi_measure(const IntervalUnion& u);

// True iff the union contains [slack, 1 - slack]. Exact on endpoints, so
// covers_segment(u, 0) implies xi_measure(u) == 1 exactly.
bool covers_segment(const IntervalUnion& u, double slack);

struct AdaptiveCoverOptions {
    double dt_min = 0.0;  // 0: defaults to path.dt / 64
    int max_rounds = 12;
};

struct AdaptiveCoverResult {
    IntervalUnion cover;
    bool budget_limited = false;
    int rounds = 0;
    double final_dt = 0.0;
};

// Bridge-refines any path segment whose distance to the target segment falls
// inside the band (epsilon - m, epsilon + m), m = refine_margin *
// sqrt(dt |log dt|), halving dt until dt_min or no segment qualifies; then
// returns the cover of the refined path.
AdaptiveCoverResult adaptive_cover(const PathSample& path, const SausageParams& params,
                                   RngStream& rng, const AdaptiveCoverOptions& opts = {});

}  // namespace sausagelab
