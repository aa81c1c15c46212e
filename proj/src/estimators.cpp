#include "sausagelab/estimators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sausagelab/parallel.hpp"

namespace sausagelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_theta(double theta) {
    if (!(theta >= 0.0) || theta > 1.0)
        throw std::invalid_argument("theta must be in [0, 1]");
}

double default_dt(double epsilon) {
    const double q = epsilon / 4.0;
    return q * q;
}

// Log-domain mean of exp(log_w) * indicator with its log-scale stderr.
struct LogMean {
    double log_mean = -kInf;
    double stderr_log = kInf;
    std::int64_t successes = 0;
};

LogMean log_domain_mean(const std::vector<double>& log_weights, const std::vector<char>& hit) {
    LogMean out;
    const std::int64_t n = static_cast<std::int64_t>(log_weights.size());
    double m = -kInf;
    for (std::int64_t i = 0; i < n; ++i)
        if (hit[i]) {
            ++out.successes;
            m = std::max(m, log_weights[i]);
        }
    if (out.successes == 0) return out;
    double s1 = 0.0, s2 = 0.0;
    for (std::int64_t i = 0; i < n; ++i)
        if (hit[i]) {
            const double e = std::exp(log_weights[i] - m);
            s1 += e;
            s2 += e * e;
        }
    const double nn = static_cast<double>(n);
    out.log_mean = m + std::log(s1) - std::log(nn);
    if (n > 1) {
        const double var_scaled = std::max(0.0, (s2 - s1 * s1 / nn) / (nn - 1.0));
        // stderr(p)/p, scale cancels
        out.stderr_log = std::sqrt(var_scaled / nn) * nn / s1;
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------- naive MC

NaiveResult naive_mc(const SausageParams& params, std::int64_t n, double dt, std::uint64_t seed,
                     int workers) {
    if (!(params.epsilon > 0.0)) throw std::invalid_argument("naive_mc: epsilon must be positive");
    validate_theta(params.theta);
    if (n < 1) throw std::invalid_argument("naive_mc: n must be >= 1");
    const double use_dt = dt > 0.0 ? dt : default_dt(params.epsilon);

    struct Acc {
        std::int64_t covers = 0, thetas = 0;
        double sum = 0.0, sum2 = 0.0;
        double min = kInf, max = -kInf;
        std::array<std::int64_t, 20> hist{};
    };
    const Acc acc = chunked_reduce<Acc>(
        n, workers, Acc{},
        [&](std::int64_t b, std::int64_t e) {
            Acc a;
            for (std::int64_t i = b; i < e; ++i) {
                RngStream rng(seed, substream(static_cast<std::uint64_t>(i), 0));
                const PathSample path = sample_path(use_dt, 1.0, rng);
                const IntervalUnion u = cover_intervals(path, params.epsilon);
                const double xi = xi_measure(u);
                if (covers_segment(u, 0.0)) ++a.covers;
                if (xi >= params.theta) ++a.thetas;
                a.sum += xi;
                a.sum2 += xi * xi;
                a.min = std::min(a.min, xi);
                a.max = std::max(a.max, xi);
                ++a.hist[std::min<std::size_t>(19, static_cast<std::size_t>(xi * 20.0))];
            }
            return a;
        },
        [](Acc x, Acc y) {
            Acc a;
            a.covers = x.covers + y.covers;
            a.thetas = x.thetas + y.thetas;
            a.sum = x.sum + y.sum;
            a.sum2 = x.sum2 + y.sum2;
            a.min = std::min(x.min, y.min);
            a.max = std::max(x.max, y.max);
            for (std::size_t k = 0; k < a.hist.size(); ++k) a.hist[k] = x.hist[k] + y.hist[k];
            return a;
        });

    NaiveResult res;
    res.dt = use_dt;
    const SeedRecord sr{seed, 0};
    res.p_cover = proportion_estimate(acc.covers, n, sr);
    res.p_theta = proportion_estimate(acc.thetas, n, sr);
    res.xi.n = n;
    res.xi.mean = acc.sum / static_cast<double>(n);
    res.xi.sd = n > 1 ? std::sqrt(std::max(0.0, (acc.sum2 - acc.sum * acc.sum / n) / (n - 1.0)))
                      : 0.0;
    res.xi.min = acc.min;
    res.xi.max = acc.max;
    res.xi.hist.assign(acc.hist.begin(), acc.hist.end());
    return res;
}

// ------------------------------------------------------------ corridor IS

CorridorRun corridor_sample(double epsilon, double gamma, double k_tune, double dt_fine,
                            std::uint64_t seed, std::uint64_t sample) {
    if (!(epsilon > 0.0) || epsilon >= 0.5)
        throw std::invalid_argument("corridor_sample: need 0 < epsilon < 1/2");
    if (!(gamma > 0.0) || !(k_tune > 0.0))
        throw std::invalid_argument("corridor_sample: gamma and k_tune must be positive");
    if (!(dt_fine > 0.0)) throw std::invalid_argument("corridor_sample: dt_fine must be positive");

    const int n_balls = std::max(
        1, static_cast<int>(std::ceil(gamma * k_tune * std::fabs(std::log(epsilon / 2.0)))));
    CorridorRun run;
    run.spec = corridor_centers(n_balls);
    const double sigma = 1.0 / n_balls;  // per-coordinate std over one leg
    const std::int64_t legs = static_cast<std::int64_t>(run.spec.center_abscissas.size());
    const std::int64_t sub = std::max<std::int64_t>(
        1, std::llround(run.spec.checkpoint_dt / dt_fine));
    const double dt_leg = run.spec.checkpoint_dt / static_cast<double>(sub);

    RngStream rng_cp(seed, substream(sample, 0));
    RngStream rng_bridge(seed, substream(sample, 1));

    run.checkpoints.reserve(legs);
    run.fine_path.dt = dt_leg;
    run.fine_path.seed_record = rng_cp.record();
    run.fine_path.points.reserve(static_cast<std::size_t>(legs * sub) + 1);
    run.fine_path.points.emplace_back(0.0, 0.0);

    Vec2 z_prev{0.0, 0.0};
    for (std::int64_t j = 0; j < legs; ++j) {
        const Vec2 center{run.spec.center_abscissas[static_cast<std::size_t>(j)], 0.0};
        const double p_j = gaussian_disk_prob(dist(z_prev, center), sigma, run.spec.radius);
        if (p_j < 1e-6)
            throw std::runtime_error(
                "corridor_sample: rejection stall, one-step ball probability " +
                std::to_string(p_j) + " at leg " + std::to_string(j));
        Vec2 z;
        std::int64_t attempts = 0;
        do {
            z = z_prev + rng_cp.normal_pair() * sigma;
            if (++attempts > 10000000)
                throw std::runtime_error("corridor_sample: rejection exceeded attempt budget");
        } while (dist(z, center) > run.spec.radius);
        run.log_weight += std::log(p_j);
        run.checkpoints.push_back(z);

        // bridge infill over the leg; endpoints land exactly on the checkpoints
        Vec2 p = z_prev;
        for (std::int64_t k = 1; k < sub; ++k) {
            const double m = static_cast<double>(sub - k + 1);
            const Vec2 mean = p + (z - p) * (1.0 / m);
            const double sd = std::sqrt(dt_leg * (m - 1.0) / m);
            p = mean + rng_bridge.normal_pair() * sd;
            run.fine_path.points.push_back(p);
        }
        run.fine_path.points.push_back(z);
        z_prev = z;
    }
    return run;
}

IsLowerResult is_lower_bound(const SausageParams& params, double gamma, double k_tune,
                             std::int64_t n, double dt_fine, std::uint64_t seed, int workers) {
    validate_theta(params.theta);
    if (n < 1) throw std::invalid_argument("is_lower_bound: n must be >= 1");
    double use_gamma = gamma;
    if (use_gamma <= 0.0) {
        if (params.theta >= 1.0)
            throw std::invalid_argument(
                "is_lower_bound: the theta-tuned gamma needs theta < 1; pass gamma explicitly");
        use_gamma = std::fabs(std::log((1.0 - params.theta) / 3.0));
    }
    const double use_dt_fine = dt_fine > 0.0 ? dt_fine : default_dt(params.epsilon / 2.0);

    const double eps = params.epsilon;
    const std::int64_t b = static_cast<std::int64_t>(std::ceil(1.0 / eps));

    struct PerSample {
        double log_w = 0.0;
        char theta_hit = 0, cover_hit = 0, discrete_hit = 0;
        double covered_frac = 0.0;
    };
    std::vector<PerSample> rows(static_cast<std::size_t>(n));
    int realized_n_balls = 0;

    for_each_chunk(
        n, workers,
        [&](std::int64_t, std::int64_t lo, std::int64_t hi) {
            for (std::int64_t i = lo; i < hi; ++i) {
                const CorridorRun run = corridor_sample(eps, use_gamma, k_tune, use_dt_fine, seed,
                                                        static_cast<std::uint64_t>(i));
                PerSample& r = rows[static_cast<std::size_t>(i)];
                r.log_w = run.log_weight;
                const IntervalUnion u = cover_intervals(run.fine_path, eps);
                const IntervalUnion u_half = cover_intervals(run.fine_path, eps / 2.0);
                const double xi = xi_measure(u);
                r.theta_hit = xi >= params.theta;
                r.cover_hit = covers_segment(u, 0.0);
                std::int64_t covered = 0, misses_lt_b = 0;
                for (std::int64_t j = 1; j <= b; ++j) {
                    const bool in = u_half.contains_point(static_cast<double>(j) * eps);
                    if (in) ++covered;
                    else if (j < b) ++misses_lt_b;
                }
                r.covered_frac = static_cast<double>(covered) / static_cast<double>(b);
                r.discrete_hit =
                    static_cast<double>(misses_lt_b) < (1.0 - params.theta) * static_cast<double>(b) - 1.0;
                if (i == 0) realized_n_balls = run.spec.n_balls_param;
            }
        },
        64);

    std::vector<double> lw(rows.size());
    std::vector<char> ht(rows.size()), hc(rows.size()), hd(rows.size());
    double cf = 0.0;
    double lw_max = -kInf;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        lw[i] = rows[i].log_w;
        ht[i] = rows[i].theta_hit;
        hc[i] = rows[i].cover_hit;
        hd[i] = rows[i].discrete_hit;
        cf += rows[i].covered_frac;
        lw_max = std::max(lw_max, rows[i].log_w);
    }

    IsLowerResult res;
    res.n_balls = realized_n_balls;
    res.gamma = use_gamma;
    res.mean_checkpoint_coverage = cf / static_cast<double>(n);
    const SeedRecord sr{seed, 0};

    auto fill = [&](const std::vector<char>& hits, Estimate& est, std::int64_t& n_succ) {
        const LogMean m = log_domain_mean(lw, hits);
        est.mean = m.log_mean;
        est.std_error = m.stderr_log;
        est.n = n;
        est.seed = sr;
        est.log_domain = true;
        n_succ = m.successes;
    };
    fill(ht, res.log_p_theta, res.n_theta_success);
    fill(hc, res.log_p_cover, res.n_cover_success);
    fill(hd, res.log_p_theta_discrete, res.n_discrete_success);
    res.zero_success_theta = res.n_theta_success == 0;
    res.zero_success_cover = res.n_cover_success == 0;
    res.log_upper_bound_theta = lw_max + std::log(3.0 / static_cast<double>(n));
    return res;
}

// --------------------------------------------------------- local time tail

LocalTimeProfile local_time_profile(const std::vector<double>& values, double dt,
                                    double bin_width) {
    if (values.size() < 2) throw std::invalid_argument("local_time_profile: need >= 2 values");
    if (!(dt > 0.0)) throw std::invalid_argument("local_time_profile: dt must be positive");
    if (!(bin_width >= std::sqrt(dt)))
        throw std::invalid_argument("local_time_profile: need bin_width >= sqrt(dt)");
    const std::size_t n_steps = values.size() - 1;
    double lo = values[0], hi = values[0];
    for (std::size_t k = 0; k < n_steps; ++k) {
        lo = std::min(lo, values[k]);
        hi = std::max(hi, values[k]);
    }
    const std::size_t nb = static_cast<std::size_t>(std::floor((hi - lo) / bin_width)) + 1;
    std::vector<std::int64_t> counts(nb, 0);
    for (std::size_t k = 0; k < n_steps; ++k) {
        std::size_t idx = static_cast<std::size_t>((values[k] - lo) / bin_width);
        if (idx >= nb) idx = nb - 1;
        ++counts[idx];
    }
    LocalTimeProfile prof;
    prof.bin_width = bin_width;
    prof.bin_centers.resize(nb);
    prof.density.resize(nb);
    for (std::size_t k = 0; k < nb; ++k) {
        prof.bin_centers[k] = lo + (static_cast<double>(k) + 0.5) * bin_width;
        prof.density[k] = static_cast<double>(counts[k]) * dt / bin_width;
        prof.sup_stat = std::max(prof.sup_stat, prof.density[k]);
    }
    return prof;
}

LocalTimeTailReport local_time_tail(std::int64_t n_paths, double dt, double bin_width,
                                    std::uint64_t seed, int workers) {
    if (n_paths < 1) throw std::invalid_argument("local_time_tail: n_paths must be >= 1");
    if (!(bin_width >= std::sqrt(dt)))
        throw std::invalid_argument("local_time_tail: need bin_width >= sqrt(dt)");
    const std::size_t n_steps = static_cast<std::size_t>(std::llround(1.0 / dt));
    const double use_dt = 1.0 / static_cast<double>(n_steps);
    const double duration = static_cast<double>(n_steps) * use_dt;

    std::vector<double> sup(static_cast<std::size_t>(n_paths));
    const double worst = chunked_reduce<double>(
        n_paths, workers, 0.0,
        [&](std::int64_t b, std::int64_t e) {
            double w = 0.0;
            std::vector<double> ys(n_steps + 1);
            for (std::int64_t i = b; i < e; ++i) {
                RngStream rng(seed, substream(static_cast<std::uint64_t>(i), 0));
                ys[0] = 0.0;
                const double sd = std::sqrt(use_dt);
                for (std::size_t k = 1; k <= n_steps; ++k) ys[k] = ys[k - 1] + sd * rng.normal();
                const LocalTimeProfile prof = local_time_profile(ys, use_dt, bin_width);
                sup[static_cast<std::size_t>(i)] = prof.sup_stat;
                double integral = 0.0;
                for (const double d : prof.density) integral += d * prof.bin_width;
                w = std::max(w, std::fabs(integral - duration));
            }
            return w;
        },
        [](double a, double b) { return std::max(a, b); }, 16);

    LocalTimeTailReport rep;
    rep.n = n_paths;
    rep.max_conservation_error = worst;
    double um = 0.0;
    for (const double u : sup) um += u;
    rep.u_mean = um / static_cast<double>(n_paths);

    std::vector<double> sorted = sup;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    if (sorted.size() - mid < 50 || sorted.size() < 100) {
        rep.inconclusive = true;
        return rep;
    }
    const double u_lo = sorted[mid];
    // highest grid point keeps >= 20 exceedances
    const double u_hi = sorted[sorted.size() - 20];
    if (!(u_hi > u_lo)) {
        rep.inconclusive = true;
        return rep;
    }
    const int n_grid = 25;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (int g = 0; g < n_grid; ++g) {
        const double u = u_lo + (u_hi - u_lo) * static_cast<double>(g) / (n_grid - 1);
        const auto it = std::lower_bound(sorted.begin(), sorted.end(), u);
        const double tail =
            static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
        const double x = u * u, y = std::log(tail);
        rep.tail_points.emplace_back(u, tail);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    const double m = n_grid;
    const double den = m * sxx - sx * sx;
    rep.slope = (m * sxy - sx * sy) / den;
    rep.intercept = (sy - rep.slope * sx) / m;
    const double ss_tot = syy - sy * sy / m;
    double ss_res = 0.0;
    for (const auto& [u, tail] : rep.tail_points) {
        const double pred = rep.intercept + rep.slope * u * u;
        const double r = std::log(tail) - pred;
        ss_res += r * r;
    }
    rep.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    return rep;
}

// -------------------------------------------------------- bridge small ball

namespace {

// Recursive bridge bisection: hit iff some refined grid point enters the
// delta-ball; segments provably far from the ball are pruned.
bool bridge_hits_ball(const Vec2& q1, const Vec2& q2, const Vec2& q3, double delta, double dt0,
                      double dt_min, RngStream& rng) {
    if (dist(q1, q3) <= delta || dist(q2, q3) <= delta) return true;
    struct Seg {
        Vec2 a, b;
        double dt;
    };
    // coarse pass, then depth-first refinement near the ball
    std::vector<Seg> stack;
    const std::size_t n0 = static_cast<std::size_t>(std::llround(1.0 / dt0));
    {
        Vec2 p = q1;
        std::vector<Vec2> coarse;
        coarse.reserve(n0 + 1);
        coarse.push_back(q1);
        for (std::size_t k = 1; k < n0; ++k) {
            const double m = static_cast<double>(n0 - k + 1);
            const Vec2 mean = p + (q2 - p) * (1.0 / m);
            const double sd = std::sqrt(dt0 * (m - 1.0) / m);
            p = mean + rng.normal_pair() * sd;
            if (dist(p, q3) <= delta) return true;
            coarse.push_back(p);
        }
        coarse.push_back(q2);
        for (std::size_t k = coarse.size() - 1; k >= 1; --k)
            stack.push_back({coarse[k - 1], coarse[k], dt0});
    }
    while (!stack.empty()) {
        const Seg s = stack.back();
        stack.pop_back();
        const double d = dist_point_segment(q3, s.a, s.b);
        const double margin = 3.0 * std::sqrt(s.dt * std::max(1.0, std::fabs(std::log(s.dt))));
        if (d > delta + margin) continue;
        if (s.dt <= dt_min) continue;  // resolved: endpoints already checked
        const Vec2 mid = (s.a + s.b) * 0.5 + rng.normal_pair() * std::sqrt(s.dt / 4.0);
        if (dist(mid, q3) <= delta) return true;
        const double half = s.dt / 2.0;
        stack.push_back({mid, s.b, half});
        stack.push_back({s.a, mid, half});
    }
    return false;
}

}  // namespace

BridgeHitReport bridge_hit_experiment(const std::vector<double>& delta_list, std::int64_t n,
                                      const BridgeGeometry& geometry, std::uint64_t seed,
                                      int workers) {
    if (delta_list.empty()) throw std::invalid_argument("bridge_hit_experiment: empty delta list");
    if (n < 1) throw std::invalid_argument("bridge_hit_experiment: n must be >= 1");
    for (const double d : delta_list)
        if (!(d > 0.0) || d >= 0.5)
            throw std::invalid_argument("bridge_hit_experiment: each delta must be in (0, 1/2)");
    const double d12 = dist(geometry.q1, geometry.q2);
    const double d13 = dist(geometry.q1, geometry.q3);
    const double d23 = dist(geometry.q2, geometry.q3);
    if (d12 > 3.0 || d13 > 3.0 || d23 > 3.0)
        throw std::invalid_argument("bridge_hit_experiment: pairwise distances must be <= 3");

    std::vector<double> deltas = delta_list;
    std::sort(deltas.begin(), deltas.end(), std::greater<double>());

    BridgeHitReport rep;
    rep.fitted_inv_k = kInf;
    for (std::size_t di = 0; di < deltas.size(); ++di) {
        const double delta = deltas[di];
        const double dt_min = delta * delta / 16.0;  // keeps delta = 4 sqrt(dt) at the floor
        const double dt0 = std::max(dt_min, 1.0 / 1024.0);
        const std::int64_t hits = chunked_reduce<std::int64_t>(
            n, workers, 0,
            [&](std::int64_t b, std::int64_t e) {
                std::int64_t h = 0;
                for (std::int64_t i = b; i < e; ++i) {
                    RngStream rng(seed, substream(static_cast<std::uint64_t>(i),
                                                  static_cast<std::uint64_t>(di)));
                    if (bridge_hits_ball(geometry.q1, geometry.q2, geometry.q3, delta, dt0, dt_min,
                                         rng))
                        ++h;
                }
                return h;
            },
            [](std::int64_t a, std::int64_t b) { return a + b; });
        BridgeHitRow row;
        row.delta = delta;
        row.p_hat = proportion_estimate(hits, n, {seed, di});
        row.p_log_delta = row.p_hat.mean * std::fabs(std::log(delta));
        rep.fitted_inv_k = std::min(rep.fitted_inv_k, row.p_log_delta);
        rep.rows.push_back(row);
    }
    for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i) {
        const auto& big = rep.rows[i].p_hat;
        const auto& small = rep.rows[i + 1].p_hat;
        const double sigma = std::hypot(big.std_error, small.std_error);
        if (small.mean > big.mean + 3.0 * sigma) rep.monotone = false;
    }
    return rep;
}

// ------------------------------------------------------- strip conditioning

StripCondReport strip_conditioning_check(const SausageParams& params, std::int64_t n, double dt,
                                         std::uint64_t seed, int workers) {
    validate_theta(params.theta);
    if (n < 1) throw std::invalid_argument("strip_conditioning_check: n must be >= 1");
    const double use_dt = dt > 0.0 ? dt : default_dt(params.epsilon);

    struct Counts {
        std::int64_t n11 = 0, n1 = 0, n2 = 0;
    };
    const Counts c = chunked_reduce<Counts>(
        n, workers, Counts{},
        [&](std::int64_t b, std::int64_t e) {
            Counts a;
            for (std::int64_t i = b; i < e; ++i) {
                RngStream rng(seed, substream(static_cast<std::uint64_t>(i), 0));
                const PathSample path = sample_path(use_dt, 1.0, rng);
                const bool g1 = !first_exit_index(path, 1.0).has_value();
                const double xi = xi_measure(cover_intervals(path, params.epsilon));
                const bool g2 = xi >= params.theta;
                if (g1) ++a.n1;
                if (g2) ++a.n2;
                if (g1 && g2) ++a.n11;
            }
            return a;
        },
        [](Counts x, Counts y) { return Counts{x.n11 + y.n11, x.n1 + y.n1, x.n2 + y.n2}; });

    StripCondReport rep;
    rep.n_g1 = c.n1;
    const SeedRecord sr{seed, 0};
    rep.p_g1 = proportion_estimate(c.n1, n, sr);
    rep.p_g2 = proportion_estimate(c.n2, n, sr);
    rep.inconclusive = c.n1 < 1000;
    if (c.n1 > 0) {
        rep.p_g2_given_g1 = proportion_estimate(c.n11, c.n1, sr);
        rep.difference = rep.p_g2_given_g1.mean - rep.p_g2.mean;
        // delta-method variance of q - p2 with q = n11/n1 from one multinomial sample
        const double nn = static_cast<double>(n);
        const double p1 = c.n1 / nn;
        const double q = static_cast<double>(c.n11) / static_cast<double>(c.n1);
        const double f11 = (1.0 - q) / p1 - 1.0;  // influence per (g1, g2) class
        const double f10 = -q / p1;
        const double f01 = -1.0;
        const double n10 = static_cast<double>(c.n1 - c.n11);
        const double n01 = static_cast<double>(c.n2 - c.n11);
        const double mean_f = (c.n11 * f11 + n10 * f10 + n01 * f01) / nn;
        const double var_f =
            (c.n11 * f11 * f11 + n10 * f10 * f10 + n01 * f01 * f01) / nn - mean_f * mean_f;
        rep.diff_stderr = std::sqrt(std::max(0.0, var_f) / nn);
    }
    return rep;
}

// ---------------------------------------------------------- martingale track

MartingaleTrack martingale_track(const PathSample& path, double epsilon, double alpha_spacing,
                                 const WosConfig& wos_cfg, std::uint64_t seed,
                                 std::uint64_t sample_base, int n_checkpoints, int workers) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("martingale_track: epsilon must be positive");
    if (!(alpha_spacing > 0.0) || alpha_spacing > epsilon)
        throw std::invalid_argument("martingale_track: alpha spacing must be in (0, epsilon]");
    if (path.points.size() < 2) throw std::invalid_argument("martingale_track: path too short");
    WosConfig cfg = wos_cfg;
    cfg.epsilon = epsilon;
    validate(cfg);

    const std::size_t na = static_cast<std::size_t>(std::ceil(1.0 / alpha_spacing));
    const double h = 1.0 / static_cast<double>(na);  // effective spacing <= requested

    MartingaleTrack track;
    track.tau_index = first_exit_index(path, 1.0);
    const std::size_t last = path.points.size() - 1;
    const std::size_t tau = track.tau_index.value_or(last + 1);

    for (int k = 0; k <= n_checkpoints; ++k) {
        const std::size_t idx = static_cast<std::size_t>(
            std::llround(static_cast<double>(k) * static_cast<double>(last) / n_checkpoints));
        MartingaleCheckpoint cp;
        cp.t = static_cast<double>(idx) * path.dt;
        cp.y = path.points[std::min(idx, last)].y;
        const std::size_t eff = std::min(idx, tau);
        const IntervalUnion a_t = cover_intervals(path, epsilon, std::min(eff, last));
        cp.covered = xi_measure(a_t);
        cp.active = idx < tau;
        cp.mhat = cp.covered;
        if (cp.active) {
            const Vec2 at = path.points[idx];
            std::int64_t truncated = 0;
            for (std::size_t a = 0; a <= na; ++a) {
                const double alpha = static_cast<double>(a) * h;
                if (a_t.contains_point(alpha)) continue;
                const double w = (a == 0 || a == na) ? 0.5 * h : h;
                const WosEstimate fe = wos_estimate(
                    at, alpha, cfg, seed,
                    sample_base + static_cast<std::uint64_t>(k) * (na + 1) + a, workers);
                cp.mhat += w * fe.estimate.mean;
                cp.noise_var += w * w * fe.estimate.std_error * fe.estimate.std_error;
                truncated += fe.truncated;
            }
            if (truncated > cfg.n_walks / 200) cp.skipped = true;
        }
        track.checkpoints.push_back(cp);
    }
    return track;
}

MartingaleReport martingale_experiment(std::int64_t n_paths, double epsilon, double alpha_spacing,
                                       const WosConfig& wos_cfg, double dt, std::uint64_t seed,
                                       int n_checkpoints, int workers) {
    if (n_paths < 1) throw std::invalid_argument("martingale_experiment: n_paths must be >= 1");
    const double use_dt = dt > 0.0 ? dt : default_dt(epsilon);
    const std::size_t na = static_cast<std::size_t>(std::ceil(1.0 / alpha_spacing));
    const std::uint64_t block =
        static_cast<std::uint64_t>(n_checkpoints + 1) * (na + 2) + 8;
    const double log_eps = std::fabs(std::log(epsilon));

    std::vector<MartingaleTrack> tracks(static_cast<std::size_t>(n_paths));
    for_each_chunk(
        n_paths, workers,
        [&](std::int64_t, std::int64_t lo, std::int64_t hi) {
            for (std::int64_t p = lo; p < hi; ++p) {
                RngStream rng(seed, substream(static_cast<std::uint64_t>(p), 0));
                const PathSample path = sample_path(use_dt, 1.0, rng);
                tracks[static_cast<std::size_t>(p)] = martingale_track(
                    path, epsilon, alpha_spacing, wos_cfg, seed,
                    static_cast<std::uint64_t>(n_paths) + static_cast<std::uint64_t>(p) * block,
                    n_checkpoints, 1);
            }
        },
        1);

    MartingaleReport rep;
    rep.n_paths = n_paths;
    std::vector<double> ratios;
    double inc_sum = 0.0, inc_sum2 = 0.0;
    std::int64_t n_inc = 0;
    double m0_sum = 0.0;
    for (const auto& track : tracks) {
        rep.skipped_checkpoints +=
            static_cast<std::int64_t>(std::count_if(track.checkpoints.begin(),
                                                    track.checkpoints.end(),
                                                    [](const auto& c) { return c.skipped; }));
        if (!track.checkpoints.empty()) m0_sum += track.checkpoints.front().mhat;
        for (std::size_t k = 0; k + 1 < track.checkpoints.size(); ++k) {
            const auto& a = track.checkpoints[k];
            const auto& b = track.checkpoints[k + 1];
            if (!a.active || a.skipped || b.skipped) continue;
            const double dm = b.mhat - a.mhat;
            inc_sum += dm;
            inc_sum2 += dm * dm;
            ++n_inc;
            const double dt_k = b.t - a.t;
            const double logy = std::fabs(std::log(std::fabs(a.y)));
            const double unit = std::pow((1.0 + logy) / log_eps, 2.0) * dt_k;
            ratios.push_back(unit > 0.0 && std::isfinite(unit) ? dm * dm / unit : 0.0);
        }
    }
    rep.n_increments = n_inc;
    if (n_inc > 1) {
        rep.mean_increment = inc_sum / static_cast<double>(n_inc);
        const double var =
            std::max(0.0, (inc_sum2 - inc_sum * inc_sum / n_inc) / (n_inc - 1.0));
        rep.mean_increment_stderr = std::sqrt(var / static_cast<double>(n_inc));
    }
    if (!ratios.empty()) {
        std::sort(ratios.begin(), ratios.end());
        const std::size_t q = static_cast<std::size_t>(
            std::ceil(0.99 * static_cast<double>(ratios.size()))) - 1;
        rep.fitted_c0 = ratios[std::min(q, ratios.size() - 1)];
        rep.fraction_below =
            static_cast<double>(std::upper_bound(ratios.begin(), ratios.end(), rep.fitted_c0) -
                                ratios.begin()) /
            static_cast<double>(ratios.size());
    }
    rep.m0_mean = m0_sum / static_cast<double>(n_paths);

    // reference bound: Mhat_0 integrates over [0,1] only, so it must sit below
    // the full-line integral g(0)
    WosConfig gcfg = wos_cfg;
    gcfg.epsilon = epsilon;
    const GEstimate g0 =
        g_of_y(0.0, epsilon, gcfg, AlphaGrid{0.25}, seed,
               static_cast<std::uint64_t>(n_paths) * (block + 1) + 1000, workers);
    rep.m0_bound = g0.estimate.mean;
    rep.m0_bound_stderr = g0.estimate.std_error;

    // Azuma-type overlay with the fitted constant, evaluated at u = 1/2
    const double big_l =
        rep.fitted_c0 * 2.0 * std::pow(std::log(std::fabs(2.0 * std::log(epsilon))), 2.0) /
        (log_eps * log_eps);
    if (big_l > 0.0)
        rep.azuma_tail_at_half = std::exp(-std::pow(0.5 - rep.m0_mean, 2.0) / (2.0 * big_l));
    return rep;
}

// -------------------------------------------------------------- discrete SRW

Estimate srw_cover(int n_sites, std::int64_t n_walks, double theta, std::uint64_t seed,
                   int workers) {
    if (n_sites < 2) throw std::invalid_argument("srw_cover: n_sites must be >= 2");
    if (n_walks < 1) throw std::invalid_argument("srw_cover: n_walks must be >= 1");
    validate_theta(theta);
    const int n_steps = n_sites * n_sites;
    const double need = theta * static_cast<double>(n_sites) - 1e-9;

    const std::int64_t hits = chunked_reduce<std::int64_t>(
        n_walks, workers, 0,
        [&](std::int64_t b, std::int64_t e) {
            std::int64_t h = 0;
            std::vector<char> seen(static_cast<std::size_t>(n_sites) + 1, 0);
            for (std::int64_t i = b; i < e; ++i) {
                RngStream rng(seed, substream(static_cast<std::uint64_t>(i), 0));
                std::fill(seen.begin(), seen.end(), 0);
                int x = 0, y = 0, found = 0;
                for (int s = 0; s < n_steps; ++s) {
                    switch (rng.next_u64() & 3u) {
                        case 0: ++x; break;
                        case 1: --x; break;
                        case 2: ++y; break;
                        default: --y; break;
                    }
                    if (y == 0 && x >= 1 && x <= n_sites && !seen[static_cast<std::size_t>(x)]) {
                        seen[static_cast<std::size_t>(x)] = 1;
                        ++found;
                    }
                }
                if (static_cast<double>(found) >= need) ++h;
            }
            return h;
        },
        [](std::int64_t a, std::int64_t b) { return a + b; });
    return proportion_estimate(hits, n_walks, {seed, 0});
}

}  // namespace sausagelab
