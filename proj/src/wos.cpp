#include "sausagelab/wos.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sausagelab/analytic.hpp"
#include "sausagelab/parallel.hpp"
#include "sausagelab/rng.hpp"

namespace sausagelab {

void validate(const WosConfig& cfg) {
    if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("WosConfig: epsilon must be positive");
    if (!(cfg.shell() < cfg.epsilon))
        throw std::invalid_argument("WosConfig: stop_shell must be below epsilon");
    if (!(cfg.x_cutoff >= 5.0)) throw std::invalid_argument("WosConfig: x_cutoff must be >= 5");
    if (cfg.max_steps < 1000) throw std::invalid_argument("WosConfig: max_steps must be >= 1000");
    if (cfg.n_walks < 1) throw std::invalid_argument("WosConfig: n_walks must be >= 1");
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// One walk in (strip |y| <= 1) minus (ball of radius eps at the origin).
// Returns 1 on ball absorption, 0 on strip/cutoff exit, -1 on truncation.
int single_walk(Vec2 p, const WosConfig& cfg, RngStream& rng) {
    const double shell = cfg.shell();
    for (int step = 0; step < cfg.max_steps; ++step) {
        const double d_ball = p.norm() - cfg.epsilon;
        if (d_ball <= shell) return 1;
        const double d_strip = 1.0 - std::fabs(p.y);
        if (d_strip <= shell) return 0;
        if (std::fabs(p.x) > cfg.x_cutoff) return 0;
        const double r = std::min(d_ball, d_strip);
        const double theta = kTwoPi * rng.uniform();
        p += Vec2{r * std::cos(theta), r * std::sin(theta)};
    }
    return -1;
}

struct WalkCounts {
    std::int64_t hits = 0;
    std::int64_t truncated = 0;
};

}  // namespace

WosEstimate wos_estimate(Vec2 start, double alpha, const WosConfig& cfg, std::uint64_t seed,
                         std::uint64_t sample, int workers) {
    validate(cfg);
    if (std::fabs(start.y) > 1.0)
        throw std::invalid_argument("wos_estimate: start must satisfy |y| <= 1");
    const Vec2 origin_start = start - Vec2{alpha, 0.0};  // ball moved to the origin

    const WalkCounts counts = chunked_reduce<WalkCounts>(
        cfg.n_walks, workers, WalkCounts{},
        [&](std::int64_t b, std::int64_t e) {
            WalkCounts acc;
            for (std::int64_t w = b; w < e; ++w) {
                RngStream rng(seed, substream(sample, 1 + static_cast<std::uint64_t>(w)));
                const int r = single_walk(origin_start, cfg, rng);
                if (r == 1) ++acc.hits;
                if (r == -1) ++acc.truncated;
            }
            return acc;
        },
        [](WalkCounts a, WalkCounts b) {
            return WalkCounts{a.hits + b.hits, a.truncated + b.truncated};
        });

    WosEstimate out;
    out.truncated = counts.truncated;
    const double p = static_cast<double>(counts.hits) / static_cast<double>(cfg.n_walks);
    out.estimate.mean = p;
    out.estimate.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(cfg.n_walks));
    out.estimate.n = cfg.n_walks;
    out.estimate.seed = {seed, substream(sample, 0)};
    return out;
}

double FdGrid::value_at(double x, double y) const {
    const double fx = (x + x_cutoff) / h;
    const double fy = (y + 1.0) / h;
    int i = static_cast<int>(std::floor(fx));
    int j = static_cast<int>(std::floor(fy));
    i = std::clamp(i, 0, nx - 1);
    j = std::clamp(j, 0, ny - 1);
    const double tx = fx - i, ty = fy - j;
    return node(i, j) * (1 - tx) * (1 - ty) + node(i + 1, j) * tx * (1 - ty) +
           node(i, j + 1) * (1 - tx) * ty + node(i + 1, j + 1) * tx * ty;
}

FdGrid fd_oracle(double epsilon, double h, double x_cutoff, double tol, int max_sweeps) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("fd_oracle: epsilon must be positive");
    if (!(h > 0.0) || h > epsilon / 4.0)
        throw std::invalid_argument("fd_oracle: need 0 < h <= epsilon/4");
    if (!(x_cutoff >= 5.0)) throw std::invalid_argument("fd_oracle: x_cutoff must be >= 5");

    FdGrid g;
    g.ny = static_cast<int>(std::lround(2.0 / h));
    g.h = 2.0 / g.ny;
    g.nx = static_cast<int>(std::ceil(2.0 * x_cutoff / g.h));
    if (g.nx % 2 != 0) ++g.nx;  // keep x = 0 on a node column
    g.x_cutoff = g.nx * g.h / 2.0;
    const int sx = g.nx + 1, sy = g.ny + 1;
    g.values.assign(static_cast<std::size_t>(sx) * sy, 0.0);

    // Node classification: 0 free, 1 fixed at 1 (in the disk), 2 fixed at 0.
    std::vector<unsigned char> kind(g.values.size(), 0);
    auto X = [&](int i) { return -g.x_cutoff + i * g.h; };
    auto Y = [&](int j) { return -1.0 + j * g.h; };
    const double eps2 = epsilon * epsilon;
    for (int j = 0; j < sy; ++j)
        for (int i = 0; i < sx; ++i) {
            const std::size_t idx = static_cast<std::size_t>(j) * sx + i;
            if (i == 0 || i == g.nx || j == 0 || j == g.ny) {
                kind[idx] = 2;
            } else if (X(i) * X(i) + Y(j) * Y(j) <= eps2) {
                kind[idx] = 1;
                g.values[idx] = 1.0;
            }
        }

    // Shortley-Weller arms for free nodes with a neighbor inside the disk:
    // fractional arm length theta in (0,1] to the circle along the grid line.
    struct Irregular {
        std::size_t idx;
        double aE, aW, aN, aS, diag;
        double bE, bW, bN, bS;  // boundary values fed through cut arms
        std::size_t e, w, n, s;
        bool cutE, cutW, cutN, cutS;
    };
    std::vector<Irregular> irregular;
    std::vector<unsigned char> is_irregular(g.values.size(), 0);

    auto arm = [&](double x, double y, double dx, double dy) {
        // smallest t in (0, h] with |(x,y) + t*(dx,dy)| = epsilon
        const double b = x * dx + y * dy;
        const double c = x * x + y * y - eps2;
        const double disc = b * b - c;
        if (disc < 0.0) return g.h;
        const double t = -b - std::sqrt(disc);
        return (t > 0.0 && t <= g.h) ? t : g.h;
    };

    for (int j = 1; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) {
            const std::size_t idx = static_cast<std::size_t>(j) * sx + i;
            if (kind[idx] != 0) continue;
            const bool e1 = kind[idx + 1] == 1, w1 = kind[idx - 1] == 1;
            const bool n1 = kind[idx + sx] == 1, s1 = kind[idx - sx] == 1;
            if (!(e1 || w1 || n1 || s1)) continue;
            Irregular ir{};
            ir.idx = idx;
            const double x = X(i), y = Y(j);
            const double tE = e1 ? arm(x, y, 1, 0) / g.h : 1.0;
            const double tW = w1 ? arm(x, y, -1, 0) / g.h : 1.0;
            const double tN = n1 ? arm(x, y, 0, 1) / g.h : 1.0;
            const double tS = s1 ? arm(x, y, 0, -1) / g.h : 1.0;
            ir.aE = 2.0 / (tE * (tE + tW));
            ir.aW = 2.0 / (tW * (tE + tW));
            ir.aN = 2.0 / (tN * (tN + tS));
            ir.aS = 2.0 / (tS * (tN + tS));
            ir.diag = 2.0 / (tE * tW) + 2.0 / (tN * tS);
            ir.cutE = e1;
            ir.cutW = w1;
            ir.cutN = n1;
            ir.cutS = s1;
            ir.e = idx + 1;
            ir.w = idx - 1;
            ir.n = idx + sx;
            ir.s = idx - sx;
            ir.bE = ir.bW = ir.bN = ir.bS = 1.0;  // disk boundary value
            irregular.push_back(ir);
            is_irregular[idx] = 1;
        }

    const double rho_j = (std::cos(M_PI * g.h / (2.0 * g.x_cutoff)) + std::cos(M_PI * g.h / 2.0)) / 2.0;
    const double omega = 2.0 / (1.0 + std::sqrt(1.0 - rho_j * rho_j));

    auto sweep_color = [&](int color) {
        for (int j = 1; j < g.ny; ++j) {
            const std::size_t row = static_cast<std::size_t>(j) * sx;
            const int start = 1 + ((j + color) & 1);
            for (int i = start; i < g.nx; i += 2) {
                const std::size_t idx = row + i;
                if (kind[idx] != 0 || is_irregular[idx]) continue;
                const double gs = 0.25 * (g.values[idx + 1] + g.values[idx - 1] +
                                          g.values[idx + sx] + g.values[idx - sx]);
                g.values[idx] += omega * (gs - g.values[idx]);
            }
        }
        for (const auto& ir : irregular) {
            const int i = static_cast<int>(ir.idx % sx), j = static_cast<int>(ir.idx / sx);
            if (((i + j) & 1) != color) continue;
            const double num = ir.aE * (ir.cutE ? ir.bE : g.values[ir.e]) +
                               ir.aW * (ir.cutW ? ir.bW : g.values[ir.w]) +
                               ir.aN * (ir.cutN ? ir.bN : g.values[ir.n]) +
                               ir.aS * (ir.cutS ? ir.bS : g.values[ir.s]);
            g.values[ir.idx] += omega * (num / ir.diag - g.values[ir.idx]);
        }
    };

    auto max_residual = [&]() {
        double r = 0.0;
        for (int j = 1; j < g.ny; ++j) {
            const std::size_t row = static_cast<std::size_t>(j) * sx;
            for (int i = 1; i < g.nx; ++i) {
                const std::size_t idx = row + i;
                if (kind[idx] != 0 || is_irregular[idx]) continue;
                const double gs = 0.25 * (g.values[idx + 1] + g.values[idx - 1] +
                                          g.values[idx + sx] + g.values[idx - sx]);
                r = std::max(r, std::fabs(gs - g.values[idx]));
            }
        }
        for (const auto& ir : irregular) {
            const double num = ir.aE * (ir.cutE ? ir.bE : g.values[ir.e]) +
                               ir.aW * (ir.cutW ? ir.bW : g.values[ir.w]) +
                               ir.aN * (ir.cutN ? ir.bN : g.values[ir.n]) +
                               ir.aS * (ir.cutS ? ir.bS : g.values[ir.s]);
            r = std::max(r, std::fabs(num / ir.diag - g.values[ir.idx]));
        }
        return r;
    };

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        sweep_color(0);
        sweep_color(1);
        if (sweep % 25 == 24 || sweep == max_sweeps - 1) {
            g.residual = max_residual();
            g.sweeps = sweep + 1;
            if (g.residual <= tol) {
                for (auto& v : g.values) v = std::clamp(v, 0.0, 1.0);
                return g;
            }
        }
    }
    throw NumericalError("fd_oracle: SOR did not converge", g.residual);
}

AnnulusSandwich annulus_sandwich(double r, double epsilon, double x_cutoff) {
    AnnulusSandwich s;
    const double r_out = std::sqrt(x_cutoff * x_cutoff + 1.0);
    s.upper = (r <= epsilon) ? 1.0 : annulus_hit_prob(std::min(r, r_out), epsilon, r_out);
    s.lower = (r < 1.0) ? (r <= epsilon ? 1.0 : annulus_hit_prob(r, epsilon, 1.0)) : 0.0;
    return s;
}

GEstimate g_of_y(double y, double epsilon, const WosConfig& cfg, const AlphaGrid& grid,
                 std::uint64_t seed, std::uint64_t sample_base, int workers) {
    if (!(std::fabs(y) < 1.0)) throw std::invalid_argument("g_of_y: need |y| < 1");
    if (!(grid.spacing > 0.0)) throw std::invalid_argument("g_of_y: spacing must be positive");
    WosConfig c = cfg;
    c.epsilon = epsilon;
    validate(c);
    const int K = static_cast<int>(std::floor(c.x_cutoff / grid.spacing));
    if (K < 1) throw std::invalid_argument("g_of_y: spacing too coarse for x_cutoff");

    GEstimate out;
    out.spacing = grid.spacing;
    double total = 0.0, var = 0.0;
    std::int64_t n_total = 0;
    // f((0,y), alpha) is symmetric in alpha, so integrate alpha >= 0 and double.
    for (int k = 0; k <= K; ++k) {
        const double alpha = k * grid.spacing;
        const WosEstimate fe =
            wos_estimate({0.0, y}, alpha, c, seed, sample_base + static_cast<std::uint64_t>(k), workers);
        double w = grid.spacing;        // trapezoid weight on [-A, A] after symmetry
        if (k > 0 && k < K) w *= 2.0;
        total += w * fe.estimate.mean;
        var += w * w * fe.estimate.std_error * fe.estimate.std_error;
        n_total += fe.estimate.n;
        out.truncated += fe.truncated;
    }
    out.estimate.mean = total;
    out.estimate.std_error = std::sqrt(var);
    out.estimate.n = n_total;
    out.estimate.seed = {seed, substream(sample_base, 0)};
    out.tail_bias_bound = 2.0 * std::exp(-K * grid.spacing) / std::fabs(std::log(epsilon));
    return out;
}

Eq9Report eq9_identity_check(double y, double epsilon, double dy, const WosConfig& cfg,
                             const AlphaGrid& grid, std::uint64_t seed, int workers) {
    if (!(y > 0.0 && y < 1.0)) throw std::invalid_argument("eq9_identity_check: need 0 < y < 1");
    if (!(dy > 0.0) || dy >= (1.0 - y) / 4.0)
        throw std::invalid_argument("eq9_identity_check: need 0 < dy < (1-y)/4");

    constexpr std::uint64_t kBlock = 1u << 20;  // sample-id room per g evaluation
    Eq9Report r;
    r.g_minus = g_of_y(y - dy, epsilon, cfg, grid, seed, 0 * kBlock, workers);
    r.g_center = g_of_y(y, epsilon, cfg, grid, seed, 1 * kBlock, workers);
    r.g_plus = g_of_y(y + dy, epsilon, cfg, grid, seed, 2 * kBlock, workers);

    r.lhs = (r.g_minus.estimate.mean - r.g_plus.estimate.mean) / (2.0 * dy);
    r.lhs_stderr = std::sqrt(r.g_minus.estimate.std_error * r.g_minus.estimate.std_error +
                             r.g_plus.estimate.std_error * r.g_plus.estimate.std_error) /
                   (2.0 * dy);
    r.rhs = r.g_center.estimate.mean / (1.0 - y);
    r.rhs_stderr = r.g_center.estimate.std_error / (1.0 - y);
    r.ratio = r.rhs != 0.0 ? r.lhs / r.rhs : 0.0;
    r.combined_stderr = std::sqrt(r.lhs_stderr * r.lhs_stderr + r.rhs_stderr * r.rhs_stderr);
    r.inconclusive = !(r.combined_stderr <= 0.25 * std::fabs(r.rhs)) || r.rhs == 0.0;
    return r;
}

Lemma4Report lemma4_shape_checks(const std::vector<double>& epsilon_list, const WosConfig& cfg,
                                 std::uint64_t seed, int workers) {
    Lemma4Report report;
    std::uint64_t sample = 0;
    for (const double eps : epsilon_list) {
        if (!(eps < 0.25))
            throw std::invalid_argument("lemma4_shape_checks: each epsilon must be < 1/4");
        WosConfig c = cfg;
        c.epsilon = eps;
        validate(c);
        Lemma4Epsilon pe;
        pe.epsilon = eps;
        const double log_eps = std::fabs(std::log(eps));

        for (int k = 1; k <= 9; ++k) {
            const double y = 0.1 * k;
            const WosEstimate fe = wos_estimate({0.0, y}, 0.0, c, seed, sample++, workers);
            ShapeRow row;
            row.coord = y;
            row.estimate = fe.estimate;
            row.shape = std::fabs(std::log(y)) / log_eps;
            row.ratio = fe.estimate.mean / row.shape;
            row.inconclusive = fe.estimate.std_error > 0.25 * std::max(fe.estimate.mean, 1e-12);
            pe.c5_fit = std::max(pe.c5_fit, row.ratio);
            pe.y_rows.push_back(row);
        }
        for (std::size_t i = 0; i + 1 < pe.y_rows.size(); ++i) {
            const auto& a = pe.y_rows[i].estimate;
            const auto& b = pe.y_rows[i + 1].estimate;
            const double sigma = std::hypot(a.std_error, b.std_error);
            if (b.mean > a.mean + 3.0 * sigma) pe.y_monotone = false;
        }

        for (int k = 1; k <= 8; ++k) {
            const double alpha = 0.5 * k;
            const WosEstimate fe = wos_estimate({alpha, 0.0}, 0.0, c, seed, sample++, workers);
            ShapeRow row;
            row.coord = alpha;
            row.estimate = fe.estimate;
            row.shape = std::exp(-alpha) * (1.0 + std::max(0.0, std::log(1.0 / alpha))) / log_eps;
            row.ratio = fe.estimate.mean / row.shape;
            row.inconclusive = fe.estimate.std_error > 0.25 * std::max(fe.estimate.mean, 1e-12);
            pe.c6_fit = std::max(pe.c6_fit, row.ratio);
            pe.alpha_rows.push_back(row);
        }
        for (std::size_t i = 0; i + 1 < pe.alpha_rows.size(); ++i) {
            const auto& a = pe.alpha_rows[i].estimate;
            const auto& b = pe.alpha_rows[i + 1].estimate;
            const double sigma = std::hypot(a.std_error, b.std_error);
            if (b.mean > a.mean + 3.0 * sigma) pe.alpha_monotone = false;
        }
        report.per_epsilon.push_back(std::move(pe));
    }
    return report;
}

}  // namespace sausagelab
