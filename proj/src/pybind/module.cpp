#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sausagelab/analytic.hpp"
#include "sausagelab/estimators.hpp"

namespace py = pybind11;
using namespace sausagelab;

namespace {

PathSample path_from_points(const std::vector<std::pair<double, double>>& pts, double dt) {
    PathSample p;
    p.dt = dt;
    p.points.reserve(pts.size());
    for (const auto& [x, y] : pts) p.points.push_back({x, y});
    return p;
}

std::vector<std::pair<double, double>> points_of(const PathSample& p) {
    std::vector<std::pair<double, double>> out;
    out.reserve(p.points.size());
    for (const auto& q : p.points) out.emplace_back(q.x, q.y);
    return out;
}

py::dict estimate_dict(const Estimate& e) {
    py::dict d;
    d["mean"] = e.mean;
    d["stderr"] = e.std_error;
    d["n"] = e.n;
    d["log_domain"] = e.log_domain;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Monte Carlo laboratory for planar Wiener-sausage segment coverage";

    // analytic
    m.def("annulus_hit_prob", &annulus_hit_prob, py::arg("z_radius"), py::arg("a"), py::arg("b"));
    m.def("exit_below_prob", &exit_below_prob, py::arg("y"), py::arg("lo"), py::arg("hi"));
    m.def("gaussian_disk_prob", &gaussian_disk_prob, py::arg("center_dist"), py::arg("sigma"),
          py::arg("radius"));
    m.def("corridor_centers", [](int n) {
        const CorridorSpec s = corridor_centers(n);
        py::dict d;
        d["n"] = s.n_balls_param;
        d["centers"] = s.center_abscissas;
        d["radius"] = s.radius;
        d["checkpoint_dt"] = s.checkpoint_dt;
        return d;
    });
    m.def(
        "theorem1_bounds",
        [](double eps, double theta, double c1, double c2, double c3, double c4) {
            const Theorem1Curves c = theorem1_bounds(eps, theta, {c1, c2, c3, c4});
            return py::make_tuple(c.upper, c.lower, c.upper_measure, c.lower_measure);
        },
        py::arg("epsilon"), py::arg("theta"), py::arg("c1") = 1.0, py::arg("c2") = 1.0,
        py::arg("c3") = 1.0, py::arg("c4") = 1.0);

    // paths
    m.def(
        "sample_path",
        [](double dt, double duration, std::uint64_t seed, std::uint64_t stream) {
            RngStream rng(seed, stream);
            return points_of(sample_path(dt, duration, rng));
        },
        py::arg("dt"), py::arg("duration"), py::arg("seed"), py::arg("stream") = 0);
    m.def(
        "sample_bridge",
        [](std::pair<double, double> q1, std::pair<double, double> q2, double duration, double dt,
           std::uint64_t seed, std::uint64_t stream) {
            RngStream rng(seed, stream);
            return points_of(
                sample_bridge({{q1.first, q1.second}, {q2.first, q2.second}, duration}, dt, rng));
        },
        py::arg("q1"), py::arg("q2"), py::arg("duration"), py::arg("dt"), py::arg("seed"),
        py::arg("stream") = 0);
    m.def(
        "sample_srw",
        [](int n_steps, std::uint64_t seed, std::uint64_t stream) {
            RngStream rng(seed, stream);
            return sample_srw(n_steps, rng);
        },
        py::arg("n_steps"), py::arg("seed"), py::arg("stream") = 0);

    // sausage geometry
    m.def(
        "cover_intervals",
        [](const std::vector<std::pair<double, double>>& pts, double epsilon) {
            return cover_intervals(path_from_points(pts, 1.0), epsilon).intervals();
        },
        py::arg("points"), py::arg("epsilon"));
    m.def(
        "xi_measure",
        [](const std::vector<std::pair<double, double>>& pts, double epsilon) {
            return xi_measure(cover_intervals(path_from_points(pts, 1.0), epsilon));
        },
        py::arg("points"), py::arg("epsilon"));
    m.def(
        "covers_segment",
        [](const std::vector<std::pair<double, double>>& pts, double epsilon, double slack) {
            return covers_segment(cover_intervals(path_from_points(pts, 1.0), epsilon), slack);
        },
        py::arg("points"), py::arg("epsilon"), py::arg("slack") = 0.0);

    // walk on spheres
    m.def(
        "wos_estimate",
        [](std::pair<double, double> start, double alpha, double epsilon, std::int64_t n_walks,
           std::uint64_t seed, int workers) {
            WosConfig cfg;
            cfg.epsilon = epsilon;
            cfg.n_walks = n_walks;
            const WosEstimate w =
                wos_estimate({start.first, start.second}, alpha, cfg, seed, 0, workers);
            py::dict d = estimate_dict(w.estimate);
            d["truncated"] = w.truncated;
            return d;
        },
        py::arg("start"), py::arg("alpha"), py::arg("epsilon"), py::arg("n_walks") = 10000,
        py::arg("seed") = 0, py::arg("workers") = 0);

    // estimators
    m.def(
        "naive_mc",
        [](double epsilon, double theta, std::int64_t n, double dt, std::uint64_t seed,
           int workers) {
            const NaiveResult r = naive_mc({epsilon, theta, 0.0}, n, dt, seed, workers);
            py::dict d;
            d["p_cover"] = estimate_dict(r.p_cover);
            d["p_theta"] = estimate_dict(r.p_theta);
            d["xi_mean"] = r.xi.mean;
            d["xi_sd"] = r.xi.sd;
            d["dt"] = r.dt;
            return d;
        },
        py::arg("epsilon"), py::arg("theta"), py::arg("n"), py::arg("dt") = 0.0,
        py::arg("seed") = 0, py::arg("workers") = 0);
    m.def(
        "is_lower_bound",
        [](double epsilon, double theta, std::int64_t n, double gamma, double k_tune,
           double dt_fine, std::uint64_t seed, int workers) {
            const IsLowerResult r =
                is_lower_bound({epsilon, theta, 0.0}, gamma, k_tune, n, dt_fine, seed, workers);
            py::dict d;
            d["log_p_theta"] = estimate_dict(r.log_p_theta);
            d["log_p_cover"] = estimate_dict(r.log_p_cover);
            d["n_balls"] = r.n_balls;
            d["gamma"] = r.gamma;
            d["theta_successes"] = r.n_theta_success;
            d["mean_checkpoint_coverage"] = r.mean_checkpoint_coverage;
            d["zero_success"] = r.zero_success_theta;
            return d;
        },
        py::arg("epsilon"), py::arg("theta"), py::arg("n"), py::arg("gamma") = 0.0,
        py::arg("k_tune") = 1.0, py::arg("dt_fine") = 0.0, py::arg("seed") = 0,
        py::arg("workers") = 0);
    m.def(
        "srw_cover",
        [](int n_sites, std::int64_t n_walks, double theta, std::uint64_t seed, int workers) {
            return estimate_dict(srw_cover(n_sites, n_walks, theta, seed, workers));
        },
        py::arg("n_sites"), py::arg("n_walks"), py::arg("theta"), py::arg("seed") = 0,
        py::arg("workers") = 0);
    m.def(
        "local_time_tail",
        [](std::int64_t n_paths, double dt, double bin_width, std::uint64_t seed, int workers) {
            const LocalTimeTailReport r = local_time_tail(n_paths, dt, bin_width, seed, workers);
            py::dict d;
            d["slope"] = r.slope;
            d["intercept"] = r.intercept;
            d["r_squared"] = r.r_squared;
            d["max_conservation_error"] = r.max_conservation_error;
            d["u_mean"] = r.u_mean;
            d["inconclusive"] = r.inconclusive;
            d["tail_points"] = r.tail_points;
            return d;
        },
        py::arg("n_paths"), py::arg("dt"), py::arg("bin_width"), py::arg("seed") = 0,
        py::arg("workers") = 0);
    m.def(
        "bridge_hit_experiment",
        [](const std::vector<double>& deltas, std::int64_t n, std::pair<double, double> q1,
           std::pair<double, double> q2, std::pair<double, double> q3, std::uint64_t seed,
           int workers) {
            const BridgeHitReport r = bridge_hit_experiment(
                deltas, n,
                {{q1.first, q1.second}, {q2.first, q2.second}, {q3.first, q3.second}}, seed,
                workers);
            py::list rows;
            for (const auto& row : r.rows) {
                py::dict rd = estimate_dict(row.p_hat);
                rd["delta"] = row.delta;
                rd["p_log_delta"] = row.p_log_delta;
                rows.append(rd);
            }
            py::dict d;
            d["rows"] = rows;
            d["fitted_inv_k"] = r.fitted_inv_k;
            d["monotone"] = r.monotone;
            return d;
        },
        py::arg("deltas"), py::arg("n"), py::arg("q1"), py::arg("q2"), py::arg("q3"),
        py::arg("seed") = 0, py::arg("workers") = 0);
    m.def(
        "strip_conditioning_check",
        [](double epsilon, double theta, std::int64_t n, double dt, std::uint64_t seed,
           int workers) {
            const StripCondReport r =
                strip_conditioning_check({epsilon, theta, 0.0}, n, dt, seed, workers);
            py::dict d;
            d["p_g2"] = r.p_g2.mean;
            d["p_g2_given_g1"] = r.p_g2_given_g1.mean;
            d["difference"] = r.difference;
            d["diff_stderr"] = r.diff_stderr;
            d["n_g1"] = r.n_g1;
            d["inconclusive"] = r.inconclusive;
            return d;
        },
        py::arg("epsilon"), py::arg("theta"), py::arg("n"), py::arg("dt") = 0.0,
        py::arg("seed") = 0, py::arg("workers") = 0);

    m.attr("__version__") = "0.1.0";
}
