#include "sausagelab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sausagelab/estimators.hpp"
#include "sausagelab/io.hpp"
#include "sausagelab/parallel.hpp"
#include "sausagelab/sha256.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sausagelab {

namespace {

constexpr const char* kVersion = "sausagelab 0.1.0";

// ------------------------------------------------------------- config text

bool parse_real(const std::string& tok, double& out) {
    char* end = nullptr;
    out = std::strtod(tok.c_str(), &end);
    return end && *end == '\0' && !tok.empty();
}

bool parse_int(const std::string& tok, std::int64_t& out) {
    char* end = nullptr;
    out = std::strtoll(tok.c_str(), &end, 10);
    return end && *end == '\0' && !tok.empty();
}

}  // namespace

std::string ExperimentConfig::echo() const {
    std::ostringstream os;
    os << "kind " << kind << '\n';
    for (const auto& [key, toks] : values) {
        // out and workers do not affect results, so they stay out of the
        // config identity
        if (key == "kind" || key == "out" || key == "workers") continue;
        os << key;
        for (const auto& t : toks) os << ' ' << t;
        os << '\n';
    }
    return os.str();
}

std::string ExperimentConfig::content_hash() const { return sha256_hex(echo()); }

double ExperimentConfig::get_real(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end() || it->second.size() != 1)
        throw ConfigError(key, "expected a single real value");
    double v;
    if (!parse_real(it->second[0], v)) throw ConfigError(key, "not a real number");
    return v;
}

double ExperimentConfig::get_real_or(const std::string& key, double fallback) const {
    return has(key) ? get_real(key) : fallback;
}

std::int64_t ExperimentConfig::get_int(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end() || it->second.size() != 1)
        throw ConfigError(key, "expected a single integer value");
    std::int64_t v;
    if (!parse_int(it->second[0], v)) throw ConfigError(key, "not an integer");
    return v;
}

std::int64_t ExperimentConfig::get_int_or(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::vector<double> ExperimentConfig::get_real_list(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end() || it->second.empty())
        throw ConfigError(key, "expected one or more real values");
    std::vector<double> out;
    for (const auto& t : it->second) {
        double v;
        if (!parse_real(t, v)) throw ConfigError(key, "not a real number: " + t);
        out.push_back(v);
    }
    return out;
}

std::string ExperimentConfig::get_string(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end() || it->second.size() != 1)
        throw ConfigError(key, "expected a single value");
    return it->second[0];
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        std::vector<std::string> toks;
        std::string tok;
        while (ls >> tok) toks.push_back(tok);
        if (toks.empty())
            throw ConfigError(key, "missing value on line " + std::to_string(line_no));
        if (cfg.values.count(key))
            throw ConfigError(key, "duplicate key on line " + std::to_string(line_no));
        if (key == "kind") {
            if (toks.size() != 1) throw ConfigError(key, "expected one value");
            cfg.kind = toks[0];
        }
        cfg.values[key] = std::move(toks);
    }
    if (cfg.kind.empty()) throw ConfigError("kind", "missing required key");
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

// ---------------------------------------------------------------- schemas

namespace {

struct KeySpec {
    const char* key;
    char type;  // r real, R real list, i integer, p point (two reals)
    bool required;
};

const std::map<std::string, std::vector<KeySpec>>& schemas() {
    static const std::map<std::string, std::vector<KeySpec>> s = {
        {"naive",
         {{"epsilon", 'R', true}, {"theta", 'R', true}, {"n", 'i', true}, {"dt", 'r', false}}},
        {"corridor",
         {{"epsilon", 'R', true},
          {"theta", 'R', true},
          {"n", 'i', true},
          {"gamma", 'r', false},
          {"k_tune", 'r', false},
          {"dt_fine", 'r', false}}},
        {"wos-check",
         {{"epsilon", 'r', true},
          {"n_walks", 'i', false},
          {"h", 'r', false},
          {"x_cutoff", 'r', false},
          {"stop_shell", 'r', false},
          {"max_steps", 'i', false}}},
        {"eq9",
         {{"epsilon", 'r', true},
          {"y", 'r', true},
          {"dy", 'r', true},
          {"n_walks", 'i', false},
          {"alpha_spacing", 'r', false},
          {"x_cutoff", 'r', false}}},
        {"lemma4",
         {{"epsilon", 'R', true},
          {"n_walks", 'i', false},
          {"x_cutoff", 'r', false}}},
        {"local-time",
         {{"n", 'i', true}, {"dt", 'r', true}, {"bin_width", 'r', true}}},
        {"bridge",
         {{"delta", 'R', true},
          {"n", 'i', true},
          {"q1", 'p', true},
          {"q2", 'p', true},
          {"q3", 'p', true},
          {"dt_floor", 'r', false}}},
        {"strip-cond",
         {{"epsilon", 'r', true}, {"theta", 'r', true}, {"n", 'i', true}, {"dt", 'r', false}}},
        {"martingale",
         {{"epsilon", 'r', true},
          {"n", 'i', true},
          {"n_walks", 'i', false},
          {"alpha_spacing", 'r', false},
          {"checkpoints", 'i', false},
          {"dt", 'r', false}}},
        {"srw", {{"n_sites", 'i', true}, {"n", 'i', true}, {"theta", 'r', true}}},
        {"bounds-report",
         {{"epsilon", 'R', true},
          {"theta", 'R', false},
          {"c1", 'r', false},
          {"c2", 'r', false},
          {"c3", 'r', false},
          {"c4", 'r', false}}},
    };
    return s;
}

}  // namespace

void validate_config(const ExperimentConfig& cfg) {
    const auto schema_it = schemas().find(cfg.kind);
    if (schema_it == schemas().end())
        throw ConfigError("kind", "unknown experiment kind: " + cfg.kind);
    const auto& schema = schema_it->second;

    // strict unknown-key rejection
    for (const auto& [key, toks] : cfg.values) {
        if (key == "kind" || key == "seed" || key == "workers" || key == "out") continue;
        const bool known = std::any_of(schema.begin(), schema.end(),
                                       [&](const KeySpec& k) { return key == k.key; });
        if (!known) throw ConfigError(key, "unknown key for kind " + cfg.kind);
    }
    for (const auto& spec : schema) {
        if (!cfg.has(spec.key)) {
            if (spec.required) throw ConfigError(spec.key, "missing required key");
            continue;
        }
        switch (spec.type) {
            case 'r': cfg.get_real(spec.key); break;
            case 'R': cfg.get_real_list(spec.key); break;
            case 'i': cfg.get_int(spec.key); break;
            case 'p': {
                const auto& toks = cfg.values.at(spec.key);
                double v;
                if (toks.size() != 2 || !parse_real(toks[0], v) || !parse_real(toks[1], v))
                    throw ConfigError(spec.key, "expected two reals (a point)");
                break;
            }
            default: break;
        }
    }
    if (!cfg.has("out")) throw ConfigError("out", "missing required key");
    if (cfg.has("seed")) cfg.get_int("seed");
    if (cfg.has("workers")) cfg.get_int("workers");
}

// -------------------------------------------------------------- run helpers

namespace {

int cli_workers(const ExperimentConfig& cfg) {
    if (const char* env = std::getenv("SAUSAGELAB_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    return static_cast<int>(cfg.get_int_or("workers", 0));
}

Vec2 get_point(const ExperimentConfig& cfg, const std::string& key) {
    const auto& toks = cfg.values.at(key);
    double x, y;
    parse_real(toks[0], x);
    parse_real(toks[1], y);
    return {x, y};
}

std::string now_iso_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.parent_path() / (".tmp-" + path.filename().string());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

struct Csv {
    std::string header;
    std::vector<std::string> rows;

    std::string text() const {
        std::string out = header + "\n";
        for (const auto& r : rows) out += r + "\n";
        return out;
    }
};

std::string g17(double v) { return format_g17(v); }

struct RunOutput {
    Csv csv;
    json summary;
    std::vector<std::string> failures;
    bool inconclusive_only = false;
};

// --------------------------------------------------------- kind: naive

RunOutput run_naive(const ExperimentConfig& cfg, std::uint64_t seed, int workers) {
    RunOutput out;
    out.csv.header =
        "epsilon,theta,n,dt,p_cover,p_cover_stderr,p_theta,p_theta_stderr,"
        "log_p_theta,log_p_theta_stderr,log_p_cover,log_p_cover_stderr,xi_mean,xi_sd,xi_min,xi_max";
    const auto eps_list = cfg.get_real_list("epsilon");
    const auto theta_list = cfg.get_real_list("theta");
    const std::int64_t n = cfg.get_int("n");
    const double dt = cfg.get_real_or("dt", 0.0);
    json results = json::array();
    for (const double eps : eps_list) {
        for (const double theta : theta_list) {
            try {
                const NaiveResult r = naive_mc({eps, theta, 0.0}, n, dt, seed, workers);
                const double lp = std::log(r.p_theta.mean);
                const double lp_se = r.p_theta.mean > 0
                                         ? r.p_theta.std_error / r.p_theta.mean
                                         : std::numeric_limits<double>::infinity();
                const double lc = std::log(r.p_cover.mean);
                const double lc_se = r.p_cover.mean > 0
                                         ? r.p_cover.std_error / r.p_cover.mean
                                         : std::numeric_limits<double>::infinity();
                out.csv.rows.push_back(
                    g17(eps) + "," + g17(theta) + "," + std::to_string(n) + "," + g17(r.dt) + "," +
                    g17(r.p_cover.mean) + "," + g17(r.p_cover.std_error) + "," +
                    g17(r.p_theta.mean) + "," + g17(r.p_theta.std_error) + "," + g17(lp) + "," +
                    g17(lp_se) + "," + g17(lc) + "," + g17(lc_se) + "," + g17(r.xi.mean) + "," +
                    g17(r.xi.sd) + "," + g17(r.xi.min) + "," + g17(r.xi.max));
                results.push_back({{"epsilon", eps},
                                   {"theta", theta},
                                   {"p_cover", r.p_cover.mean},
                                   {"p_cover_stderr", r.p_cover.std_error},
                                   {"p_theta", r.p_theta.mean},
                                   {"p_theta_stderr", r.p_theta.std_error},
                                   {"xi_mean", r.xi.mean},
                                   {"xi_sd", r.xi.sd},
                                   {"xi_hist", r.xi.hist},
                                   {"n", n}});
            } catch (const std::exception& e) {
                out.failures.push_back("epsilon=" + g17(eps) + " theta=" + g17(theta) + ": " +
                                       e.what());
            }
        }
    }
    out.summary["results"] = results;
    return out;
}

// --------------------------------------------------------- kind: corridor

RunOutput run_corridor(const ExperimentConfig& cfg, std::uint64_t seed, int workers) {
    RunOutput out;
    out.csv.header =
        "epsilon,theta,n,n_balls,gamma,k_tune,dt_fine,log_p_theta,log_p_theta_stderr,"
        "theta_successes,log_p_cover,log_p_cover_stderr,cover_successes,log_p_discrete,"
        "discrete_successes,mean_checkpoint_coverage,log_upper_bound_theta";
    const auto eps_list = cfg.get_real_list("epsilon");
    const auto theta_list = cfg.get_real_list("theta");
    const std::int64_t n = cfg.get_int("n");
    const double gamma = cfg.get_real_or("gamma", 0.0);
    const double k_tune = cfg.get_real_or("k_tune", 1.0);
    json results = json::array();
    for (const double eps : eps_list) {
        for (const double theta : theta_list) {
            try {
                const double dt_fine = cfg.get_real_or("dt_fine", (eps / 8.0) * (eps / 8.0));
                const IsLowerResult r =
                    is_lower_bound({eps, theta, 0.0}, gamma, k_tune, n, dt_fine, seed, workers);
                out.csv.rows.push_back(
                    g17(eps) + "," + g17(theta) + "," + std::to_string(n) + "," +
                    std::to_string(r.n_balls) + "," + g17(r.gamma) + "," + g17(k_tune) + "," +
                    g17(dt_fine) + "," + g17(r.log_p_theta.mean) + "," +
                    g17(r.log_p_theta.std_error) + "," + std::to_string(r.n_theta_success) + "," +
                    g17(r.log_p_cover.mean) + "," + g17(r.log_p_cover.std_error) + "," +
                    std::to_string(r.n_cover_success) + "," + g17(r.log_p_theta_discrete.mean) +
                    "," + std::to_string(r.n_discrete_success) + "," +
                    g17(r.mean_checkpoint_coverage) + "," + g17(r.log_upper_bound_theta));
                results.push_back({{"epsilon", eps},
                                   {"theta", theta},
                                   {"n_balls", r.n_balls},
                                   {"gamma", r.gamma},
                                   {"log_p_theta", r.log_p_theta.mean},
                                   {"log_p_theta_stderr", r.log_p_theta.std_error},
                                   {"theta_successes", r.n_theta_success},
                                   {"mean_checkpoint_coverage", r.mean_checkpoint_coverage},
                                   {"zero_success", r.zero_success_theta}});
            } catch (const std::exception& e) {
                out.failures.push_back("epsilon=" + g17(eps) + " theta=" + g17(theta) + ": " +
                                       e.what());
            }
        }
    }
    out.summary["results"] = results;
    return out;
}

// --------------------------------------------------------- kind: wos-check

RunOutput run_wos_check(const ExperimentConfig& cfg, std::uint64_t seed, int workers) {
    RunOutput out;
    out.csv.header = "x,y,r,wos,wos_stderr,fd,sandwich_lo,sandwich_hi,truncated,flag";
    const double eps = cfg.get_real("epsilon");
    if (!(eps > 0.0) || eps >= 0.1)
        throw ConfigError("epsilon", "wos-check grid requires 0 < epsilon < 0.1");
    WosConfig wcfg;
    wcfg.epsilon = eps;
    wcfg.n_walks = cfg.get_int_or("n_walks", 100000);
    wcfg.x_cutoff = cfg.get_real_or("x_cutoff", 12.0);
    wcfg.stop_shell = cfg.get_real_or("stop_shell", 0.0);
    wcfg.max_steps = static_cast<int>(cfg.get_int_or("max_steps", 100000));
    const double h = cfg.get_real_or("h", eps / 8.0);

    const FdGrid grid = fd_oracle(eps, h, wcfg.x_cutoff);
    double max_sigma = 0.0;
    bool all_sandwich = true;
    std::uint64_t sample = 0;
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            const double x = 0.125 * i;
            const double y = 0.125 * (j + 1);
            const Vec2 start{x, y};
            const WosEstimate w = wos_estimate(start, 0.0, wcfg, seed, sample++, workers);
            const double fd = grid.value_at(x, y);
            const AnnulusSandwich sw = annulus_sandwich(start.norm(), eps, wcfg.x_cutoff);
            const double se = std::max(w.estimate.std_error, 1e-12);
            const double sigma_gap = std::fabs(w.estimate.mean - fd) / se;
            max_sigma = std::max(max_sigma, sigma_gap);
            const double tol = 3.0 * se;
            const bool sandwich_ok = w.estimate.mean >= sw.lower - tol &&
                                     w.estimate.mean <= sw.upper + tol && fd >= sw.lower - 1e-6 &&
                                     fd <= sw.upper + 1e-6;
            all_sandwich = all_sandwich && sandwich_ok;
            out.csv.rows.push_back(g17(x) + "," + g17(y) + "," + g17(start.norm()) + "," +
                                   g17(w.estimate.mean) + "," + g17(w.estimate.std_error) + "," +
                                   g17(fd) + "," + g17(sw.lower) + "," + g17(sw.upper) + "," +
                                   std::to_string(w.truncated) + "," +
                                   (sandwich_ok ? "ok" : "outside-sandwich"));
        }
    }
    out.summary["max_sigma_discrepancy"] = max_sigma;
    out.summary["fd_residual"] = grid.residual;
    out.summary["fd_sweeps"] = grid.sweeps;
    out.summary["all_inside_sandwich"] = all_sandwich;
    return out;
}

// --------------------------------------------------------------- kind: eq9

RunOutput run_eq9(const ExperimentConfig& cfg, std::uint64_t seed, int workers) {
    RunOutput out;
    out.csv.header = "y,estimate,stderr,oracle,flag";
    const double eps = cfg.get_real("epsilon");
    const double y = cfg.get_real("y");
    const double dy = cfg.get_real("dy");
    WosConfig wcfg;
    wcfg.epsilon = eps;
    wcfg.n_walks = cfg.get_int_or("n_walks", 100000);
    wcfg.x_cutoff = cfg.get_real_or("x_cutoff", 12.0);
    const AlphaGrid grid{cfg.get_real_or("alpha_spacing", 0.25)};
    const Eq9Report r = eq9_identity_check(y, eps, dy, wcfg, grid, seed, workers);

    const auto row = [&](double yy, const GEstimate& g) {
        // oracle: the linear-in-(1-y) profile implied by the identity, anchored
        // at the center estimate
        const double oracle = r.g_center.estimate.mean * (1.0 - yy) / (1.0 - y);
        out.csv.rows.push_back(g17(yy) + "," + g17(g.estimate.mean) + "," +
                               g17(g.estimate.std_error) + "," + g17(oracle) + "," +
                               (r.inconclusive ? "inconclusive" : "ok"));
    };
    row(y - dy, r.g_minus);
    row(y, r.g_center);
    row(y + dy, r.g_plus);
    out.summary = {{"lhs", r.lhs},
                   {"lhs_stderr", r.lhs_stderr},
                   {"rhs", r.rhs},
                   {"rhs_stderr", r.rhs_stderr},
                   {"ratio", r.ratio},
                   {"combined_stderr", r.combined_stderr},
                   {"inconclusive", r.inconclusive},
                   {"tail_bias_bound", r.g_center.tail_bias_bound}};
    out.inconclusive_only = r.inconclusive;
    return out;
}

// ------------------------------------------------------------ kind: lemma4

RunOutput run_lemma4(const ExperimentConfig& cfg, std::uint64_t seed, int workers) {
    RunOutput out;
    out.csv.header = "epsilon,profile,coord,estimate,stderr,oracle,ratio,flag";
    WosConfig wcfg;
    wcfg.n_walks = cfg.get_int_or("n_walks", 100000);
    wcfg.x_cutoff = cfg.get_real_or("x_cutoff", 12.0);
    const auto eps_list = cfg.get_real_list("epsilon");
    const Lemma4Report rep = lemma4_shape_checks(eps_list, wcfg, seed, workers);
    json per_eps = json::array();
    bool all_inconclusive = true;
    for (const auto& pe : rep.per_epsilon) {
        for (const auto& r : pe.y_rows) {
            out.csv.rows.push_back(g17(pe.epsilon) + ",y," + g17(r.coord) + "," +
                                   g17(r.estimate.mean) + "," + g17(r.estimate.std_error) + "," +
                                   g17(r.shape) + "," + g17(r.ratio) + "," +
                                   (r.inconclusive ? "inconclusive" : "ok"));
            all_inconclusive = all_inconclusive && r.inconclusive;
        }
        for (const auto& r : pe.alpha_rows) {
            out.csv.rows.push_back(g17(pe.epsilon) + ",alpha," + g17(r.coord) + "," +
                                   g17(r.estimate.mean) + "," + g17(r.estimate.std_error) + "," +
                                   g17(r.shape) + "," + g17(r.ratio) + "," +
                                   (r.inconclusive ? "inconclusive" : "ok"));
            all_inconclusive = all_inconclusive && r.inconclusive;
        }
        per_eps.push_back({{"epsilon", pe.epsilon},
                           {"c5_fit", pe.c5_fit},
                           {"c6_fit", pe.c6_fit},
                           {"y_monotone", pe.y_monotone},
                           {"alpha_monotone", pe.alpha_monotone}});
    }
    double c5_min = std::numeric_limits<double>::infinity(), c5_max = 0.0;
    for (const auto& pe : rep.per_epsilon) {
        c5_min = std::min(c5_min, pe.c5_fit);
        c5_max = std::max(c5_max, pe.c5_fit);
    }
    out.summary["per_epsilon"] = per_eps;
    out.summary["c5_spread"] = c5_min > 0.0 ? c5_max / c5_min : 0.0;
    out.inconclusive_only = all_inconclusive;
    return out;
}

// -------------------------------------------------------- kind: local-time

RunOutput run_local_time(const ExperimentConfig& cfg, std::uint64_t seed, int workers) {
    RunOutput out;
    out.csv.header = "u,tail_prob";
    const LocalTimeTailReport rep = local_time_tail(
        cfg.get_int("n"), cfg.get_real("dt"), cfg.get_real("bin_width"), seed, workers);
    for (const auto& [u, p] : rep.tail_points)
        out.csv.rows.push_back(g17(u) + "," + g17(p));
    out.summary = {{"slope", rep.slope},
                   {"intercept", rep.intercept},
                   {"r_squared", rep.r_squared},
                   {"max_conservation_error", rep.max_conservation_error},
                   {"u_mean", rep.u_mean},
                   {"n", rep.n},
                   {"inconclusive", rep.inconclusive}};
    out.inconclusive_only = rep.inconclusive;
    return out;
}

// ------------------------------------------------------------ kind: bridge

RunOutput run_bridge(const ExperimentConfig& cfg, std::uint64_t seed, int workers) {
    RunOutput out;
    out.csv.header = "delta,p_hat,stderr,p_log_delta";
    const auto deltas = cfg.get_real_list("delta");
    const double dt_floor = cfg.get_real_or("dt_floor", 0.0);
    if (dt_floor > 0.0)
        for (const double d : deltas)
            if (d < 4.0 * std::sqrt(dt_floor))
                throw ConfigError("delta", "discretization-dominated: delta " + g17(d) +
                                               " < 4 sqrt(dt_floor)");
    const BridgeGeometry geom{get_point(cfg, "q1"), get_point(cfg, "q2"), get_point(cfg, "q3")};
    const BridgeHitReport rep = bridge_hit_experiment(deltas, cfg.get_int("n"), geom, seed, workers);
    for (const auto& r : rep.rows)
        out.csv.rows.push_back(g17(r.delta) + "," + g17(r.p_hat.mean) + "," +
                               g17(r.p_hat.std_error) + "," + g17(r.p_log_delta));
    out.summary = {{"fitted_inv_k", rep.fitted_inv_k}, {"monotone", rep.monotone}};
    return out;
}

// -------------------------------------------------------- kind: strip-cond

RunOutput run_strip_cond(const ExperimentConfig& cfg, std::uint64_t seed, int workers) {
    RunOutput out;
    out.csv.header =
        "epsilon,theta,n,p_g2,p_g2_stderr,p_g2_given_g1,p_g2_given_g1_stderr,p_g1,"
        "difference,diff_stderr,n_g1,flag";
    const double eps = cfg.get_real("epsilon");
    const double theta = cfg.get_real("theta");
    const std::int64_t n = cfg.get_int("n");
    const StripCondReport r =
        strip_conditioning_check({eps, theta, 0.0}, n, cfg.get_real_or("dt", 0.0), seed, workers);
    out.csv.rows.push_back(g17(eps) + "," + g17(theta) + "," + std::to_string(n) + "," +
                           g17(r.p_g2.mean) + "," + g17(r.p_g2.std_error) + "," +
                           g17(r.p_g2_given_g1.mean) + "," + g17(r.p_g2_given_g1.std_error) + "," +
                           g17(r.p_g1.mean) + "," + g17(r.difference) + "," + g17(r.diff_stderr) +
                           "," + std::to_string(r.n_g1) + "," +
                           (r.inconclusive ? "inconclusive" : "ok"));
    out.summary = {{"difference", r.difference},
                   {"diff_stderr", r.diff_stderr},
                   {"p_g2", r.p_g2.mean},
                   {"p_g2_given_g1", r.p_g2_given_g1.mean},
                   {"n_g1", r.n_g1},
                   {"inconclusive", r.inconclusive}};
    out.inconclusive_only = r.inconclusive;
    return out;
}

// -------------------------------------------------------- kind: martingale

RunOutput run_martingale(const ExperimentConfig& cfg, std::uint64_t seed, int workers) {
    RunOutput out;
    out.csv.header =
        "epsilon,n_paths,n_increments,mean_increment,mean_increment_stderr,fitted_c0,"
        "fraction_below,m0_mean,m0_bound,skipped_checkpoints,azuma_tail_at_half";
    const double eps = cfg.get_real("epsilon");
    WosConfig wcfg;
    wcfg.epsilon = eps;
    wcfg.n_walks = cfg.get_int_or("n_walks", 2000);
    const double spacing = cfg.get_real_or("alpha_spacing", eps);
    const MartingaleReport r = martingale_experiment(
        cfg.get_int("n"), eps, spacing, wcfg, cfg.get_real_or("dt", 0.0), seed,
        static_cast<int>(cfg.get_int_or("checkpoints", 50)), workers);
    out.csv.rows.push_back(g17(eps) + "," + std::to_string(r.n_paths) + "," +
                           std::to_string(r.n_increments) + "," + g17(r.mean_increment) + "," +
                           g17(r.mean_increment_stderr) + "," + g17(r.fitted_c0) + "," +
                           g17(r.fraction_below) + "," + g17(r.m0_mean) + "," + g17(r.m0_bound) +
                           "," + std::to_string(r.skipped_checkpoints) + "," +
                           g17(r.azuma_tail_at_half));
    out.summary = {{"mean_increment", r.mean_increment},
                   {"mean_increment_stderr", r.mean_increment_stderr},
                   {"n_increments", r.n_increments},
                   {"fitted_c0", r.fitted_c0},
                   {"fraction_below", r.fraction_below},
                   {"m0_mean", r.m0_mean},
                   {"m0_bound", r.m0_bound},
                   {"m0_bound_stderr", r.m0_bound_stderr},
                   {"skipped_checkpoints", r.skipped_checkpoints},
                   {"azuma_tail_at_half", r.azuma_tail_at_half}};
    return out;
}

// --------------------------------------------------------------- kind: srw

RunOutput run_srw(const ExperimentConfig& cfg, std::uint64_t seed, int workers) {
    RunOutput out;
    out.csv.header = "n_sites,n,theta,estimate,stderr";
    const int n_sites = static_cast<int>(cfg.get_int("n_sites"));
    const std::int64_t n = cfg.get_int("n");
    const double theta = cfg.get_real("theta");
    const Estimate e = srw_cover(n_sites, n, theta, seed, workers);
    out.csv.rows.push_back(std::to_string(n_sites) + "," + std::to_string(n) + "," + g17(theta) +
                           "," + g17(e.mean) + "," + g17(e.std_error));
    out.summary = {{"estimate", e.mean}, {"stderr", e.std_error}, {"n", n}};
    return out;
}

// ------------------------------------------------------ kind: bounds-report

RunOutput run_bounds_report(const ExperimentConfig& cfg, std::uint64_t, int) {
    RunOutput out;
    out.csv.header = "epsilon,theta,upper,lower,upper_measure,lower_measure,flag";
    BoundParams params;
    params.c1 = cfg.get_real_or("c1", 1.0);
    params.c2 = cfg.get_real_or("c2", 1.0);
    params.c3 = cfg.get_real_or("c3", 1.0);
    params.c4 = cfg.get_real_or("c4", 1.0);
    const auto eps_list = cfg.get_real_list("epsilon");
    const auto theta_list =
        cfg.has("theta") ? cfg.get_real_list("theta") : std::vector<double>{0.5};
    json flagged = json::array();
    for (const double eps : eps_list) {
        for (const double theta : theta_list) {
            const Theorem1Curves c = theorem1_bounds(eps, theta, params);
            // the constants are unconstrained relative to each other; a crossed
            // pair is flagged, not fatal
            const bool crossed = c.upper < c.lower || c.upper_measure < c.lower_measure;
            if (crossed) flagged.push_back({{"epsilon", eps}, {"theta", theta}});
            out.csv.rows.push_back(g17(eps) + "," + g17(theta) + "," + g17(c.upper) + "," +
                                   g17(c.lower) + "," + g17(c.upper_measure) + "," +
                                   g17(c.lower_measure) + "," + (crossed ? "crossed" : "ok"));
        }
    }
    out.summary = {{"c1", params.c1}, {"c2", params.c2}, {"c3", params.c3},
                   {"c4", params.c4}, {"flagged", flagged}};
    return out;
}

}  // namespace

// --------------------------------------------------------------------- run

ResultManifest run(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int_or("seed", 0));
    const int workers = cli_workers(cfg);
    const std::string out_dir = cfg.get_string("out");

    ResultManifest manifest;
    manifest.kind = cfg.kind;
    manifest.out_dir = out_dir;
    manifest.config_echo = cfg.echo();
    manifest.config_sha256 = cfg.content_hash();
    manifest.version = kVersion;
    manifest.started_utc = now_iso_utc();

    RunOutput result;
    if (cfg.kind == "naive") result = run_naive(cfg, seed, workers);
    else if (cfg.kind == "corridor") result = run_corridor(cfg, seed, workers);
    else if (cfg.kind == "wos-check") result = run_wos_check(cfg, seed, workers);
    else if (cfg.kind == "eq9") result = run_eq9(cfg, seed, workers);
    else if (cfg.kind == "lemma4") result = run_lemma4(cfg, seed, workers);
    else if (cfg.kind == "local-time") result = run_local_time(cfg, seed, workers);
    else if (cfg.kind == "bridge") result = run_bridge(cfg, seed, workers);
    else if (cfg.kind == "strip-cond") result = run_strip_cond(cfg, seed, workers);
    else if (cfg.kind == "martingale") result = run_martingale(cfg, seed, workers);
    else if (cfg.kind == "srw") result = run_srw(cfg, seed, workers);
    else if (cfg.kind == "bounds-report") result = run_bounds_report(cfg, seed, workers);
    else throw ConfigError("kind", "unknown experiment kind: " + cfg.kind);

    if (result.csv.rows.empty() && !result.failures.empty())
        throw NumericalError("all configurations failed: " + result.failures.front(), 0.0);

    fs::create_directories(out_dir);
    result.summary["kind"] = cfg.kind;
    result.summary["seed"] = seed;
    result.summary["config"] = manifest.config_echo;
    result.summary["config_sha256"] = manifest.config_sha256;
    result.summary["inconclusive_only"] = result.inconclusive_only;

    const std::string csv_text = result.csv.text();
    const std::string summary_text = result.summary.dump(2) + "\n";
    write_atomic(fs::path(out_dir) / "results.csv", csv_text);
    write_atomic(fs::path(out_dir) / "summary.json", summary_text);

    manifest.files.push_back({"results.csv", sha256_hex(csv_text)});
    manifest.files.push_back({"summary.json", sha256_hex(summary_text)});
    manifest.failures = result.failures;
    manifest.inconclusive_only = result.inconclusive_only;
    manifest.finished_utc = now_iso_utc();

    json mj = {{"version", manifest.version},
               {"kind", manifest.kind},
               {"config", manifest.config_echo},
               {"config_sha256", manifest.config_sha256},
               {"started_utc", manifest.started_utc},
               {"finished_utc", manifest.finished_utc},
               {"inconclusive_only", manifest.inconclusive_only},
               {"failures", manifest.failures}};
    json files = json::array();
    for (const auto& f : manifest.files) files.push_back({{"name", f.name}, {"sha256", f.sha256}});
    mj["files"] = files;
    write_atomic(fs::path(out_dir) / "manifest.json", mj.dump(2) + "\n");
    return manifest;
}

// ------------------------------------------------------------------ report

namespace {

struct DataRow {
    std::string source;  // naive | corridor
    std::string target;  // measure | cover
    double epsilon = 0.0;
    double theta = 0.0;
    double log_p = 0.0;
    double stderr_log = 0.0;
};

std::map<std::string, std::size_t> csv_header_index(const std::string& header) {
    std::map<std::string, std::size_t> idx;
    std::istringstream ss(header);
    std::string col;
    std::size_t i = 0;
    while (std::getline(ss, col, ',')) idx[col] = i++;
    return idx;
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

// Least squares of y = a + b x.
bool linear_fit(const std::vector<double>& x, const std::vector<double>& y, double& a, double& b) {
    const std::size_t n = x.size();
    if (n < 2) return false;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return false;
    b = (n * sxy - sx * sy) / den;
    a = (sy - b * sx) / n;
    return true;
}

}  // namespace

int report(const std::string& results_dir) {
    if (!fs::exists(results_dir)) {
        std::cerr << "report: directory does not exist: " << results_dir << "\n";
        return 2;
    }
    std::vector<fs::path> manifests;
    for (const auto& entry : fs::recursive_directory_iterator(results_dir))
        if (entry.is_regular_file() && entry.path().filename() == "manifest.json")
            manifests.push_back(entry.path());
    std::sort(manifests.begin(), manifests.end());

    const fs::path report_dir = fs::path(results_dir) / "report";
    fs::create_directories(report_dir);

    if (manifests.empty()) {
        std::cerr << "report: warning: no manifests found under " << results_dir << "\n";
        write_atomic(report_dir / "merged.csv",
                     "source,target,epsilon,theta,log_p,stderr_log,log_lower_curve,log_upper_curve\n");
        write_atomic(report_dir / "fits.json", json({{"underdetermined", true}}).dump(2) + "\n");
        return 0;
    }

    // integrity + conflict scan
    std::vector<std::string> conflicts;
    std::map<std::string, std::string> seen_config;  // config hash -> results.csv hash
    std::vector<DataRow> rows;
    for (const auto& mpath : manifests) {
        std::ifstream in(mpath);
        json mj;
        try {
            in >> mj;
        } catch (const std::exception& e) {
            conflicts.push_back(mpath.string() + ": unreadable manifest: " + e.what());
            continue;
        }
        const fs::path dir = mpath.parent_path();
        std::string results_hash;
        bool ok = true;
        for (const auto& f : mj.value("files", json::array())) {
            const fs::path p = dir / f.value("name", "");
            if (!fs::exists(p)) {
                conflicts.push_back(mpath.string() + ": missing file " + p.string());
                ok = false;
                continue;
            }
            std::ifstream fin(p, std::ios::binary);
            std::ostringstream ss;
            ss << fin.rdbuf();
            const std::string h = sha256_hex(ss.str());
            if (h != f.value("sha256", "")) {
                conflicts.push_back(mpath.string() + ": hash mismatch for " + p.string());
                ok = false;
            }
            if (f.value("name", "") == "results.csv") results_hash = h;
        }
        if (!ok) continue;
        const std::string chash = mj.value("config_sha256", "");
        const auto it = seen_config.find(chash);
        if (it != seen_config.end() && it->second != results_hash) {
            conflicts.push_back(mpath.string() + ": same config hash " + chash +
                                " with different results");
            continue;
        }
        if (it != seen_config.end()) continue;  // exact duplicate run, keep one
        seen_config[chash] = results_hash;

        const std::string kind = mj.value("kind", "");
        if (kind != "naive" && kind != "corridor") continue;
        std::ifstream cin(dir / "results.csv");
        std::string header;
        if (!std::getline(cin, header)) continue;
        const auto idx = csv_header_index(header);
        std::string line;
        std::set<double> cover_eps_seen;  // theta sweeps repeat the per-epsilon cover value
        while (std::getline(cin, line)) {
            if (line.empty()) continue;
            const auto cells = csv_split(line);
            auto cell = [&](const char* name) { return std::strtod(cells.at(idx.at(name)).c_str(), nullptr); };
            if (kind == "naive") {
                rows.push_back({"naive", "measure", cell("epsilon"), cell("theta"),
                                cell("log_p_theta"), cell("log_p_theta_stderr")});
                if (cover_eps_seen.insert(cell("epsilon")).second)
                    rows.push_back({"naive", "cover", cell("epsilon"), 1.0, cell("log_p_cover"),
                                    cell("log_p_cover_stderr")});
            } else {
                rows.push_back({"corridor", "measure", cell("epsilon"), cell("theta"),
                                cell("log_p_theta"), cell("log_p_theta_stderr")});
            }
        }
    }
    if (!conflicts.empty()) {
        std::cerr << "report: refusing to merge, " << conflicts.size() << " conflict(s):\n";
        for (const auto& c : conflicts) std::cerr << "  " << c << "\n";
        return 2;
    }

    // fits in the log domain
    auto log_le = [](double eps) { return std::fabs(std::log(eps)); };
    auto log_lle = [&](double eps) { return std::log(log_le(eps)); };

    json fits;
    double c1 = 1.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
    bool have_c12 = false, have_c3 = false, have_c4 = false;
    int violated_c3 = 0;

    {
        std::vector<double> xs, ys;
        for (const auto& r : rows)
            if (r.source == "naive" && r.target == "cover" && std::isfinite(r.log_p)) {
                xs.push_back(std::pow(log_le(r.epsilon) / log_lle(r.epsilon), 2.0));
                ys.push_back(r.log_p);
            }
        double a = 0, b = 0;
        if (linear_fit(xs, ys, a, b) && b < 0.0) {
            c2 = -1.0 / b;
            double log_c1 = a;
            for (std::size_t i = 0; i < xs.size(); ++i)
                log_c1 = std::max(log_c1, ys[i] + xs[i] / c2);
            c1 = std::exp(log_c1);
            have_c12 = true;
        }
    }
    {
        double sxy = 0, sxx = 0, cmin = 0;
        std::size_t count = 0;
        for (const auto& r : rows)
            if (r.source == "naive" && r.target == "measure" && std::isfinite(r.log_p) &&
                r.theta > 0.0) {
                const double x = std::pow(log_le(r.epsilon) * r.theta / log_lle(r.epsilon), 2.0);
                if (r.log_p >= 0.0) {
                    ++violated_c3;  // empirical probability 1; no finite c3 dominates
                    continue;
                }
                sxy += x * r.log_p;
                sxx += x * x;
                cmin = std::max(cmin, x / (-r.log_p));
                ++count;
            }
        if (count >= 2 && sxy < 0.0) {
            c3 = std::max(-sxx / sxy, cmin);
            have_c3 = true;
        }
    }
    {
        double sxy = 0, sxx = 0, cmin = 0;
        std::size_t count = 0;
        std::set<double> eps_seen;
        for (const auto& r : rows) {
            if (!std::isfinite(r.log_p) || r.log_p >= 0.0) continue;
            double x;
            if (r.target == "cover") {
                x = std::pow(log_le(r.epsilon), 4.0);
            } else {
                if (!(r.theta < 1.0)) continue;
                x = std::pow(std::log((1.0 - r.theta) / 3.0) * log_le(r.epsilon), 2.0);
            }
            sxy += x * r.log_p;
            sxx += x * x;
            cmin = std::max(cmin, -r.log_p / x);
            ++count;
            eps_seen.insert(r.epsilon);
        }
        // a single result cannot anchor a curve fit across epsilon
        if (count >= 2 && eps_seen.size() >= 2 && sxx > 0.0) {
            c4 = std::max(-sxy / sxx, cmin);
            have_c4 = true;
        }
    }
    fits["c1"] = have_c12 ? json(c1) : json();
    fits["c2"] = have_c12 ? json(c2) : json();
    fits["c3"] = have_c3 ? json(c3) : json();
    fits["c4"] = have_c4 ? json(c4) : json();
    fits["underdetermined"] = !(have_c12 || have_c3 || have_c4) || rows.size() < 2;
    fits["c3_rows_violated"] = violated_c3;
    fits["n_rows"] = rows.size();

    // merged + plot-ready long format
    std::string merged =
        "source,target,epsilon,theta,log_p,stderr_log,log_lower_curve,log_upper_curve\n";
    std::string plot = "series,epsilon,theta,value\n";
    for (const auto& r : rows) {
        double lo = std::numeric_limits<double>::quiet_NaN();
        double hi = std::numeric_limits<double>::quiet_NaN();
        if (r.target == "cover") {
            if (have_c4) lo = -c4 * std::pow(log_le(r.epsilon), 4.0);
            if (have_c12)
                hi = std::log(c1) - std::pow(log_le(r.epsilon) / log_lle(r.epsilon), 2.0) / c2;
        } else {
            if (have_c4 && r.theta < 1.0)
                lo = -c4 * std::pow(std::log((1.0 - r.theta) / 3.0) * log_le(r.epsilon), 2.0);
            if (have_c3 && r.theta > 0.0)
                hi = -std::pow(log_le(r.epsilon) * r.theta / log_lle(r.epsilon), 2.0) / c3;
        }
        merged += r.source + "," + r.target + "," + g17(r.epsilon) + "," + g17(r.theta) + "," +
                  g17(r.log_p) + "," + g17(r.stderr_log) + "," + g17(lo) + "," + g17(hi) + "\n";
        plot += "empirical_" + r.target + "," + g17(r.epsilon) + "," + g17(r.theta) + "," +
                g17(r.log_p) + "\n";
        if (std::isfinite(lo))
            plot += "lower_" + r.target + "," + g17(r.epsilon) + "," + g17(r.theta) + "," +
                    g17(lo) + "\n";
        if (std::isfinite(hi))
            plot += "upper_" + r.target + "," + g17(r.epsilon) + "," + g17(r.theta) + "," +
                    g17(hi) + "\n";
    }
    if (rows.size() < 2) std::cerr << "report: warning: fit skipped (underdetermined)\n";
    write_atomic(report_dir / "merged.csv", merged);
    write_atomic(report_dir / "plot.csv", plot);
    write_atomic(report_dir / "fits.json", fits.dump(2) + "\n");
    return 0;
}

}  // namespace sausagelab
