#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sausagelab/analytic.hpp"
#include "sausagelab/cli.hpp"
#include "sausagelab/sha256.hpp"

namespace fs = std::filesystem;
using namespace sausagelab;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "sausagelab-test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("sha256 known vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("config parsing, echo, and strict validation") {
    const std::string text =
        "# comment\n"
        "kind naive\n"
        "epsilon 0.1 0.05\n"
        "theta 0.5\n"
        "n 100\n"
        "seed 7\n"
        "out /tmp/x\n";
    const ExperimentConfig cfg = parse_config_text(text);
    CHECK(cfg.kind == "naive");
    CHECK(cfg.get_real_list("epsilon") == std::vector<double>{0.1, 0.05});
    CHECK(cfg.get_int("n") == 100);
    validate_config(cfg);

    // canonical echo round-trips the experiment-relevant keys losslessly
    const ExperimentConfig again = parse_config_text(cfg.echo());
    for (const auto& [key, toks] : cfg.values) {
        if (key == "out" || key == "workers") continue;
        CHECK(again.values.at(key) == toks);
    }
    CHECK(again.content_hash() == cfg.content_hash());

    CHECK_THROWS_AS(parse_config_text("kind naive\nkind naive\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("epsilon 0.1\n"), ConfigError);  // no kind
    CHECK_THROWS_AS(parse_config_text("kind naive\nepsilon\n"), ConfigError);
}

TEST_CASE("unknown keys and kinds are rejected with the field name") {
    const std::string text = "kind naive\nepsilon 0.1\ntheta 0.5\nn 10\nout /tmp/x\nbogus 3\n";
    try {
        validate_config(parse_config_text(text));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field == "bogus");
    }
    CHECK_THROWS_AS(validate_config(parse_config_text("kind warp\nout /tmp/x\n")), ConfigError);
    CHECK_THROWS_AS(validate_config(parse_config_text("kind naive\nepsilon x\ntheta 0.5\nn 1\nout d\n")),
                    ConfigError);
    CHECK_THROWS_AS(validate_config(parse_config_text("kind naive\ntheta 0.5\nn 1\nout d\n")),
                    ConfigError);
    CHECK_THROWS_AS(
        validate_config(parse_config_text("kind bridge\ndelta 0.1\nn 5\nq1 0\nq2 1 0\nq3 0 1\nout d\n")),
        ConfigError);
}

TEST_CASE("run naive writes consistent artifacts") {
    const fs::path dir = fresh_dir("naive1");
    const std::string text = "kind naive\nepsilon 0.3\ntheta 0.5\nn 60\ndt 0.01\nseed 7\nout " +
                             dir.string() + "\n";
    const ResultManifest m = run(parse_config_text(text));
    CHECK(m.kind == "naive");
    REQUIRE(m.files.size() == 2);
    for (const auto& f : m.files) {
        const fs::path p = dir / f.name;
        REQUIRE(fs::exists(p));
        CHECK(sha256_hex(slurp(p)) == f.sha256);
    }
    // summary echoes the config and its hash
    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(summary["config_sha256"] == m.config_sha256);
    CHECK(summary["kind"] == "naive");
}

TEST_CASE("byte-identical results across worker counts") {
    const fs::path d1 = fresh_dir("workers1");
    const fs::path d8 = fresh_dir("workers8");
    const std::string base = "kind naive\nepsilon 0.25\ntheta 0.4\nn 400\nseed 11\n";
    run(parse_config_text(base + "workers 1\nout " + d1.string() + "\n"));
    run(parse_config_text(base + "workers 8\nout " + d8.string() + "\n"));
    CHECK(slurp(d1 / "results.csv") == slurp(d8 / "results.csv"));
}

TEST_CASE("rerunning a config reproduces identical file hashes") {
    const fs::path d1 = fresh_dir("repro1");
    const fs::path d2 = fresh_dir("repro2");
    const std::string base = "kind srw\nn_sites 2\nn 5000\ntheta 1.0\nseed 3\n";
    const ResultManifest a = run(parse_config_text(base + "out " + d1.string() + "\n"));
    const ResultManifest b = run(parse_config_text(base + "out " + d2.string() + "\n"));
    REQUIRE(a.files.size() == b.files.size());
    for (std::size_t i = 0; i < a.files.size(); ++i) CHECK(a.files[i].sha256 == b.files[i].sha256);
}

TEST_CASE("bounds-report rows match the analytic evaluator") {
    const fs::path dir = fresh_dir("bounds");
    const std::string text =
        "kind bounds-report\nepsilon 0.1 0.05 0.02\ntheta 0.5\nseed 0\nout " + dir.string() + "\n";
    run(parse_config_text(text));
    std::ifstream in(dir / "results.csv");
    std::string line;
    std::getline(in, line);  // header
    int rows = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ls, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end && *end == '\0') vals.push_back(v);
        }
        REQUIRE(vals.size() >= 6);
        const Theorem1Curves want = theorem1_bounds(vals[0], vals[1], BoundParams{});
        CHECK(vals[2] == want.upper);
        CHECK(vals[3] == want.lower);
        CHECK(vals[4] == want.upper_measure);
        CHECK(vals[5] == want.lower_measure);
        ++rows;
    }
    CHECK(rows == 3);
}

TEST_CASE("bridge config rejects discretization-dominated deltas") {
    const fs::path dir = fresh_dir("bridge-bad");
    const std::string text =
        "kind bridge\ndelta 0.01\nn 10\nq1 -1 0\nq2 1 0\nq3 0 0\ndt_floor 0.01\nout " +
        dir.string() + "\n";
    CHECK_THROWS_AS(run(parse_config_text(text)), ConfigError);
}

TEST_CASE("report on an empty directory warns and writes an empty merge") {
    const fs::path dir = fresh_dir("empty-report");
    CHECK(report(dir.string()) == 0);
    CHECK(fs::exists(dir / "report" / "merged.csv"));
    const std::string merged = slurp(dir / "report" / "merged.csv");
    CHECK(merged.find("log_p") != std::string::npos);
}

TEST_CASE("report merges naive runs and fits the lower constant") {
    const fs::path root = fresh_dir("report-merge");
    for (const auto& [eps, sub] : {std::pair{0.2, "a"}, std::pair{0.25, "b"}, std::pair{0.3, "c"}}) {
        const std::string text = "kind naive\nepsilon " + std::to_string(eps) +
                                 "\ntheta 0.2\nn 800\nseed 5\nout " + (root / sub).string() + "\n";
        run(parse_config_text(text));
    }
    REQUIRE(report(root.string()) == 0);
    const auto fits = nlohmann::json::parse(slurp(root / "report" / "fits.json"));
    REQUIRE(!fits["c4"].is_null());
    const double c4 = fits["c4"].get<double>();
    CHECK(c4 > 0.0);
    // by construction the fitted lower curve sits below every empirical point
    std::ifstream in(root / "report" / "merged.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string src, target, cell;
        std::getline(ls, src, ',');
        std::getline(ls, target, ',');
        std::vector<double> vals;
        while (std::getline(ls, cell, ',')) vals.push_back(std::strtod(cell.c_str(), nullptr));
        REQUIRE(vals.size() == 6);
        const double log_p = vals[2], lower = vals[4];
        if (std::isfinite(log_p) && std::isfinite(lower)) CHECK(lower <= log_p + 1e-9);
    }
}

TEST_CASE("every experiment kind dispatches and writes rows") {
    struct Tiny {
        const char* name;
        std::string body;
    };
    const std::vector<Tiny> kinds = {
        {"corridor", "kind corridor\nepsilon 0.2\ntheta 0.3\nn 50\nseed 2\n"},
        {"eq9",
         "kind eq9\nepsilon 0.05\ny 0.5\ndy 0.1\nn_walks 2000\nalpha_spacing 0.5\nseed 2\n"},
        {"lemma4", "kind lemma4\nepsilon 0.05\nn_walks 1500\nseed 2\n"},
        {"local-time", "kind local-time\nn 400\ndt 0.001\nbin_width 0.04\nseed 2\n"},
        {"bridge", "kind bridge\ndelta 0.1 0.05\nn 400\nq1 -1 0\nq2 1 0.3\nq3 0.2 0.1\nseed 2\n"},
        {"strip-cond", "kind strip-cond\nepsilon 0.25\ntheta 0.2\nn 2000\nseed 2\n"},
        {"martingale",
         "kind martingale\nepsilon 0.15\nn 3\nn_walks 200\ncheckpoints 8\ndt 0.005\nseed 2\n"},
        {"wos-check", "kind wos-check\nepsilon 0.09\nn_walks 2000\nx_cutoff 5\nseed 2\n"},
    };
    for (const auto& k : kinds) {
        CAPTURE(k.name);
        const fs::path dir = fresh_dir(std::string("kind-") + k.name);
        const ResultManifest m = run(parse_config_text(k.body + "out " + dir.string() + "\n"));
        CHECK(m.failures.empty());
        const std::string csv = slurp(dir / "results.csv");
        CHECK(csv.find('\n') != std::string::npos);
        CHECK(std::count(csv.begin(), csv.end(), '\n') >= 2);  // header + data
    }
}

TEST_CASE("partial combo failures end up in the manifest") {
    const fs::path dir = fresh_dir("partial");
    const std::string text =
        "kind naive\nepsilon 0.3 -0.1\ntheta 0.5\nn 40\ndt 0.02\nseed 1\nout " + dir.string() +
        "\n";
    const ResultManifest m = run(parse_config_text(text));
    CHECK(m.failures.size() == 1);
    const std::string csv = slurp(dir / "results.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    // every combination failing is a numerical failure
    const fs::path dir2 = fresh_dir("allfail");
    CHECK_THROWS_AS(run(parse_config_text("kind naive\nepsilon -0.1\ntheta 0.5\nn 40\nseed 1\nout " +
                                          dir2.string() + "\n")),
                    NumericalError);
}

TEST_CASE("crossed bound curves are flagged, not fatal") {
    const fs::path dir = fresh_dir("crossed");
    const std::string text =
        "kind bounds-report\nepsilon 0.1\ntheta 0.5\nc2 0.01\nseed 0\nout " + dir.string() + "\n";
    run(parse_config_text(text));
    const std::string csv = slurp(dir / "results.csv");
    CHECK(csv.find("crossed") != std::string::npos);
}

#ifdef SAUSAGELAB_BIN
TEST_CASE("binary verbs and exit codes") {
    const fs::path dir = fresh_dir("bin");
    const fs::path good = dir / "good.cfg";
    std::ofstream(good) << "kind srw\nn_sites 2\nn 500\ntheta 1.0\nseed 1\nout "
                        << (dir / "out").string() << "\n";
    const fs::path bad = dir / "bad.cfg";
    std::ofstream(bad) << "kind srw\nn_sites 2\nbogus 1\nn 5\ntheta 1\nout x\n";

    auto exit_code = [](const std::string& cmd) {
        const int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };
    const std::string bin = SAUSAGELAB_BIN;
    CHECK(exit_code(bin + " validate " + good.string() + " > /dev/null") == 0);
    CHECK(exit_code(bin + " validate " + bad.string() + " 2> /dev/null") == 2);
    CHECK(exit_code(bin + " run " + good.string() + " > /dev/null") == 0);
    CHECK(exit_code(bin + " report " + dir.string() + " 2> /dev/null") == 0);
    CHECK(exit_code(bin + " frobnicate x 2> /dev/null") == 2);
    CHECK(exit_code(bin + " run /nonexistent.cfg 2> /dev/null") == 2);

    // semantically invalid parameters also count as invalid config
    const fs::path sem = dir / "sem.cfg";
    std::ofstream(sem) << "kind eq9\nepsilon 0.05\ny 0.5\ndy 0.4\nn_walks 1000\nout "
                       << (dir / "semout").string() << "\n";
    CHECK(exit_code(bin + " run " + sem.string() + " 2> /dev/null") == 2);
}
#endif

TEST_CASE("report flags a single result as underdetermined") {
    const fs::path root = fresh_dir("report-single");
    run(parse_config_text("kind naive\nepsilon 0.25\ntheta 0.3\nn 500\nseed 5\nout " +
                          (root / "only").string() + "\n"));
    REQUIRE(report(root.string()) == 0);
    const auto fits = nlohmann::json::parse(slurp(root / "report" / "fits.json"));
    CHECK(fits["c4"].is_null());
    CHECK(fits["underdetermined"].get<bool>());
    // the single data row is still present in the merge
    const std::string merged = slurp(root / "report" / "merged.csv");
    CHECK(std::count(merged.begin(), merged.end(), '\n') >= 2);
}

TEST_CASE("report refuses to merge tampered results") {
    const fs::path root = fresh_dir("report-conflict");
    const std::string text =
        "kind naive\nepsilon 0.3\ntheta 0.5\nn 50\ndt 0.02\nseed 9\nout " + (root / "x").string() + "\n";
    run(parse_config_text(text));
    // tamper with the results and keep the manifest hash stale
    std::ofstream out(root / "x" / "results.csv", std::ios::app);
    out << "tampered\n";
    out.close();
    CHECK(report(root.string()) == 2);
}

TEST_CASE("report detects same-config different-results manifests") {
    const fs::path root = fresh_dir("report-same-config");
    const std::string text1 = "kind naive\nepsilon 0.3\ntheta 0.5\nn 50\ndt 0.02\nseed 9\nout " +
                              (root / "x").string() + "\n";
    run(parse_config_text(text1));
    run(parse_config_text("kind naive\nepsilon 0.3\ntheta 0.5\nn 50\ndt 0.02\nseed 9\nout " +
                          (root / "y").string() + "\n"));
    // rewrite y's results and refresh its manifest hash so integrity passes
    const fs::path ry = root / "y" / "results.csv";
    std::string doctored = slurp(ry);
    doctored += "0.1,0.1,1,0.001,0,0,0,0,0,0,0,0,0,0,0,0\n";
    std::ofstream(ry, std::ios::binary) << doctored;
    auto mj = nlohmann::json::parse(slurp(root / "y" / "manifest.json"));
    for (auto& f : mj["files"])
        if (f["name"] == "results.csv") f["sha256"] = sha256_hex(doctored);
    std::ofstream(root / "y" / "manifest.json", std::ios::binary) << mj.dump(2) << "\n";
    CHECK(report(root.string()) == 2);
}
