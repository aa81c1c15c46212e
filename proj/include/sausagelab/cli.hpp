#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace sausagelab {

// Invalid configuration; names the offending field.
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& field_, const std::string& what)
        : std::runtime_error("config field '" + field_ + "': " + what), field(field_) {}
    std::string field;
};

// Key -> whitespace-separated value tokens, plus the experiment kind.
// The format is a plain text file of `key value...` lines with '#' comments.
struct ExperimentConfig {
    std::string kind;
    std::map<std::string, std::vector<std::string>> values;

    // Canonical serialization: `kind` first, remaining keys sorted. Hashing
    // this echo identifies the configuration.
    std::string echo() const;
    std::string content_hash() const;

    bool has(const std::string& key) const { return values.count(key) > 0; }
    double get_real(const std::string& key) const;
    double get_real_or(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
    std::vector<double> get_real_list(const std::string& key) const;
    std::string get_string(const std::string& key) const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Strict schema check: required keys present, types parse, no unknown keys.
void validate_config(const ExperimentConfig& cfg);

struct ManifestFile {
    std::string name;
    std::string sha256;
};

struct ResultManifest {
    std::string kind;
    std::string out_dir;
    std::string config_echo;
    std::string config_sha256;
    std::string started_utc;
    std::string finished_utc;
    std::string version;
    std::vector<ManifestFile> files;
    std::vector<std::string> failures;
    bool inconclusive_only = false;
};

// Executes the configured experiment; writes results.csv, summary.json and
// manifest.json into the config's `out` directory, each atomically
// (temp-then-rename). Identical config implies byte-identical CSV bodies
// regardless of worker count.
ResultManifest run(const ExperimentConfig& cfg);

// Merges every manifest found under results_dir into report files
// (merged.csv, plot.csv, fits.json under results_dir/report). Returns process
// exit code semantics: 0 ok, 2 conflicts or invalid inputs.
int report(const std::string& results_dir);

}  // namespace sausagelab
