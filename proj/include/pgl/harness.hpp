#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pgl/model.hpp"

namespace pgl {

// Everything an experiment needs, resolvable from a config file and/or CLI
// flags. Optionals separate "explicitly given" from "defaulted" so defaults
// can be derived late (they need N) yet still echoed into reports.
struct ExperimentConfig {
    // gen | enumerate | fragility | pipeline | stability | success |
    // partition-test | pitt-test
    std::string kind;

    int n = 0;
    std::optional<int> m;         // exactly one of m / alpha
    std::optional<double> alpha;  // M = round(alpha * N)

    std::optional<double> kappa;                       // half-space threshold
    std::vector<std::pair<double, double>> intervals;  // interval union when nonempty

    std::optional<double> eta;   // default 3 ln(N) / N
    std::optional<int> k;        // default max(1, N/10)
    std::optional<double> iota;  // success kind: k = floor(iota N), radius sqrt(iota N)/3

    std::uint64_t samples = 1000;  // trials / resamplings per experiment
    std::uint64_t cases = 100;     // setups for partition-test / pitt-test
    std::uint64_t seed = 0;        // master seed / instance seed
    std::uint64_t omega = 0;       // algorithm internal randomness
    std::string algorithm = "majority";
    double rho_budget = 2.0;
    bool exploratory = false;  // pipeline: split CAND even/odd when hypotheses fail
    int threads = 1;

    std::string out_report, out_csv, out_instance, in_instance;

    int resolved_m() const;
    double resolved_eta() const;
    int resolved_k() const;
    ConstraintSpec resolved_spec() const;  // HalfSpace{0} unless kappa/intervals given
    void validate() const;
};

// one `key = value` assignment; FormatError names an unknown key or an
// unparsable value
void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// line-oriented `key = value` with '#' comments; `base` supplies whatever
// the file does not mention
ExperimentConfig parse_config_file(const std::string& path, ExperimentConfig base = {});

struct Report {
    std::string timestamp;  // the one line allowed to differ between reruns
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<std::pair<std::string, std::string>> results;
    std::vector<std::pair<std::string, std::string>> verdicts;
    std::vector<std::string> csv_header;
    std::vector<std::vector<std::string>> csv_rows;
    bool theorem_violation = false;  // drives CLI exit code 2
};

// Pure in (config minus threads/paths, seed): identical inputs give
// identical report fields for any thread count; only `timestamp` varies.
Report run_experiment(const ExperimentConfig& cfg);

// sections [meta] / [config] / [results] / [verdicts], every line
// `key = value`, the timestamp isolated to one [meta] line
std::string report_to_string(const Report& r);
void write_report(const Report& r, const std::string& path);

// comma separator, '.' decimal, LF endings, doubles at 17 significant digits
std::string csv_to_string(const Report& r);
void write_csv(const Report& r, const std::string& path);

// Binary instance container: magic "PGL1", version u32, N u32, M u32,
// seed u64, spec tag u8 (0 = half-space kappa f64; 1 = interval union,
// L u32 then 2L f64 endpoints), then M*N entries f64 row-major.
// Little-endian throughout; round trips are bit-exact.
void save_instance(const DisorderInstance& inst, const std::string& path);
DisorderInstance load_instance(const std::string& path);

// FNV-1a over the file's raw bytes
std::uint64_t file_digest(const std::string& path);

}  // namespace pgl
