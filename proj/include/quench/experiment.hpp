#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "quench/collapse.hpp"
#include "quench/scaling.hpp"
#include "quench/series.hpp"
#include "quench/synthetic.hpp"

namespace quench {

namespace fs = std::filesystem;

struct ModelSection {
    ModelFamily family = ModelFamily::classical;
    int d = 3;
    double J = 1.0;
    // Unset fields fall back to the compiled-in defaults for (family, d).
    std::optional<double> critical_point;
    std::optional<double> eta;
    std::optional<double> z;
    std::vector<int> Ls;
    std::vector<double> hs;

    friend bool operator==(const ModelSection&, const ModelSection&) = default;
};

struct RunSection {
    // Classical: sweeps. Quantum: J t.
    double t_max = 100.0;
    // First nonzero quantum record time; classical schedules start at 1 sweep.
    double t_min = 0.01;
    int points_per_decade = 20;
    std::int64_t n_realizations = 1;
    // Wolff updates; unset means the size-dependent default.
    std::optional<std::int64_t> n_equil;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;  // 0 = all cores
    std::string output_dir = "out";
    double krylov_tol = 1e-12;

    friend bool operator==(const RunSection&, const RunSection&) = default;
};

struct AnalysisSection {
    std::vector<double> beta_fracs{0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50};
    std::vector<double> gamma_fracs{0.6, 0.7, 0.8, 0.9, 1.0};
    double delta = 0.05;
    double fit_fraction = 0.25;
    CrossoverAnchor anchor = CrossoverAnchor::steepest;
    double w_min = 0.2;
    double w_max = 3.0;
    int scan_points = 200;
    double refine_tol = 1e-3;
    double k = 4.0;
    int grid_points_per_decade = 100;
    // Crossing diagnostic exponent.
    double crossing_w = 1.0;

    std::vector<CollapseWindow> windows() const;
    CollapseOptions options() const;

    friend bool operator==(const AnalysisSection&, const AnalysisSection&) = default;
};

struct SyntheticSection {
    double w_star = 1.0;
    ScalingFunction function = ScalingFunction::rational;
    double noise = 0.0;
    double x_min = 1e-3;
    double x_max = 1e3;
    int points_per_decade = 20;

    friend bool operator==(const SyntheticSection&, const SyntheticSection&) = default;
};

struct ExperimentConfig {
    ModelSection model;
    RunSection run;
    AnalysisSection analysis;
    SyntheticSection synthetic;

    // Throws ConfigError naming the offending field.
    void validate() const;
    CriticalConstants constants() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// INI text with [model], [run], [analysis], [synthetic] sections.
// Overrides are "section.key=value" and are applied before typed parsing.
ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const fs::path& path, const std::vector<std::string>& overrides = {});
std::string serialize_config(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Series files: CSV (time,mean_M2,stderr_M2,n) plus a JSON sidecar <file>.meta.json
// ---------------------------------------------------------------------------
fs::path sidecar_path(const fs::path& csv);
void write_series(const fs::path& csv, const EnsembleSeries& series);
EnsembleSeries read_series(const fs::path& csv);
std::string series_filename(const SeriesLabel& label);

std::string sha256_hex(const fs::path& file);

struct FileRecord {
    std::string path;  // relative to the output directory
    std::string sha256;
};

struct RunManifest {
    std::string config_text;
    CriticalConstants constants;
    std::string code_version;
    struct Count {
        int L = 0;
        double h = 0.0;
        std::int64_t realizations = 0;
    };
    std::vector<Count> counts;
    double wall_seconds = 0.0;
    std::vector<FileRecord> files;
    bool complete = true;
    std::vector<std::string> failures;
};

void write_manifest(const fs::path& dir, const RunManifest& manifest);
RunManifest read_manifest(const fs::path& dir);
// Files missing or with a mismatched digest, as human-readable lines.
std::vector<std::string> verify_manifest(const fs::path& dir);

// Raised after the manifest of a run with failed (L, h) tasks has been written.
class PartialResultsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

extern const char* const kCodeVersion;

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------
RunManifest simulate_classical(const ExperimentConfig& config);
RunManifest simulate_quantum(const ExperimentConfig& config);
RunManifest make_synthetic_files(const ExperimentConfig& config);

// Record times used by simulate-quantum: 0 then log spaced from t_min to t_max.
std::vector<double> quantum_record_times(const RunSection& run);

// Constants for analysis: those of the series' (family, d) with any config overrides.
CriticalConstants analysis_constants(const std::vector<EnsembleSeries>& series, const ExperimentConfig* config);

struct CollapseReport {
    CollapseResult result;
    fs::path report;
    fs::path curves;
};
// Writes collapse_report.json and collapse_curves.csv (rescaled at w_rep) into out_dir.
CollapseReport analyze_collapse(const std::vector<fs::path>& files, const ExperimentConfig& config,
                                const fs::path& out_dir);

struct CrossingReport {
    CrossingDiagnostic diagnostic;
    fs::path report;
    fs::path table;
};
CrossingReport analyze_crossing(const std::vector<fs::path>& files, const ExperimentConfig& config,
                                const fs::path& out_dir);

// Invariant self-checks: one line per check, "PASS name" or "FAIL name: why".
struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};
std::vector<CheckResult> run_invariant_suite(unsigned threads = 0);

}  // namespace quench
