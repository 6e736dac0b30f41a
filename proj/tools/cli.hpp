#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace landsel::cli {

/// Everything that determines a run. Defaults mirror the original study:
/// 24 functions x 5 instances in dimension 5, feature samples of 50d and
/// 400d points with 50 replicates, budgets 250/500/1000, threshold 0.9.
struct RunConfig {
    std::uint64_t seed = 1;
    int dim = 5;
    int fid_min = 1, fid_max = 24;
    int iid_min = 1, iid_max = 5;
    std::vector<int> sample_sizes{250, 2000};
    int reps = 50;
    std::vector<int> budgets{250, 500, 1000};
    double clamp = 1e-12;
    double threshold = 0.9;
    std::vector<double> threshold_grid;  // empty: no sweep
    std::vector<std::string> solvers{"coordinate_line_search", "nelder_mead", "one_plus_one_es", "random_search"};
    std::optional<std::filesystem::path> performance_input;  // ingest instead of running solvers
    std::filesystem::path out = "landsel-out";
    unsigned jobs = 1;

    /// Canonical JSON of the fields that affect results (not out, not jobs).
    std::string canonical_json() const;
    /// FNV-1a of canonical_json(), as 16 hex digits.
    std::string hash() const;
};

/// Overlays the keys present in a JSON config file onto `cfg`.
void load_config_file(const std::filesystem::path& path, RunConfig& cfg);

/// Default output directory: $LANDSEL_OUT if set, else "landsel-out".
std::filesystem::path default_out_dir();

// Output file names inside RunConfig::out.
inline constexpr const char* kFeaturesFile = "features.csv";
inline constexpr const char* kPerformanceFile = "performance.csv";
inline constexpr const char* kPredictionsFile = "predictions.csv";
inline constexpr const char* kSelectorsFile = "selectors.csv";
inline constexpr const char* kThresholdSweepFile = "threshold_sweep.csv";
inline constexpr const char* kBestModelsFile = "best_models.txt";
inline constexpr const char* kReportFile = "report.json";
std::string frequency_file(int budget, int sample_size);

// Each command writes its outputs under cfg.out, re-reads them to validate,
// and throws landsel::Error (MissingInput when an upstream file is absent).
// Progress and warnings go to `log`.
void cmd_features(const RunConfig& cfg, std::ostream& log);
void cmd_runs(const RunConfig& cfg, std::ostream& log);
void cmd_ingest(const RunConfig& cfg, std::ostream& log);
void cmd_train(const RunConfig& cfg, std::ostream& log);
void cmd_select(const RunConfig& cfg, std::ostream& log);
void cmd_report(const RunConfig& cfg, std::ostream& log);
/// features, runs (or ingest when a performance input is set), train,
/// select, report.
void cmd_all(const RunConfig& cfg, std::ostream& log);

/// Entry point shared by the binary and the tests; returns the exit status.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace landsel::cli
