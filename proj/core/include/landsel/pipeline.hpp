#pragma once

#include "landsel/ela.hpp"
#include "landsel/forest.hpp"
#include "landsel/records.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace landsel::pipeline {

/// Floor applied to precisions (true and predicted) before any log10.
inline constexpr double kDefaultClamp = 1e-12;
inline constexpr int kFoldCount = 5;

enum class TargetMode { Unscaled, Log10 };

std::string_view to_string(TargetMode m);
std::optional<TargetMode> parse_target_mode(std::string_view s);

struct DatasetRow {
    InstanceKey instance;
    std::array<double, ela::kFeatureCount> features{};
    double target = 0.0;     // in the dataset's mode
    double precision = 0.0;  // un-logged truth
};

struct Dataset {
    std::vector<DatasetRow> rows;  // sorted by instance
    TargetMode mode = TargetMode::Unscaled;
    std::string algorithm;
    int budget = 0;
    int sample_size = 0;
    double clamp = kDefaultClamp;

    Eigen::MatrixXd inputs() const;
    std::vector<double> targets() const;
};

/// Maps a precision into the target scale of `mode`.
double to_target(double precision, TargetMode mode, double clamp = kDefaultClamp);
/// Inverse of to_target (10^p for log targets).
double to_precision(double target, TargetMode mode);

/// Instance -> fold (1-based). Fold k holds exactly the instances with iid k.
struct FoldAssignment {
    std::map<InstanceKey, int> fold;

    int fold_of(const InstanceKey& k) const { return fold.at(k); }
};

/// Requires iids 1..5 for every function present; throws IncompleteSuite
/// naming the first missing instance otherwise.
FoldAssignment make_folds(const std::vector<InstanceKey>& instances);

/// Joins features (at `sample_size`) with the performance records of
/// `algorithm` at `budget`. Throws DataJoinError listing every key present on
/// one side only.
Dataset build_dataset(const std::vector<ela::FeatureVector>& features, const std::vector<PerformanceRecord>& perf,
                      const std::string& algorithm, int budget, int sample_size, TargetMode mode,
                      double clamp = kDefaultClamp);

/// Out-of-fold predictions for one (model, algorithm, budget, sample size, mode).
struct CvPredictions {
    std::string model_id;
    TargetMode mode = TargetMode::Unscaled;
    std::string algorithm;
    int budget = 0;
    int sample_size = 0;
    std::map<InstanceKey, double> predicted;  // in the mode's scale
    std::map<InstanceKey, double> truth;      // in the mode's scale
};

/// Seed of the model trained for fold `k`.
std::uint64_t fold_seed(std::uint64_t config_seed, int k);

/// Trains on every fold but k and predicts the instances of fold k.
std::map<InstanceKey, double> predict_fold(const forest::RegressionModelConfig& config, const Dataset& ds,
                                           const FoldAssignment& folds, int k);

CvPredictions cross_validate(const forest::RegressionModelConfig& config, const Dataset& ds,
                             const FoldAssignment& folds);

/// sqrt(mean((p - t)^2)). Throws DimensionError on length mismatch or empty input.
double rmse(std::span<const double> pred, std::span<const double> truth);
/// sqrt(mean((log10 max(p, clamp) - log10 max(t, clamp))^2)), both un-logged.
double log_rmse(std::span<const double> pred, std::span<const double> truth, double clamp = kDefaultClamp);

struct Quality {
    double rmse = 0.0;
    double log_rmse = 0.0;
};

/// Both metrics of pooled out-of-fold predictions, computed on un-logged
/// precisions (log-mode predictions are mapped back through 10^p first).
Quality prediction_quality(const CvPredictions& cv, double clamp = kDefaultClamp);

struct ModelQuality {
    std::string model_id;
    Quality quality;
    std::size_t predictions = 0;
};

struct RegressionSummary {
    std::string algorithm;
    int budget = 0;
    int sample_size = 0;
    TargetMode mode = TargetMode::Unscaled;
    std::string best_rmse_model;
    double best_rmse = 0.0;
    std::string best_log_rmse_model;
    double best_log_rmse = 0.0;
    bool incomplete = false;
    std::vector<ModelQuality> models;  // ordered by RM id
};

/// Orders "RM2" before "RM10"; other labels sort after, lexicographically.
bool model_id_less(const std::string& a, const std::string& b);

/// Best RMSE and best log-RMSE per (algorithm, budget, sample size, mode)
/// over all models, ties to the lowest RM id. Groups missing models or
/// instances are flagged, not rejected.
std::vector<RegressionSummary> regression_report(const std::vector<CvPredictions>& all,
                                                 double clamp = kDefaultClamp);

/// Text rendering of the per-algorithm best-model table for one mode, one
/// section per (sample size, budget):
///   algorithm,RMSE,model,logRMSE,model
std::string render_best_model_table(const std::vector<RegressionSummary>& rows, TargetMode mode);

}  // namespace landsel::pipeline
