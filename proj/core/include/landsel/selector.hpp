#pragma once

#include "landsel/pipeline.hpp"
#include "landsel/records.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace landsel::selector {

/// algorithm -> value (predicted precision, predicted log10 precision or
/// true precision depending on context).
using AlgorithmValues = std::map<std::string, double>;

struct SelectorConfig {
    /// Compared against 10^(log prediction) of the log recommendation.
    double threshold = 0.9;
};

enum class Approach { Unscaled, Log, Combined, CombinedVbs };
inline constexpr Approach kApproaches[] = {Approach::Unscaled, Approach::Log, Approach::Combined,
                                           Approach::CombinedVbs};

std::string_view to_string(Approach a);

/// argmin of the predicted precision, ties to the alphabetically first name.
std::string select_unscaled(const AlgorithmValues& predicted);
/// argmin of the predicted log10 precision, same tie rule.
std::string select_log(const AlgorithmValues& predicted_log);
/// Log recommendation if its predicted precision 10^p is below the
/// threshold, unscaled recommendation otherwise.
std::string select_combined(const AlgorithmValues& predicted, const AlgorithmValues& predicted_log,
                            const SelectorConfig& cfg);
/// The truly best algorithm.
std::string vbs(const AlgorithmValues& truth);
/// The better (by true precision) of the two recommendations.
std::string combined_vbs(const std::string& unscaled_choice, const std::string& log_choice,
                         const AlgorithmValues& truth);

/// Per-instance true precisions of every algorithm.
using TruthTable = std::map<InstanceKey, AlgorithmValues>;
/// instance -> chosen algorithm
using Choices = std::map<InstanceKey, std::string>;

enum class Metric { Rmse, LogRmse };

/// RMSE and log-RMSE between the chosen algorithms' true precisions and the
/// per-instance best precisions.
pipeline::Quality selection_quality(const Choices& choices, const TruthTable& truth,
                                    double clamp = pipeline::kDefaultClamp);

/// The single algorithm whose constant selection minimises `metric`.
std::string sbs(const TruthTable& truth, Metric metric, double clamp = pipeline::kDefaultClamp);

struct ParetoPoint {
    std::string label;
    double rmse = 0.0;
    double log_rmse = 0.0;
};

/// Membership flags: a point is on the front unless another point is <= in
/// both coordinates and < in at least one.
std::vector<bool> pareto_front(const std::vector<ParetoPoint>& points);

/// algorithm -> instance -> number of decision sets that picked it. Every
/// algorithm in `algorithms` and every instance in the decisions appears.
using Frequency = std::map<std::string, std::map<InstanceKey, int>>;
Frequency selection_frequency(const std::vector<Choices>& decisions, const std::vector<std::string>& algorithms);

struct SelectorRow {
    std::string model_id;  // "RMk", or a baseline label: VBS, SBS_rmse, SBS_log, Algo:<name>
    std::string approach;  // unscaled | log | combined | combined_vbs | baseline
    int budget = 0;
    int sample_size = 0;
    pipeline::Quality quality;
    bool pareto = false;
};

struct ModelDecisions {
    std::string model_id;
    std::map<Approach, Choices> choices;
    std::map<Approach, pipeline::Quality> quality;
};

struct Scenario {
    int budget = 0;
    int sample_size = 0;
    std::vector<std::string> algorithms;  // sorted
    Choices vbs_choices;
    std::string sbs_rmse;
    std::string sbs_log;
    std::vector<ModelDecisions> models;  // by RM id
    std::vector<SelectorRow> rows;       // models x approaches, then baselines
    std::map<Approach, Frequency> frequency;  // unscaled, log, combined
};

struct SelectorReport {
    SelectorConfig config;
    double clamp = pipeline::kDefaultClamp;
    std::vector<Scenario> scenarios;  // ordered by (budget, sample size)
};

/// Builds the truth table for one budget from raw performance records.
TruthTable truth_table(const std::vector<PerformanceRecord>& perf, int budget);

/// Runs every selector for every model and scenario found in `predictions`.
/// Throws IncompleteMatrix when an (algorithm, instance) prediction or truth
/// is missing for any model.
SelectorReport evaluate_selectors(const std::vector<pipeline::CvPredictions>& predictions,
                                  const std::vector<PerformanceRecord>& perf, const SelectorConfig& cfg = {},
                                  double clamp = pipeline::kDefaultClamp);

struct ThresholdPoint {
    std::string model_id;
    double threshold = 0.0;
    int budget = 0;
    int sample_size = 0;
    pipeline::Quality quality;
};

/// Combined-selector quality per model over a grid of thresholds.
std::vector<ThresholdPoint> threshold_sweep(const std::vector<pipeline::CvPredictions>& predictions,
                                            const std::vector<PerformanceRecord>& perf,
                                            const std::vector<double>& thresholds,
                                            double clamp = pipeline::kDefaultClamp);

}  // namespace landsel::selector
