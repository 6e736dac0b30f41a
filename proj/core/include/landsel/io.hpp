#pragma once

#include "landsel/ela.hpp"
#include "landsel/pipeline.hpp"
#include "landsel/records.hpp"
#include "landsel/selector.hpp"

#include <iosfwd>
#include <string>
#include <vector>

// Readers and writers for the CSV exchange formats. Every writer takes a list
// of preamble lines, emitted as '#' comments before the header; readers skip
// comment lines. Reals are written with 17 significant digits.
namespace landsel::io {

std::string features_header();
inline constexpr const char* kPredictionsHeader =
    "model_id,target_mode,algorithm,fid,iid,budget,sample_size,predicted,true";
inline constexpr const char* kSelectorHeader = "model_id,approach,budget,sample_size,rmse,log_rmse,pareto";
inline constexpr const char* kFrequencyHeader = "approach,algorithm,fid,iid,count";

/// Rows sorted by (fid, iid, sample_size). Imputed features are listed in
/// trailing comment lines.
void write_features(std::ostream& os, std::vector<ela::FeatureVector> features,
                    const std::vector<std::string>& preamble = {});
std::vector<ela::FeatureVector> read_features(std::istream& in);

void write_performance(std::ostream& os, const std::vector<PerformanceRecord>& records,
                       const std::vector<std::string>& preamble = {});

void write_predictions(std::ostream& os, const std::vector<pipeline::CvPredictions>& predictions,
                       const std::vector<std::string>& preamble = {});
std::vector<pipeline::CvPredictions> read_predictions(std::istream& in);

void write_selectors(std::ostream& os, const selector::SelectorReport& report,
                     const std::vector<std::string>& preamble = {});
void write_frequency(std::ostream& os, const selector::Scenario& scenario,
                     const std::vector<std::string>& preamble = {});

}  // namespace landsel::io
