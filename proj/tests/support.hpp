#pragma once

#include "landsel/common.hpp"
#include "landsel/ela.hpp"
#include "landsel/records.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace testing {

inline std::size_t feature_index(std::string_view name) {
    const auto& names = landsel::ela::feature_names();
    const auto it = std::find(names.begin(), names.end(), name);
    return static_cast<std::size_t>(it - names.begin());
}

/// Random feature vectors for fids 1..fids x iids 1..5 at one sample size.
inline std::vector<landsel::ela::FeatureVector> synthetic_features(int fids, int sample_size, std::uint64_t seed) {
    landsel::Rng rng(seed);
    std::vector<landsel::ela::FeatureVector> out;
    for (int fid = 1; fid <= fids; ++fid)
        for (int iid = 1; iid <= 5; ++iid) {
            landsel::ela::FeatureVector fv;
            fv.fid = fid;
            fv.iid = iid;
            fv.dim = 5;
            fv.sample_size = sample_size;
            fv.reps = 1;
            for (auto& v : fv.values) v = rng.uniform(-1.0, 1.0);
            out.push_back(fv);
        }
    return out;
}

/// Log-uniform precisions in [1e-8, 1e4] for every algorithm, instance and budget.
inline std::vector<landsel::PerformanceRecord> synthetic_perf(const std::vector<std::string>& algorithms, int fids,
                                                              const std::vector<int>& budgets, std::uint64_t seed) {
    landsel::Rng rng(seed);
    std::vector<landsel::PerformanceRecord> out;
    for (const auto& a : algorithms)
        for (int fid = 1; fid <= fids; ++fid)
            for (int iid = 1; iid <= 5; ++iid)
                for (int b : budgets) out.push_back({a, fid, iid, 5, b, std::pow(10.0, rng.uniform(-8.0, 4.0))});
    return out;
}

}  // namespace testing
