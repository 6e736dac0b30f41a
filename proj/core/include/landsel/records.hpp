#pragma once

#include <compare>
#include <string>

namespace landsel {

/// (function id, instance id) of one benchmark problem.
struct InstanceKey {
    int fid = 0;
    int iid = 0;

    auto operator<=>(const InstanceKey&) const = default;
};

inline std::string to_string(const InstanceKey& k) {
    return "(fid=" + std::to_string(k.fid) + ", iid=" + std::to_string(k.iid) + ")";
}

/// Best-so-far target precision of one run after `budget` evaluations.
struct PerformanceRecord {
    std::string algorithm;
    int fid = 0;
    int iid = 0;
    int dim = 0;
    int budget = 0;
    double precision = 0.0;

    InstanceKey instance() const { return {fid, iid}; }
};

}  // namespace landsel
