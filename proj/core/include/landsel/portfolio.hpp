#pragma once

#include "landsel/bbob.hpp"
#include "landsel/records.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace landsel::portfolio {

enum class SolverKind { RandomSearch, OnePlusOneEs, NelderMead, CoordinateLineSearch };

std::string_view to_string(SolverKind k);
std::optional<SolverKind> parse_solver_kind(std::string_view s);

struct SolverSpec {
    std::string name;
    SolverKind kind = SolverKind::RandomSearch;
    std::uint64_t seed = 0;
    /// Initial mutation step (ES), simplex edge length (Nelder-Mead) or
    /// initial bracket width (coordinate search, 0 = whole domain).
    double step = 1.0;
};

/// Solver of the named kind, named after it, with a seed derived from
/// (seed, name). Throws landsel::Error for an unknown kind.
SolverSpec make_solver(std::string_view kind, std::uint64_t seed);

/// One solver of each kind.
std::vector<SolverSpec> default_solvers(std::uint64_t seed);

/// One run of `spec` on `inst` for `max_budget` evaluations. Returns one
/// record per checkpoint holding the best precision among evaluations
/// 1..checkpoint. Checkpoints must be sorted, positive and <= max_budget.
std::vector<PerformanceRecord> run_solver(const SolverSpec& spec, const bbob::ProblemInstance& inst, int max_budget,
                                          std::span<const int> checkpoints);

/// Full table: every solver on every instance at every budget, sorted by
/// (algorithm, fid, iid, budget).
std::vector<PerformanceRecord> generate_table(const std::vector<SolverSpec>& solvers,
                                              const std::vector<bbob::ProblemInstance>& instances,
                                              std::span<const int> budgets, unsigned jobs = 1);

struct IngestResult {
    std::vector<PerformanceRecord> records;  // sorted by (algorithm, fid, iid, budget)
    std::vector<std::string> warnings;       // duplicate keys (last row wins)
    std::vector<std::string> rejected;       // rows violating the precision invariant
};

inline constexpr std::string_view kPerformanceHeader = "algorithm,fid,iid,dim,budget,precision";

/// Parses a performance CSV. Lines starting with '#' are comments. Throws
/// ParseError listing every malformed line.
IngestResult ingest_performance(std::istream& in);
IngestResult ingest_performance(const std::filesystem::path& path);

}  // namespace landsel::portfolio
