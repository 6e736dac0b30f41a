#include "landsel/portfolio.hpp"

#include "landsel/common.hpp"
#include "landsel/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

namespace landsel::portfolio {

std::string_view to_string(SolverKind k) {
    switch (k) {
    case SolverKind::RandomSearch: return "random_search";
    case SolverKind::OnePlusOneEs: return "one_plus_one_es";
    case SolverKind::NelderMead: return "nelder_mead";
    case SolverKind::CoordinateLineSearch: return "coordinate_line_search";
    }
    return "?";
}

std::optional<SolverKind> parse_solver_kind(std::string_view s) {
    for (auto k : {SolverKind::RandomSearch, SolverKind::OnePlusOneEs, SolverKind::NelderMead,
                   SolverKind::CoordinateLineSearch})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

SolverSpec make_solver(std::string_view kind, std::uint64_t seed) {
    const auto k = parse_solver_kind(kind);
    if (!k) throw Error("unknown solver '" + std::string(kind) + "'");
    SolverSpec s;
    s.name = std::string(kind);
    s.kind = *k;
    s.seed = stable_hash({seed, 0x501eULL, fnv1a(s.name)});
    s.step = *k == SolverKind::CoordinateLineSearch ? 0.0 : 1.0;
    return s;
}

std::vector<SolverSpec> default_solvers(std::uint64_t seed) {
    std::vector<SolverSpec> out;
    for (auto k : {SolverKind::CoordinateLineSearch, SolverKind::NelderMead, SolverKind::OnePlusOneEs,
                   SolverKind::RandomSearch})
        out.push_back(make_solver(to_string(k), seed));
    return out;
}

namespace {

using Eigen::VectorXd;

class BudgetedObjective {
public:
    BudgetedObjective(const bbob::ProblemInstance& inst, int max_budget, std::span<const int> checkpoints)
        : inst_(inst), max_budget_(max_budget), checkpoints_(checkpoints.begin(), checkpoints.end()) {}

    bool exhausted() const { return count_ >= max_budget_; }

    /// Objective value; +inf once the budget is spent.
    double operator()(const VectorXd& x) {
        if (exhausted()) return std::numeric_limits<double>::infinity();
        const double f = bbob::evaluate(inst_, x);
        ++count_;
        best_ = std::min(best_, f - inst_.f_opt);
        while (next_ < checkpoints_.size() && checkpoints_[next_] == count_) {
            recorded_.push_back(best_);
            ++next_;
        }
        return f;
    }

    const std::vector<double>& recorded() const { return recorded_; }

private:
    const bbob::ProblemInstance& inst_;
    int max_budget_;
    std::vector<int> checkpoints_;
    std::size_t next_ = 0;
    int count_ = 0;
    double best_ = std::numeric_limits<double>::infinity();
    std::vector<double> recorded_;
};

VectorXd random_point(Rng& rng, int dim) {
    VectorXd x(dim);
    for (auto& v : x) v = rng.uniform(bbob::kDomainLower, bbob::kDomainUpper);
    return x;
}

void random_search(BudgetedObjective& f, Rng& rng, int dim) {
    while (!f.exhausted()) f(random_point(rng, dim));
}

// (1+1)-ES with the one-fifth success rule: sigma grows by exp(1/3) on
// success and shrinks by exp(-1/12) on failure. Restarts once sigma collapses.
void one_plus_one_es(BudgetedObjective& f, Rng& rng, int dim, double step) {
    while (!f.exhausted()) {
        VectorXd x = random_point(rng, dim);
        double fx = f(x);
        double sigma = step;
        while (!f.exhausted() && sigma > 1e-12) {
            VectorXd y = x;
            for (auto& v : y) v += sigma * rng.normal();
            const double fy = f(y);
            if (fy <= fx) {
                x = std::move(y);
                fx = fy;
                sigma *= std::exp(1.0 / 3.0);
            } else {
                sigma *= std::exp(-1.0 / 12.0);
            }
        }
    }
}

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 0.5,
// shrink 0.5), restarted from a random point when the simplex collapses.
void nelder_mead(BudgetedObjective& f, Rng& rng, int dim, double scale) {
    while (!f.exhausted()) {
        std::vector<VectorXd> simplex;
        std::vector<double> values;
        const VectorXd start = random_point(rng, dim);
        simplex.push_back(start);
        for (int i = 0; i < dim; ++i) {
            VectorXd v = start;
            v[i] += scale;
            simplex.push_back(v);
        }
        for (const auto& v : simplex) values.push_back(f(v));

        while (!f.exhausted()) {
            std::vector<int> order(dim + 1);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
            const int best = order.front(), worst = order.back(), second = order[dim - 1];

            double diameter = 0.0;
            for (const auto& v : simplex) diameter = std::max(diameter, (v - simplex[best]).lpNorm<Eigen::Infinity>());
            if (diameter < 1e-10 || values[worst] - values[best] < 1e-14 * (1.0 + std::abs(values[best]))) break;

            VectorXd centroid = VectorXd::Zero(dim);
            for (int i = 0; i <= dim; ++i)
                if (i != worst) centroid += simplex[i];
            centroid /= dim;

            const VectorXd reflected = centroid + (centroid - simplex[worst]);
            const double fr = f(reflected);
            if (fr < values[best]) {
                const VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
                const double fe = f(expanded);
                if (fe < fr) {
                    simplex[worst] = expanded;
                    values[worst] = fe;
                } else {
                    simplex[worst] = reflected;
                    values[worst] = fr;
                }
                continue;
            }
            if (fr < values[second]) {
                simplex[worst] = reflected;
                values[worst] = fr;
                continue;
            }
            const bool outside = fr < values[worst];
            const VectorXd contracted = outside ? VectorXd(centroid + 0.5 * (reflected - centroid))
                                                : VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
            const double fc = f(contracted);
            if (fc < (outside ? fr : values[worst])) {
                simplex[worst] = contracted;
                values[worst] = fc;
                continue;
            }
            for (int i = 0; i <= dim; ++i) {
                if (i == best) continue;
                simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
                values[i] = f(simplex[i]);
            }
        }
    }
}

// Cyclic coordinate search with golden-section line searches. The bracket
// around the incumbent halves after every sweep and resets once it is tiny.
void coordinate_line_search(BudgetedObjective& f, Rng& rng, int dim, double initial_width) {
    constexpr double kGolden = 0.6180339887498949;
    constexpr int kLineEvaluations = 12;
    const double full = bbob::kDomainUpper - bbob::kDomainLower;
    const double width0 = initial_width > 0.0 ? initial_width : full;

    VectorXd x = random_point(rng, dim);
    double fx = f(x);
    double width = width0;
    while (!f.exhausted()) {
        for (int i = 0; i < dim && !f.exhausted(); ++i) {
            double a = std::max(bbob::kDomainLower, x[i] - 0.5 * width);
            double b = std::min(bbob::kDomainUpper, x[i] + 0.5 * width);
            VectorXd probe = x;
            auto at = [&](double t) {
                probe[i] = t;
                const double v = f(probe);
                if (v < fx) {
                    fx = v;
                    x[i] = t;
                }
                return v;
            };
            double c = b - kGolden * (b - a), d = a + kGolden * (b - a);
            double fc = at(c), fd = at(d);
            for (int k = 2; k < kLineEvaluations && !f.exhausted(); ++k) {
                if (fc < fd) {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - kGolden * (b - a);
                    fc = at(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + kGolden * (b - a);
                    fd = at(d);
                }
            }
        }
        width *= 0.5;
        if (width < 1e-9) width = width0;
    }
}

}  // namespace

std::vector<PerformanceRecord> run_solver(const SolverSpec& spec, const bbob::ProblemInstance& inst, int max_budget,
                                          std::span<const int> checkpoints) {
    if (max_budget < 1) throw Error("budget must be positive");
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] < 1 || checkpoints[i] > max_budget || (i > 0 && checkpoints[i] < checkpoints[i - 1]))
            throw Error("checkpoints must be sorted and within 1..max_budget");
    }
    BudgetedObjective f(inst, max_budget, checkpoints);
    Rng rng(stable_hash({spec.seed, std::uint64_t(inst.fid), std::uint64_t(inst.iid), std::uint64_t(inst.dim)}));
    switch (spec.kind) {
    case SolverKind::RandomSearch: random_search(f, rng, inst.dim); break;
    case SolverKind::OnePlusOneEs: one_plus_one_es(f, rng, inst.dim, spec.step); break;
    case SolverKind::NelderMead: nelder_mead(f, rng, inst.dim, spec.step); break;
    case SolverKind::CoordinateLineSearch: coordinate_line_search(f, rng, inst.dim, spec.step); break;
    }

    std::vector<PerformanceRecord> out;
    for (std::size_t i = 0; i < checkpoints.size(); ++i)
        out.push_back({spec.name, inst.fid, inst.iid, inst.dim, checkpoints[i], f.recorded()[i]});
    return out;
}

namespace {

bool record_less(const PerformanceRecord& a, const PerformanceRecord& b) {
    return std::tie(a.algorithm, a.fid, a.iid, a.dim, a.budget) < std::tie(b.algorithm, b.fid, b.iid, b.dim, b.budget);
}

}  // namespace

std::vector<PerformanceRecord> generate_table(const std::vector<SolverSpec>& solvers,
                                              const std::vector<bbob::ProblemInstance>& instances,
                                              std::span<const int> budgets, unsigned jobs) {
    std::vector<int> checkpoints(budgets.begin(), budgets.end());
    std::sort(checkpoints.begin(), checkpoints.end());
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
    if (checkpoints.empty()) throw Error("no budgets requested");

    std::vector<std::vector<PerformanceRecord>> runs(solvers.size() * instances.size());
    parallel_for(runs.size(), jobs, [&](std::size_t i) {
        runs[i] = run_solver(solvers[i / instances.size()], instances[i % instances.size()], checkpoints.back(),
                             checkpoints);
    });
    std::vector<PerformanceRecord> out;
    for (auto& r : runs) out.insert(out.end(), r.begin(), r.end());
    std::sort(out.begin(), out.end(), record_less);
    return out;
}

IngestResult ingest_performance(std::istream& in) {
    IngestResult result;
    std::map<std::tuple<std::string, int, int, int, int>, PerformanceRecord> by_key;
    std::map<std::tuple<std::string, int, int, int, int>, int> first_line;
    std::vector<std::string> malformed;

    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        line = csv::trim(line);
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            if (line != kPerformanceHeader) {
                malformed.push_back("line " + std::to_string(line_no) + ": expected header '" +
                                    std::string(kPerformanceHeader) + "'");
                break;
            }
            continue;
        }
        const auto fields = csv::split(line);
        if (fields.size() != 6) {
            malformed.push_back("line " + std::to_string(line_no) + ": expected 6 fields, got " +
                                std::to_string(fields.size()));
            continue;
        }
        PerformanceRecord r;
        r.algorithm = fields[0];
        const auto fid = csv::parse_int(fields[1]);
        const auto iid = csv::parse_int(fields[2]);
        const auto dim = csv::parse_int(fields[3]);
        const auto budget = csv::parse_int(fields[4]);
        const auto precision = csv::parse_double(fields[5]);
        if (r.algorithm.empty() || !fid || !iid || !dim || !budget || !precision) {
            malformed.push_back("line " + std::to_string(line_no) + ": cannot parse '" + line + "'");
            continue;
        }
        r.fid = *fid;
        r.iid = *iid;
        r.dim = *dim;
        r.budget = *budget;
        r.precision = *precision;
        if (!std::isfinite(r.precision) || r.precision < 0.0) {
            result.rejected.push_back("line " + std::to_string(line_no) + ": precision " + fields[5] +
                                      " is not a finite non-negative number");
            continue;
        }
        const auto key = std::make_tuple(r.algorithm, r.fid, r.iid, r.dim, r.budget);
        if (by_key.contains(key))
            result.warnings.push_back("line " + std::to_string(line_no) + ": duplicate of line " +
                                      std::to_string(first_line[key]) + ", keeping the later row");
        else
            first_line[key] = line_no;
        by_key[key] = r;
    }
    if (!malformed.empty()) {
        std::string msg = "malformed performance CSV:";
        for (const auto& m : malformed) msg += "\n  " + m;
        throw ParseError(msg);
    }
    for (auto& [_, r] : by_key) result.records.push_back(std::move(r));
    std::sort(result.records.begin(), result.records.end(), record_less);
    return result;
}

IngestResult ingest_performance(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingInput("cannot open performance CSV " + path.string());
    return ingest_performance(in);
}

}  // namespace landsel::portfolio
