#include "landsel/pipeline.hpp"

#include "landsel/common.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

namespace landsel::pipeline {

std::string_view to_string(TargetMode m) { return m == TargetMode::Unscaled ? "unscaled" : "log10"; }

std::optional<TargetMode> parse_target_mode(std::string_view s) {
    if (s == "unscaled") return TargetMode::Unscaled;
    if (s == "log10") return TargetMode::Log10;
    return std::nullopt;
}

double to_target(double precision, TargetMode mode, double clamp) {
    return mode == TargetMode::Unscaled ? precision : std::log10(std::max(precision, clamp));
}

double to_precision(double target, TargetMode mode) {
    return mode == TargetMode::Unscaled ? target : std::pow(10.0, target);
}

Eigen::MatrixXd Dataset::inputs() const {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ela::kFeatureCount));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t f = 0; f < ela::kFeatureCount; ++f) x(r, f) = rows[r].features[f];
    return x;
}

std::vector<double> Dataset::targets() const {
    std::vector<double> y;
    y.reserve(rows.size());
    for (const auto& r : rows) y.push_back(r.target);
    return y;
}

FoldAssignment make_folds(const std::vector<InstanceKey>& instances) {
    if (instances.empty()) throw IncompleteSuite("no problem instances to split into folds");
    std::set<InstanceKey> present(instances.begin(), instances.end());
    std::set<int> fids;
    for (const auto& k : present) {
        if (k.iid < 1 || k.iid > kFoldCount)
            throw IncompleteSuite("instance " + to_string(k) + " has an iid outside 1.." + std::to_string(kFoldCount));
        fids.insert(k.fid);
    }
    FoldAssignment folds;
    for (int fid : fids) {
        for (int iid = 1; iid <= kFoldCount; ++iid) {
            const InstanceKey k{fid, iid};
            if (!present.contains(k)) throw IncompleteSuite("missing problem instance " + to_string(k));
            folds.fold[k] = iid;
        }
    }
    return folds;
}

Dataset build_dataset(const std::vector<ela::FeatureVector>& features, const std::vector<PerformanceRecord>& perf,
                      const std::string& algorithm, int budget, int sample_size, TargetMode mode, double clamp) {
    std::map<InstanceKey, const ela::FeatureVector*> by_instance;
    for (const auto& fv : features)
        if (fv.sample_size == sample_size) by_instance[{fv.fid, fv.iid}] = &fv;
    std::map<InstanceKey, double> precision;
    for (const auto& r : perf)
        if (r.algorithm == algorithm && r.budget == budget) precision[r.instance()] = r.precision;

    std::vector<std::string> problems;
    for (const auto& [k, _] : by_instance)
        if (!precision.contains(k)) problems.push_back("no performance for " + to_string(k));
    for (const auto& [k, _] : precision)
        if (!by_instance.contains(k)) problems.push_back("no features for " + to_string(k));
    if (by_instance.empty() && precision.empty()) problems.push_back("no rows at all");
    if (!problems.empty()) {
        std::string msg = "cannot join features (sample size " + std::to_string(sample_size) + ") with " + algorithm +
                          " at budget " + std::to_string(budget) + ":";
        for (const auto& p : problems) msg += "\n  " + p;
        throw DataJoinError(msg);
    }

    Dataset ds;
    ds.mode = mode;
    ds.algorithm = algorithm;
    ds.budget = budget;
    ds.sample_size = sample_size;
    ds.clamp = clamp;
    for (const auto& [k, fv] : by_instance) {
        DatasetRow row;
        row.instance = k;
        row.features = fv->values;
        row.precision = precision.at(k);
        row.target = to_target(row.precision, mode, clamp);
        ds.rows.push_back(row);
    }
    return ds;
}

std::uint64_t fold_seed(std::uint64_t config_seed, int k) {
    return stable_hash({config_seed, 0xf01dULL, static_cast<std::uint64_t>(k)});
}

std::map<InstanceKey, double> predict_fold(const forest::RegressionModelConfig& config, const Dataset& ds,
                                           const FoldAssignment& folds, int k) {
    std::vector<int> train, test;
    for (std::size_t r = 0; r < ds.rows.size(); ++r)
        (folds.fold_of(ds.rows[r].instance) == k ? test : train).push_back(static_cast<int>(r));

    std::map<InstanceKey, double> out;
    if (test.empty()) return out;
    if (train.empty()) throw EmptyTrainingSet("fold " + std::to_string(k) + " leaves no training rows");

    Eigen::MatrixXd x(static_cast<Eigen::Index>(train.size()), static_cast<Eigen::Index>(ela::kFeatureCount));
    std::vector<double> y;
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto& row = ds.rows[train[i]];
        for (std::size_t f = 0; f < ela::kFeatureCount; ++f) x(i, f) = row.features[f];
        y.push_back(row.target);
    }
    forest::RegressionModelConfig fold_config = config;
    fold_config.seed = fold_seed(config.seed, k);
    const auto model = forest::fit(fold_config, x, y);
    for (int r : test) out[ds.rows[r].instance] = forest::predict(model, ds.rows[r].features);
    return out;
}

CvPredictions cross_validate(const forest::RegressionModelConfig& config, const Dataset& ds,
                             const FoldAssignment& folds) {
    CvPredictions cv;
    cv.model_id = config.id();
    cv.mode = ds.mode;
    cv.algorithm = ds.algorithm;
    cv.budget = ds.budget;
    cv.sample_size = ds.sample_size;
    for (const auto& row : ds.rows) cv.truth[row.instance] = row.target;
    for (int k = 1; k <= kFoldCount; ++k)
        for (const auto& [inst, p] : predict_fold(config, ds, folds, k)) cv.predicted[inst] = p;
    return cv;
}

double rmse(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size() || pred.empty())
        throw DimensionError("rmse needs two equally long, non-empty vectors (got " + std::to_string(pred.size()) +
                             " and " + std::to_string(truth.size()) + ")");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    return std::sqrt(s / static_cast<double>(pred.size()));
}

double log_rmse(std::span<const double> pred, std::span<const double> truth, double clamp) {
    if (pred.size() != truth.size() || pred.empty())
        throw DimensionError("log_rmse needs two equally long, non-empty vectors (got " +
                             std::to_string(pred.size()) + " and " + std::to_string(truth.size()) + ")");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = std::log10(std::max(pred[i], clamp)) - std::log10(std::max(truth[i], clamp));
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(pred.size()));
}

Quality prediction_quality(const CvPredictions& cv, double clamp) {
    std::vector<double> p, t;
    for (const auto& [k, v] : cv.predicted) {
        const auto it = cv.truth.find(k);
        if (it == cv.truth.end()) continue;
        p.push_back(to_precision(v, cv.mode));
        t.push_back(to_precision(it->second, cv.mode));
    }
    return {rmse(p, t), log_rmse(p, t, clamp)};
}

namespace {

std::optional<int> rm_number(const std::string& id) {
    if (id.size() < 3 || id.compare(0, 2, "RM") != 0) return std::nullopt;
    int n = 0;
    for (std::size_t i = 2; i < id.size(); ++i) {
        if (id[i] < '0' || id[i] > '9') return std::nullopt;
        n = n * 10 + (id[i] - '0');
    }
    return n;
}

}  // namespace

bool model_id_less(const std::string& a, const std::string& b) {
    const auto na = rm_number(a), nb = rm_number(b);
    if (na && nb) return *na < *nb;
    if (na != nb) return na.has_value();
    return a < b;
}

std::vector<RegressionSummary> regression_report(const std::vector<CvPredictions>& all, double clamp) {
    using Key = std::tuple<std::string, int, int, int>;
    std::map<Key, std::vector<const CvPredictions*>> groups;
    std::set<std::string, decltype(&model_id_less)> models(&model_id_less);
    for (const auto& cv : all) {
        groups[{cv.algorithm, cv.budget, cv.sample_size, static_cast<int>(cv.mode)}].push_back(&cv);
        models.insert(cv.model_id);
    }

    std::vector<RegressionSummary> out;
    for (auto& [key, members] : groups) {
        RegressionSummary row;
        row.algorithm = std::get<0>(key);
        row.budget = std::get<1>(key);
        row.sample_size = std::get<2>(key);
        row.mode = static_cast<TargetMode>(std::get<3>(key));
        std::sort(members.begin(), members.end(),
                  [](const auto* a, const auto* b) { return model_id_less(a->model_id, b->model_id); });

        std::size_t expected = 0;
        for (const auto* cv : members) expected = std::max(expected, cv->truth.size());
        row.incomplete = members.size() != models.size();

        bool first = true;
        for (const auto* cv : members) {
            if (cv->predicted.size() != expected || cv->predicted.empty()) {
                row.incomplete = true;
                if (cv->predicted.empty()) continue;
            }
            const Quality q = prediction_quality(*cv, clamp);
            row.models.push_back({cv->model_id, q, cv->predicted.size()});
            if (first || q.rmse < row.best_rmse) {
                row.best_rmse = q.rmse;
                row.best_rmse_model = cv->model_id;
            }
            if (first || q.log_rmse < row.best_log_rmse) {
                row.best_log_rmse = q.log_rmse;
                row.best_log_rmse_model = cv->model_id;
            }
            first = false;
        }
        out.push_back(std::move(row));
    }
    return out;
}

std::string render_best_model_table(const std::vector<RegressionSummary>& rows, TargetMode mode) {
    std::map<std::pair<int, int>, std::vector<const RegressionSummary*>> sections;
    for (const auto& r : rows)
        if (r.mode == mode) sections[{r.sample_size, r.budget}].push_back(&r);

    std::ostringstream os;
    for (const auto& [key, members] : sections) {
        os << "# target_mode=" << to_string(mode) << " sample_size=" << key.first << " budget=" << key.second << '\n';
        os << "algorithm,RMSE,model,logRMSE,model\n";
        for (const auto* r : members) {
            os << r->algorithm << ',' << format17(r->best_rmse) << ',' << r->best_rmse_model << ','
               << format17(r->best_log_rmse) << ',' << r->best_log_rmse_model;
            if (r->incomplete) os << ",incomplete";
            os << '\n';
        }
    }
    return os.str();
}

}  // namespace landsel::pipeline
