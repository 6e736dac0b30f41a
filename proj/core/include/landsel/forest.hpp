#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace landsel::forest {

enum class Family { DecisionTree, RandomForest, BaggingDT };
enum class Criterion { Mse, Mae, FriedmanMse };

std::string_view to_string(Family f);
std::string_view to_string(Criterion c);
std::optional<Criterion> parse_criterion(std::string_view s);

inline constexpr int kConfigCount = 30;

struct RegressionModelConfig {
    int index = 0;  // 1-based; the model is labelled "RM<index>"
    Family family = Family::DecisionTree;
    Criterion crit = Criterion::Mse;
    int minsplit = 2;
    int nest = 1;  // always 1 for DecisionTree
    std::uint64_t seed = 0;

    std::string id() const { return "RM" + std::to_string(index); }
    /// e.g. "RandomForest crit.mse minsplit.4 nest.9"
    std::string describe() const;
};

/// The 30-model grid: 6 decision trees, 12 random forests, 12 bagging
/// ensembles. Within each family ids follow the grid order
/// (crit, minsplit, nest) with crit ordered mse, mae, friedman_mse.
std::vector<RegressionModelConfig> enumerate_configs(std::uint64_t seed);

struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // x[feature] <= threshold goes left
    int left = -1;
    int right = -1;
    double value = 0.0;  // mean training target of the node
    int samples = 0;
};

struct Tree {
    std::vector<Node> nodes;  // nodes[0] is the root

    double predict(std::span<const double> x) const;
    int depth() const;
};

struct TrainedModel {
    RegressionModelConfig config;
    std::vector<Tree> trees;
    int feature_count = 0;
};

struct FitOptions {
    /// Ensembles draw each member's rows with replacement. Disabling this is a
    /// test hook: members then see the full training set.
    bool bootstrap = true;
};

/// Grows one CART tree on `rows` of (x, y). Rows may repeat.
Tree grow_tree(const Eigen::MatrixXd& x, std::span<const double> y, std::vector<int> rows, Criterion crit,
               int minsplit);

TrainedModel fit(const RegressionModelConfig& config, const Eigen::MatrixXd& x, std::span<const double> y,
                 FitOptions options = {});

/// Leaf value for a single tree, member mean for ensembles.
double predict(const TrainedModel& model, std::span<const double> x);

/// Audit dump: config plus every tree as nested node records.
std::string to_json(const TrainedModel& model);

}  // namespace landsel::forest
