#include "landsel/forest.hpp"

#include "landsel/common.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace landsel::forest {

std::string_view to_string(Family f) {
    switch (f) {
    case Family::DecisionTree: return "DecisionTree";
    case Family::RandomForest: return "RandomForest";
    case Family::BaggingDT: return "BaggingDT";
    }
    return "?";
}

std::string_view to_string(Criterion c) {
    switch (c) {
    case Criterion::Mse: return "mse";
    case Criterion::Mae: return "mae";
    case Criterion::FriedmanMse: return "friedman_mse";
    }
    return "?";
}

std::optional<Criterion> parse_criterion(std::string_view s) {
    for (auto c : {Criterion::Mse, Criterion::Mae, Criterion::FriedmanMse})
        if (to_string(c) == s) return c;
    return std::nullopt;
}

std::string RegressionModelConfig::describe() const {
    std::string out = std::string(to_string(family)) + " crit." + std::string(to_string(crit)) +
                      " minsplit." + std::to_string(minsplit);
    if (family != Family::DecisionTree) out += " nest." + std::to_string(nest);
    return out;
}

std::vector<RegressionModelConfig> enumerate_configs(std::uint64_t seed) {
    std::vector<RegressionModelConfig> configs;
    auto add = [&](Family family, Criterion crit, int minsplit, int nest) {
        RegressionModelConfig c;
        c.index = static_cast<int>(configs.size()) + 1;
        c.family = family;
        c.crit = crit;
        c.minsplit = minsplit;
        c.nest = nest;
        c.seed = stable_hash({seed, static_cast<std::uint64_t>(c.index)});
        configs.push_back(c);
    };
    for (auto crit : {Criterion::Mse, Criterion::Mae, Criterion::FriedmanMse})
        for (int minsplit : {4, 5}) add(Family::DecisionTree, crit, minsplit, 1);
    for (auto family : {Family::RandomForest, Family::BaggingDT})
        for (auto crit : {Criterion::Mse, Criterion::Mae})
            for (int minsplit : {4, 5})
                for (int nest : {3, 6, 9}) add(family, crit, minsplit, nest);
    return configs;
}

namespace {

// Running sum of absolute deviations from the median, kept with two heaps:
// `lower` holds the smaller half (and the median when the count is odd).
class MedianDeviation {
public:
    void clear() {
        lower_.clear();
        upper_.clear();
        sum_lower_ = sum_upper_ = 0.0;
    }

    void push(double v) {
        if (lower_.empty() || v <= lower_.front()) {
            push_heap(lower_, v, std::less<>{});
            sum_lower_ += v;
        } else {
            push_heap(upper_, v, std::greater<>{});
            sum_upper_ += v;
        }
        if (lower_.size() > upper_.size() + 1) {
            const double m = pop_heap(lower_, std::less<>{});
            sum_lower_ -= m;
            push_heap(upper_, m, std::greater<>{});
            sum_upper_ += m;
        } else if (upper_.size() > lower_.size()) {
            const double m = pop_heap(upper_, std::greater<>{});
            sum_upper_ -= m;
            push_heap(lower_, m, std::less<>{});
            sum_lower_ += m;
        }
    }

    double value() const {
        if (lower_.empty()) return 0.0;
        const double extra = static_cast<double>(lower_.size() - upper_.size());
        return std::max(0.0, sum_upper_ - sum_lower_ + extra * lower_.front());
    }

private:
    template <typename Cmp>
    static void push_heap(std::vector<double>& h, double v, Cmp cmp) {
        h.push_back(v);
        std::push_heap(h.begin(), h.end(), cmp);
    }
    template <typename Cmp>
    static double pop_heap(std::vector<double>& h, Cmp cmp) {
        std::pop_heap(h.begin(), h.end(), cmp);
        const double v = h.back();
        h.pop_back();
        return v;
    }

    std::vector<double> lower_, upper_;
    double sum_lower_ = 0.0, sum_upper_ = 0.0;
};

struct Candidate {
    int feature;
    double threshold;
    double score;  // lower is better
};

// Samples are positions in `rows` (a bootstrap may repeat a row). Every node
// keeps its samples once per feature, presorted by that feature, so a split
// only needs a stable partition.
class Grower {
public:
    Grower(const Eigen::MatrixXd& x, std::span<const double> y, Criterion crit, int minsplit)
        : x_(x), y_(y), crit_(crit), minsplit_(std::max(2, minsplit)) {}

    Tree grow(std::vector<int> rows) {
        rows_ = std::move(rows);
        const auto m = static_cast<int>(rows_.size());
        std::vector<int> members(static_cast<std::size_t>(m));
        std::iota(members.begin(), members.end(), 0);
        std::vector<std::vector<int>> sorted(static_cast<std::size_t>(x_.cols()), members);
        for (Eigen::Index f = 0; f < x_.cols(); ++f)
            std::stable_sort(sorted[f].begin(), sorted[f].end(),
                             [&](int a, int b) { return xs(a, f) < xs(b, f); });
        goes_left_.assign(rows_.size(), 0);
        tree_.nodes.clear();
        build(std::move(members), std::move(sorted));
        return std::move(tree_);
    }

private:
    double xs(int s, Eigen::Index f) const { return x_(rows_[s], f); }
    double ys(int s) const { return y_[rows_[s]]; }

    int build(std::vector<int> members, std::vector<std::vector<int>> sorted) {
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        double sum = 0.0;
        for (int s : members) sum += ys(s);
        const double mean = sum / static_cast<double>(members.size());
        tree_.nodes[id].value = mean;
        tree_.nodes[id].samples = static_cast<int>(members.size());

        const bool pure = std::all_of(members.begin(), members.end(), [&](int s) { return ys(s) == ys(members[0]); });
        if (static_cast<int>(members.size()) < minsplit_ || pure) return id;

        const auto split = best_split(sorted, mean);
        if (!split) return id;

        for (int s : members) goes_left_[s] = xs(s, split->feature) <= split->threshold;
        auto partition = [&](const std::vector<int>& in, std::vector<int>& l, std::vector<int>& r) {
            for (int s : in) (goes_left_[s] ? l : r).push_back(s);
        };
        std::vector<int> left, right;
        partition(members, left, right);
        std::vector<std::vector<int>> sorted_left(sorted.size()), sorted_right(sorted.size());
        for (std::size_t f = 0; f < sorted.size(); ++f) {
            sorted_left[f].reserve(left.size());
            sorted_right[f].reserve(right.size());
            partition(sorted[f], sorted_left[f], sorted_right[f]);
        }
        sorted.clear();
        sorted.shrink_to_fit();

        tree_.nodes[id].feature = split->feature;
        tree_.nodes[id].threshold = split->threshold;
        const int l = build(std::move(left), std::move(sorted_left));
        const int rgt = build(std::move(right), std::move(sorted_right));
        tree_.nodes[id].left = l;
        tree_.nodes[id].right = rgt;
        return id;
    }

    std::optional<Candidate> best_split(const std::vector<std::vector<int>>& sorted, double node_mean) {
        const std::size_t n = sorted[0].size();
        std::vector<Candidate> candidates;
        std::vector<double> sorted_y(n), left_dev(n), right_dev(n);

        for (std::size_t f = 0; f < sorted.size(); ++f) {
            const auto& order = sorted[f];
            for (std::size_t i = 0; i < n; ++i) sorted_y[i] = ys(order[i]) - node_mean;

            if (crit_ == Criterion::Mae) {
                dev_.clear();
                for (std::size_t i = 0; i < n; ++i) {
                    dev_.push(sorted_y[i]);
                    left_dev[i] = dev_.value();
                }
                dev_.clear();
                for (std::size_t i = n; i-- > 0;) {
                    dev_.push(sorted_y[i]);
                    right_dev[i] = dev_.value();
                }
            }

            double sum_l = 0.0, sq_l = 0.0;
            double sum_all = 0.0, sq_all = 0.0;
            for (double v : sorted_y) {
                sum_all += v;
                sq_all += v * v;
            }
            for (std::size_t i = 0; i + 1 < n; ++i) {
                sum_l += sorted_y[i];
                sq_l += sorted_y[i] * sorted_y[i];
                const auto fi = static_cast<Eigen::Index>(f);
                const double lo = xs(order[i], fi), hi = xs(order[i + 1], fi);
                if (!(lo < hi)) continue;
                double threshold = 0.5 * (lo + hi);
                if (!(threshold < hi)) threshold = lo;

                const double nl = static_cast<double>(i + 1), nr = static_cast<double>(n - i - 1);
                const double sum_r = sum_all - sum_l, sq_r = sq_all - sq_l;
                double score = 0.0;
                switch (crit_) {
                case Criterion::Mse:
                    score = (sq_l - sum_l * sum_l / nl) + (sq_r - sum_r * sum_r / nr);
                    break;
                case Criterion::FriedmanMse: {
                    const double diff = sum_l / nl - sum_r / nr;
                    score = -(nl * nr / (nl + nr)) * diff * diff;
                    break;
                }
                case Criterion::Mae:
                    score = left_dev[i] + right_dev[i + 1];
                    break;
                }
                candidates.push_back({static_cast<int>(f), threshold, score});
            }
        }
        if (candidates.empty()) return std::nullopt;

        // Ties (up to rounding) go to the lowest feature, then lowest threshold;
        // candidates are already in that order.
        double best = std::numeric_limits<double>::infinity();
        double scale = 0.0;
        for (const auto& c : candidates) {
            best = std::min(best, c.score);
            scale = std::max(scale, std::abs(c.score));
        }
        const double tol = 1e-10 * std::max(1.0, scale);
        for (const auto& c : candidates)
            if (c.score <= best + tol) return c;
        return std::nullopt;
    }

    const Eigen::MatrixXd& x_;
    std::span<const double> y_;
    Criterion crit_;
    int minsplit_;
    std::vector<int> rows_;
    std::vector<char> goes_left_;
    MedianDeviation dev_;
    Tree tree_;
};

void validate(const Eigen::MatrixXd& x, std::span<const double> y) {
    if (x.rows() == 0 || y.empty()) throw EmptyTrainingSet("cannot fit a model on zero rows");
    if (static_cast<std::size_t>(x.rows()) != y.size())
        throw DimensionError("feature matrix has " + std::to_string(x.rows()) + " rows but target has " +
                             std::to_string(y.size()));
    if (!x.allFinite()) throw NonFiniteInput("feature matrix contains non-finite values");
    for (double v : y)
        if (!std::isfinite(v)) throw NonFiniteInput("target contains non-finite values");
}

nlohmann::json node_json(const Tree& tree, int id) {
    const Node& n = tree.nodes[id];
    nlohmann::json j{{"samples", n.samples}, {"value", n.value}};
    if (n.feature >= 0) {
        j["feature"] = n.feature;
        j["threshold"] = n.threshold;
        j["left"] = node_json(tree, n.left);
        j["right"] = node_json(tree, n.right);
    }
    return j;
}

}  // namespace

double Tree::predict(std::span<const double> x) const {
    int id = 0;
    while (nodes[id].feature >= 0) id = x[nodes[id].feature] <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
    return nodes[id].value;
}

int Tree::depth() const {
    std::function<int(int)> walk = [&](int id) -> int {
        if (nodes[id].feature < 0) return 0;
        return 1 + std::max(walk(nodes[id].left), walk(nodes[id].right));
    };
    return nodes.empty() ? 0 : walk(0);
}

Tree grow_tree(const Eigen::MatrixXd& x, std::span<const double> y, std::vector<int> rows, Criterion crit,
               int minsplit) {
    if (rows.empty()) throw EmptyTrainingSet("cannot grow a tree on zero rows");
    return Grower(x, y, crit, minsplit).grow(std::move(rows));
}

TrainedModel fit(const RegressionModelConfig& config, const Eigen::MatrixXd& x, std::span<const double> y,
                 FitOptions options) {
    validate(x, y);
    TrainedModel model;
    model.config = config;
    model.feature_count = static_cast<int>(x.cols());
    const std::size_t n = y.size();

    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);

    if (config.family == Family::DecisionTree) {
        model.trees.push_back(grow_tree(x, y, all, config.crit, config.minsplit));
        return model;
    }
    for (int m = 0; m < config.nest; ++m) {
        std::vector<int> rows = all;
        if (options.bootstrap) {
            Rng rng(config.seed + static_cast<std::uint64_t>(m));
            for (auto& r : rows) r = static_cast<int>(rng.index(n));
        }
        model.trees.push_back(grow_tree(x, y, std::move(rows), config.crit, config.minsplit));
    }
    return model;
}

double predict(const TrainedModel& model, std::span<const double> x) {
    if (static_cast<int>(x.size()) != model.feature_count)
        throw DimensionError("expected " + std::to_string(model.feature_count) + " features, got " +
                             std::to_string(x.size()));
    double sum = 0.0;
    for (const auto& t : model.trees) sum += t.predict(x);
    return sum / static_cast<double>(model.trees.size());
}

std::string to_json(const TrainedModel& model) {
    const auto& c = model.config;
    nlohmann::json j{
        {"id", c.id()},
        {"family", to_string(c.family)},
        {"crit", to_string(c.crit)},
        {"minsplit", c.minsplit},
        {"nest", c.nest},
        {"seed", c.seed},
        {"feature_count", model.feature_count},
    };
    auto& trees = j["trees"] = nlohmann::json::array();
    for (const auto& t : model.trees) trees.push_back(node_json(t, 0));
    return j.dump(2);
}

}  // namespace landsel::forest
