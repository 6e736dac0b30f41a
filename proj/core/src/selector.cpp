#include "landsel/selector.hpp"

#include "landsel/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

namespace landsel::selector {

std::string_view to_string(Approach a) {
    switch (a) {
    case Approach::Unscaled: return "unscaled";
    case Approach::Log: return "log";
    case Approach::Combined: return "combined";
    case Approach::CombinedVbs: return "combined_vbs";
    }
    return "?";
}

namespace {

// std::map iterates alphabetically, so the first strict minimum wins ties.
std::string argmin(const AlgorithmValues& values) {
    if (values.empty()) throw EmptyPortfolio("no algorithms to choose from");
    auto best = values.begin();
    for (auto it = values.begin(); it != values.end(); ++it)
        if (it->second < best->second) best = it;
    return best->first;
}

double lookup(const AlgorithmValues& values, const std::string& algorithm, const InstanceKey& k) {
    const auto it = values.find(algorithm);
    if (it == values.end()) throw IncompleteMatrix("no value for " + algorithm + " on " + to_string(k));
    return it->second;
}

}  // namespace

std::string select_unscaled(const AlgorithmValues& predicted) { return argmin(predicted); }

std::string select_log(const AlgorithmValues& predicted_log) { return argmin(predicted_log); }

std::string select_combined(const AlgorithmValues& predicted, const AlgorithmValues& predicted_log,
                            const SelectorConfig& cfg) {
    const std::string log_choice = select_log(predicted_log);
    if (std::pow(10.0, predicted_log.at(log_choice)) < cfg.threshold) return log_choice;
    return select_unscaled(predicted);
}

std::string vbs(const AlgorithmValues& truth) { return argmin(truth); }

std::string combined_vbs(const std::string& unscaled_choice, const std::string& log_choice,
                         const AlgorithmValues& truth) {
    const double u = truth.at(unscaled_choice), l = truth.at(log_choice);
    if (u < l) return unscaled_choice;
    if (l < u) return log_choice;
    return std::min(unscaled_choice, log_choice);
}

pipeline::Quality selection_quality(const Choices& choices, const TruthTable& truth, double clamp) {
    std::vector<double> chosen, best;
    for (const auto& [k, algorithm] : choices) {
        const auto it = truth.find(k);
        if (it == truth.end()) throw IncompleteMatrix("no true precisions for " + to_string(k));
        chosen.push_back(lookup(it->second, algorithm, k));
        best.push_back(it->second.at(vbs(it->second)));
    }
    return {pipeline::rmse(chosen, best), pipeline::log_rmse(chosen, best, clamp)};
}

std::string sbs(const TruthTable& truth, Metric metric, double clamp) {
    if (truth.empty()) throw EmptyPortfolio("no instances to rank algorithms on");
    const AlgorithmValues& first = truth.begin()->second;
    if (first.empty()) throw EmptyPortfolio("no algorithms to choose from");
    AlgorithmValues score;
    for (const auto& [algorithm, _] : first) {
        Choices constant;
        for (const auto& [k, __] : truth) constant[k] = algorithm;
        const auto q = selection_quality(constant, truth, clamp);
        score[algorithm] = metric == Metric::Rmse ? q.rmse : q.log_rmse;
    }
    return argmin(score);
}

std::vector<bool> pareto_front(const std::vector<ParetoPoint>& points) {
    std::vector<bool> on_front(points.size(), true);
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = 0; j < points.size() && on_front[i]; ++j) {
            if (i == j) continue;
            const auto& a = points[j];
            const auto& b = points[i];
            const bool weakly = a.rmse <= b.rmse && a.log_rmse <= b.log_rmse;
            const bool strictly = a.rmse < b.rmse || a.log_rmse < b.log_rmse;
            if (weakly && strictly) on_front[i] = false;
        }
    }
    return on_front;
}

Frequency selection_frequency(const std::vector<Choices>& decisions, const std::vector<std::string>& algorithms) {
    Frequency freq;
    std::set<InstanceKey> instances;
    for (const auto& d : decisions)
        for (const auto& [k, _] : d) instances.insert(k);
    for (const auto& a : algorithms)
        for (const auto& k : instances) freq[a][k] = 0;
    for (const auto& d : decisions)
        for (const auto& [k, a] : d) ++freq[a][k];
    return freq;
}

TruthTable truth_table(const std::vector<PerformanceRecord>& perf, int budget) {
    TruthTable t;
    for (const auto& r : perf)
        if (r.budget == budget) t[r.instance()][r.algorithm] = r.precision;
    return t;
}

namespace {

struct ScenarioPredictions {
    // model -> mode -> instance -> algorithm -> value
    std::map<std::string, std::map<pipeline::TargetMode, std::map<InstanceKey, AlgorithmValues>>> by_model;
    std::set<std::string> algorithms;
};

using ScenarioKey = std::pair<int, int>;  // (budget, sample size)

// Truth restricted to the algorithms that were actually modelled.
TruthTable portfolio_truth(const std::vector<PerformanceRecord>& perf, int budget,
                           const std::set<std::string>& algorithms) {
    TruthTable t;
    for (const auto& r : perf)
        if (r.budget == budget && algorithms.contains(r.algorithm)) t[r.instance()][r.algorithm] = r.precision;
    return t;
}

std::map<ScenarioKey, ScenarioPredictions> group(const std::vector<pipeline::CvPredictions>& predictions) {
    std::map<ScenarioKey, ScenarioPredictions> out;
    for (const auto& cv : predictions) {
        auto& sc = out[{cv.budget, cv.sample_size}];
        sc.algorithms.insert(cv.algorithm);
        auto& table = sc.by_model[cv.model_id][cv.mode];
        for (const auto& [k, v] : cv.predicted) table[k][cv.algorithm] = v;
    }
    return out;
}

void check_complete(const std::map<InstanceKey, AlgorithmValues>& table, const TruthTable& truth,
                    const std::set<std::string>& algorithms, const std::string& what) {
    if (table.size() != truth.size())
        throw IncompleteMatrix(what + ": predictions cover " + std::to_string(table.size()) + " instances, truth covers " +
                               std::to_string(truth.size()));
    for (const auto& [k, values] : truth) {
        const auto it = table.find(k);
        if (it == table.end()) throw IncompleteMatrix(what + ": no predictions for " + to_string(k));
        for (const auto& a : algorithms) {
            if (!it->second.contains(a)) throw IncompleteMatrix(what + ": no prediction for " + a + " on " + to_string(k));
            if (!values.contains(a)) throw IncompleteMatrix("no true precision for " + a + " on " + to_string(k));
        }
    }
}

const std::map<InstanceKey, AlgorithmValues>& mode_table(
    const std::map<pipeline::TargetMode, std::map<InstanceKey, AlgorithmValues>>& modes, pipeline::TargetMode m,
    const std::string& model) {
    const auto it = modes.find(m);
    if (it == modes.end())
        throw IncompleteMatrix("model " + model + " has no " + std::string(pipeline::to_string(m)) + " predictions");
    return it->second;
}

}  // namespace

SelectorReport evaluate_selectors(const std::vector<pipeline::CvPredictions>& predictions,
                                  const std::vector<PerformanceRecord>& perf, const SelectorConfig& cfg,
                                  double clamp) {
    SelectorReport report;
    report.config = cfg;
    report.clamp = clamp;

    for (auto& [key, sp] : group(predictions)) {
        Scenario sc;
        sc.budget = key.first;
        sc.sample_size = key.second;
        sc.algorithms.assign(sp.algorithms.begin(), sp.algorithms.end());

        const TruthTable truth = portfolio_truth(perf, sc.budget, sp.algorithms);
        if (truth.empty()) throw IncompleteMatrix("no true precisions at budget " + std::to_string(sc.budget));

        for (const auto& [k, values] : truth) sc.vbs_choices[k] = vbs(values);
        sc.sbs_rmse = sbs(truth, Metric::Rmse, clamp);
        sc.sbs_log = sbs(truth, Metric::LogRmse, clamp);

        std::vector<std::string> model_ids;
        for (const auto& [id, _] : sp.by_model) model_ids.push_back(id);
        std::sort(model_ids.begin(), model_ids.end(), pipeline::model_id_less);

        for (const auto& id : model_ids) {
            const auto& modes = sp.by_model.at(id);
            const auto& unscaled = mode_table(modes, pipeline::TargetMode::Unscaled, id);
            const auto& logp = mode_table(modes, pipeline::TargetMode::Log10, id);
            check_complete(unscaled, truth, sp.algorithms, "model " + id + " (unscaled)");
            check_complete(logp, truth, sp.algorithms, "model " + id + " (log10)");

            ModelDecisions md;
            md.model_id = id;
            for (const auto& [k, values] : truth) {
                const std::string u = select_unscaled(unscaled.at(k));
                const std::string l = select_log(logp.at(k));
                md.choices[Approach::Unscaled][k] = u;
                md.choices[Approach::Log][k] = l;
                md.choices[Approach::Combined][k] = select_combined(unscaled.at(k), logp.at(k), cfg);
                md.choices[Approach::CombinedVbs][k] = combined_vbs(u, l, values);
            }
            for (auto a : kApproaches) {
                md.quality[a] = selection_quality(md.choices[a], truth, clamp);
                sc.rows.push_back({id, std::string(to_string(a)), sc.budget, sc.sample_size, md.quality[a], false});
            }
            sc.models.push_back(std::move(md));
        }

        auto baseline = [&](const std::string& label, const Choices& choices) {
            sc.rows.push_back({label, "baseline", sc.budget, sc.sample_size, selection_quality(choices, truth, clamp),
                               false});
        };
        baseline("VBS", sc.vbs_choices);
        for (const auto& [label, algorithm] : {std::pair<std::string, std::string>{"SBS_rmse", sc.sbs_rmse},
                                               std::pair<std::string, std::string>{"SBS_log", sc.sbs_log}}) {
            Choices constant;
            for (const auto& [k, _] : truth) constant[k] = algorithm;
            baseline(label, constant);
        }
        for (const auto& algorithm : sc.algorithms) {
            Choices constant;
            for (const auto& [k, _] : truth) constant[k] = algorithm;
            baseline("Algo:" + algorithm, constant);
        }

        std::vector<ParetoPoint> points;
        for (const auto& r : sc.rows) points.push_back({r.model_id + "/" + r.approach, r.quality.rmse, r.quality.log_rmse});
        const auto front = pareto_front(points);
        for (std::size_t i = 0; i < sc.rows.size(); ++i) sc.rows[i].pareto = front[i];

        for (auto a : {Approach::Unscaled, Approach::Log, Approach::Combined}) {
            std::vector<Choices> decisions;
            for (const auto& md : sc.models) decisions.push_back(md.choices.at(a));
            sc.frequency[a] = selection_frequency(decisions, sc.algorithms);
        }
        report.scenarios.push_back(std::move(sc));
    }
    return report;
}

std::vector<ThresholdPoint> threshold_sweep(const std::vector<pipeline::CvPredictions>& predictions,
                                            const std::vector<PerformanceRecord>& perf,
                                            const std::vector<double>& thresholds, double clamp) {
    std::vector<ThresholdPoint> out;
    for (auto& [key, sp] : group(predictions)) {
        const TruthTable truth = portfolio_truth(perf, key.first, sp.algorithms);
        std::vector<std::string> model_ids;
        for (const auto& [id, _] : sp.by_model) model_ids.push_back(id);
        std::sort(model_ids.begin(), model_ids.end(), pipeline::model_id_less);
        for (const auto& id : model_ids) {
            const auto& modes = sp.by_model.at(id);
            const auto& unscaled = mode_table(modes, pipeline::TargetMode::Unscaled, id);
            const auto& logp = mode_table(modes, pipeline::TargetMode::Log10, id);
            check_complete(unscaled, truth, sp.algorithms, "model " + id + " (unscaled)");
            check_complete(logp, truth, sp.algorithms, "model " + id + " (log10)");
            for (double t : thresholds) {
                Choices choices;
                for (const auto& [k, _] : truth) choices[k] = select_combined(unscaled.at(k), logp.at(k), {t});
                out.push_back({id, t, key.first, key.second, selection_quality(choices, truth, clamp)});
            }
        }
    }
    return out;
}

}  // namespace landsel::selector
