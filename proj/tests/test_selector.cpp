#include "landsel/common.hpp"
#include "landsel/selector.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace landsel;
using namespace landsel::selector;
using pipeline::TargetMode;

namespace {

const std::vector<std::string> kAlgorithms{"alpha", "beta", "gamma"};

// One CvPredictions set per algorithm and mode, built from fn(algorithm, instance).
template <typename Fn>
std::vector<pipeline::CvPredictions> predictions_from(const std::string& model, int fids, Fn fn) {
    std::vector<pipeline::CvPredictions> out;
    for (const auto& a : kAlgorithms)
        for (auto mode : {TargetMode::Unscaled, TargetMode::Log10}) {
            pipeline::CvPredictions cv;
            cv.model_id = model;
            cv.mode = mode;
            cv.algorithm = a;
            cv.budget = 250;
            cv.sample_size = 250;
            for (int fid = 1; fid <= fids; ++fid)
                for (int iid = 1; iid <= 5; ++iid) {
                    const double precision = fn(a, InstanceKey{fid, iid});
                    cv.predicted[{fid, iid}] = pipeline::to_target(precision, mode);
                    cv.truth[{fid, iid}] = pipeline::to_target(precision, mode);
                }
            out.push_back(cv);
        }
    return out;
}

std::vector<PerformanceRecord> perf_for(int fids) { return testing::synthetic_perf(kAlgorithms, fids, {250}, 17); }

double true_precision(const std::vector<PerformanceRecord>& perf, const std::string& a, InstanceKey k) {
    for (const auto& r : perf)
        if (r.algorithm == a && r.instance() == k) return r.precision;
    return NAN;
}

const SelectorRow& row(const Scenario& sc, const std::string& model, const std::string& approach) {
    for (const auto& r : sc.rows)
        if (r.model_id == model && r.approach == approach) return r;
    throw std::runtime_error("missing row " + model + "/" + approach);
}

}  // namespace

TEST_CASE("argmin selectors") {
    CHECK(select_unscaled({{"A", 2.0}, {"B", 0.5}, {"C", 7.0}}) == "B");
    CHECK(select_unscaled({{"C", 1.0}, {"B", 1.0}, {"A", 1.0}}) == "A");
    CHECK(select_unscaled({{"solo", 3.0}}) == "solo");
    CHECK_THROWS_AS(select_unscaled({}), EmptyPortfolio);
    CHECK(select_log({{"A", -3.0}, {"B", -1.0}}) == "A");
    CHECK(select_log({{"B", -2.0}, {"A", -2.0}}) == "A");
    const AlgorithmValues logs{{"A", -1.5}, {"B", 0.2}, {"C", -4.0}};
    AlgorithmValues raw;
    for (const auto& [a, p] : logs) raw[a] = std::pow(10.0, p);
    CHECK(select_unscaled(raw) == select_log(logs));
}

TEST_CASE("combined rule") {
    const AlgorithmValues unscaled{{"A", 5.0}, {"B", 1.0}};
    const AlgorithmValues fine{{"A", -3.0}, {"B", -1.0}};
    const AlgorithmValues coarse{{"A", 2.0}, {"B", 3.0}};
    CHECK(select_combined(unscaled, fine, {}) == "A");
    CHECK(select_combined(unscaled, coarse, {}) == "B");
    CHECK(select_combined(unscaled, fine, {0.0}) == "B");
    CHECK(select_combined(unscaled, coarse, {1e308}) == "A");
}

TEST_CASE("oracle baselines") {
    CHECK(vbs({{"A", 1e-8}, {"B", 3.0}}) == "A");
    CHECK(vbs({{"B", 1.0}, {"A", 1.0}}) == "A");
    CHECK(combined_vbs("A", "B", {{"A", 2.0}, {"B", 0.1}}) == "B");
    CHECK(combined_vbs("A", "A", {{"A", 2.0}, {"B", 0.1}}) == "A");
    CHECK(combined_vbs("B", "A", {{"A", 2.0}, {"B", 2.0}}) == "A");

    TruthTable toy{{{1, 1}, {{"A", 0.0}, {"B", 3.0}}}, {{1, 2}, {{"A", 10.0}, {"B", 3.0}}}};
    CHECK(sbs(toy, Metric::Rmse) == "B");
    // Direct formula: errors against the per-instance best (0, 3).
    CHECK(selection_quality({{{1, 1}, "A"}, {{1, 2}, "A"}}, toy).rmse == doctest::Approx(std::sqrt(49.0 / 2.0)));
    CHECK(selection_quality({{{1, 1}, "B"}, {{1, 2}, "B"}}, toy).rmse == doctest::Approx(std::sqrt(9.0 / 2.0)));
    CHECK(sbs({{{1, 1}, {{"only", 4.0}}}}, Metric::LogRmse) == "only");

    TruthTable swap{{{1, 1}, {{"A", 1e-8}, {"B", 1e-2}}}, {{1, 2}, {{"A", 100.0}, {"B", 1.0}}}};
    CHECK(sbs(swap, Metric::Rmse) == "B");
    CHECK(sbs(swap, Metric::LogRmse) == "A");
    CHECK_THROWS_AS(sbs({}, Metric::Rmse), EmptyPortfolio);

    Choices best;
    for (const auto& [k, v] : toy) best[k] = vbs(v);
    const auto q = selection_quality(best, toy);
    CHECK(q.rmse == 0.0);
    CHECK(q.log_rmse == 0.0);
}

TEST_CASE("pareto front") {
    // Nothing is <= (4, 4) in both coordinates, so it stays on the front.
    CHECK(pareto_front({{"a", 1, 5}, {"b", 5, 1}, {"c", 4, 4}}) == std::vector<bool>{true, true, true});
    CHECK(pareto_front({{"a", 1, 5}, {"b", 5, 1}, {"c", 4, 4}, {"d", 3, 3}}) ==
          std::vector<bool>{true, true, false, true});
    CHECK(pareto_front({{"x", 3, 3}}) == std::vector<bool>{true});
    CHECK(pareto_front({{"x", 3, 3}, {"y", 3, 3}}) == std::vector<bool>{true, true});
    CHECK(pareto_front({{"x", 3, 3}, {"y", 3, 4}}) == std::vector<bool>{true, false});

    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ParetoPoint> pts;
        for (int i = 0; i < 30; ++i) pts.push_back({"", static_cast<double>(rng.index(8)), static_cast<double>(rng.index(8))});
        const auto got = pareto_front(pts);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            bool dominated = false;
            for (const auto& q : pts)
                dominated |= q.rmse <= pts[i].rmse && q.log_rmse <= pts[i].log_rmse &&
                             (q.rmse < pts[i].rmse || q.log_rmse < pts[i].log_rmse);
            CHECK(got[i] == !dominated);
        }
    }
}

TEST_CASE("selection frequency") {
    std::vector<Choices> unanimous(30, Choices{{{1, 1}, "HCMA"}});
    const auto f = selection_frequency(unanimous, {"BFGS", "HCMA"});
    CHECK(f.at("HCMA").at({1, 1}) == 30);
    CHECK(f.at("BFGS").at({1, 1}) == 0);
    const auto split = selection_frequency({{{{1, 1}, "A"}}, {{{1, 1}, "B"}}}, {"A", "B"});
    CHECK(split.at("A").at({1, 1}) == 1);
    CHECK(split.at("B").at({1, 1}) == 1);
}

TEST_CASE("evaluate_selectors") {
    const auto perf = perf_for(4);

    SUBCASE("oracle predictions match the VBS") {
        auto preds = predictions_from("RM1", 4, [&](const std::string& a, InstanceKey k) { return true_precision(perf, a, k); });
        const auto report = evaluate_selectors(preds, perf);
        REQUIRE(report.scenarios.size() == 1);
        const auto& sc = report.scenarios[0];
        for (const auto& r : sc.rows) {
            if (r.approach == "baseline" && r.model_id != "VBS") continue;
            CAPTURE(r.approach);
            CHECK(r.quality.rmse == 0.0);
            CHECK(r.quality.log_rmse == 0.0);
        }
    }
    SUBCASE("constant predictions pick the alphabetically first algorithm") {
        auto preds = predictions_from("RM1", 4, [](const std::string&, InstanceKey) { return 0.5; });
        const auto sc = evaluate_selectors(preds, perf).scenarios.at(0);
        for (const auto& [k, a] : sc.models[0].choices.at(Approach::Unscaled)) CHECK(a == "alpha");
        const auto& algo = row(sc, "Algo:alpha", "baseline").quality;
        for (const char* approach : {"unscaled", "log", "combined"}) {
            CHECK(row(sc, "RM1", approach).quality.rmse == algo.rmse);
            CHECK(row(sc, "RM1", approach).quality.log_rmse == algo.log_rmse);
        }
    }
    SUBCASE("noisy predictions obey the selector laws") {
        Rng rng(8);
        std::vector<pipeline::CvPredictions> preds;
        for (const char* model : {"RM1", "RM2", "RM3"}) {
            auto p = predictions_from(model, 4, [&](const std::string& a, InstanceKey k) {
                return true_precision(perf, a, k) * std::pow(10.0, rng.uniform(-3.0, 3.0));
            });
            preds.insert(preds.end(), p.begin(), p.end());
        }
        const auto report = evaluate_selectors(preds, perf);
        const auto& sc = report.scenarios.at(0);
        CHECK(sc.models.size() == 3);
        CHECK(sc.rows.size() == 3 * 4 + 3 + kAlgorithms.size());
        CHECK(row(sc, "VBS", "baseline").quality.rmse == 0.0);
        CHECK(row(sc, "VBS", "baseline").quality.log_rmse == 0.0);
        for (const auto& md : sc.models) {
            const auto& q = md.quality;
            CHECK(q.at(Approach::CombinedVbs).rmse <= std::min(q.at(Approach::Unscaled).rmse, q.at(Approach::Log).rmse));
            CHECK(q.at(Approach::CombinedVbs).log_rmse <=
                  std::min(q.at(Approach::Unscaled).log_rmse, q.at(Approach::Log).log_rmse));
        }
        for (const auto& [approach, freq] : sc.frequency) {
            std::map<InstanceKey, int> sums;
            for (const auto& [a, per_instance] : freq)
                for (const auto& [k, n] : per_instance) sums[k] += n;
            CHECK(sums.size() == 20);
            for (const auto& [k, n] : sums) CHECK(n == 3);
        }
        std::vector<ParetoPoint> pts;
        for (const auto& r : sc.rows) pts.push_back({r.model_id, r.quality.rmse, r.quality.log_rmse});
        const auto front = pareto_front(pts);
        for (std::size_t i = 0; i < sc.rows.size(); ++i) CHECK(sc.rows[i].pareto == front[i]);
        CHECK(row(sc, "VBS", "baseline").pareto);

        const auto never_log = evaluate_selectors(preds, perf, {0.0}).scenarios.at(0);
        const auto always_log = evaluate_selectors(preds, perf, {1e308}).scenarios.at(0);
        for (std::size_t m = 0; m < 3; ++m) {
            CHECK(never_log.models[m].choices.at(Approach::Combined) == never_log.models[m].choices.at(Approach::Unscaled));
            CHECK(always_log.models[m].choices.at(Approach::Combined) == always_log.models[m].choices.at(Approach::Log));
        }

        const auto sweep = threshold_sweep(preds, perf, {0.0, 0.9, 1e308});
        CHECK(sweep.size() == 9);
        CHECK(sweep[0].quality.rmse == never_log.models[0].quality.at(Approach::Unscaled).rmse);
        CHECK(sweep[1].quality.rmse == sc.models[0].quality.at(Approach::Combined).rmse);
        CHECK(sweep[2].quality.log_rmse == always_log.models[0].quality.at(Approach::Log).log_rmse);
    }
    SUBCASE("scaling predictions keeps unscaled decisions") {
        Rng rng(9);
        auto preds = predictions_from("RM1", 4, [&](const std::string&, InstanceKey) { return rng.uniform(0.1, 5.0); });
        auto scaled = preds;
        for (auto& cv : scaled)
            if (cv.mode == TargetMode::Unscaled)
                for (auto& [k, v] : cv.predicted) v *= 37.0;
        CHECK(evaluate_selectors(preds, perf).scenarios[0].models[0].choices.at(Approach::Unscaled) ==
              evaluate_selectors(scaled, perf).scenarios[0].models[0].choices.at(Approach::Unscaled));
    }
    SUBCASE("missing predictions are rejected") {
        auto preds = predictions_from("RM1", 4, [](const std::string&, InstanceKey) { return 1.0; });
        preds[2].predicted.erase({3, 3});
        CHECK_THROWS_AS(evaluate_selectors(preds, perf), IncompleteMatrix);
        auto no_log = predictions_from("RM1", 4, [](const std::string&, InstanceKey) { return 1.0; });
        std::erase_if(no_log, [](const auto& cv) { return cv.mode == TargetMode::Log10; });
        CHECK_THROWS_AS(evaluate_selectors(no_log, perf), IncompleteMatrix);
    }
    SUBCASE("truth is restricted to the modelled algorithms") {
        auto extra = perf;
        for (int fid = 1; fid <= 4; ++fid)
            for (int iid = 1; iid <= 5; ++iid) extra.push_back({"zeta", fid, iid, 5, 250, 0.0});
        auto preds = predictions_from("RM1", 4, [&](const std::string& a, InstanceKey k) { return true_precision(perf, a, k); });
        const auto sc = evaluate_selectors(preds, extra).scenarios.at(0);
        CHECK(sc.algorithms == kAlgorithms);
        CHECK(row(sc, "RM1", "unscaled").quality.rmse == 0.0);
    }
}
