#include "landsel/common.hpp"
#include "landsel/forest.hpp"
#include "landsel/pipeline.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace landsel;
using pipeline::TargetMode;

namespace {

std::vector<InstanceKey> suite(int fids) {
    std::vector<InstanceKey> keys;
    for (int fid = 1; fid <= fids; ++fid)
        for (int iid = 1; iid <= 5; ++iid) keys.push_back({fid, iid});
    return keys;
}

pipeline::CvPredictions toy_cv(const std::string& model, std::vector<double> pred, std::vector<double> truth) {
    pipeline::CvPredictions cv;
    cv.model_id = model;
    cv.algorithm = "A";
    cv.budget = 250;
    cv.sample_size = 250;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        cv.predicted[{1, static_cast<int>(i) + 1}] = pred[i];
        cv.truth[{1, static_cast<int>(i) + 1}] = truth[i];
    }
    return cv;
}

const forest::RegressionModelConfig& rm(int index) {
    static const auto configs = forest::enumerate_configs(42);
    return configs.at(static_cast<std::size_t>(index - 1));
}

}  // namespace

TEST_CASE("folds hold one instance of every function") {
    const auto folds = pipeline::make_folds(suite(24));
    CHECK(folds.fold.size() == 120);
    std::map<int, int> sizes;
    for (const auto& [k, f] : folds.fold) {
        CHECK(f == k.iid);
        ++sizes[f];
    }
    CHECK(sizes.size() == 5);
    for (const auto& [f, n] : sizes) CHECK(n == 24);
    CHECK(folds.fold_of({7, 3}) == 3);

    auto missing = suite(24);
    missing.pop_back();
    try {
        pipeline::make_folds(missing);
        FAIL("expected IncompleteSuite");
    } catch (const IncompleteSuite& e) {
        CHECK(std::string(e.what()).find("fid=24, iid=5") != std::string::npos);
    }
    CHECK_THROWS_AS(pipeline::make_folds({}), IncompleteSuite);
    CHECK_THROWS_AS(pipeline::make_folds({{1, 6}}), IncompleteSuite);
}

TEST_CASE("target transforms") {
    CHECK(pipeline::to_target(1e-8, TargetMode::Log10) == doctest::Approx(-8.0).epsilon(1e-15));
    CHECK(pipeline::to_target(0.0, TargetMode::Log10) == -12.0);
    CHECK(pipeline::to_target(73.18, TargetMode::Unscaled) == 73.18);
    CHECK(pipeline::to_precision(-3.0, TargetMode::Log10) == doctest::Approx(1e-3));
    CHECK(pipeline::to_precision(5.5, TargetMode::Unscaled) == 5.5);
    CHECK(pipeline::parse_target_mode("log10") == TargetMode::Log10);
    CHECK(pipeline::parse_target_mode(pipeline::to_string(TargetMode::Unscaled)) == TargetMode::Unscaled);
    CHECK_FALSE(pipeline::parse_target_mode("log2"));
}

TEST_CASE("dataset assembly") {
    const auto features = testing::synthetic_features(2, 250, 1);
    auto perf = testing::synthetic_perf({"A", "B"}, 2, {250, 500}, 2);
    for (auto& r : perf)
        if (r.algorithm == "A" && r.budget == 250 && r.fid == 1) r.precision = r.iid == 1 ? 1e-8 : r.iid == 2 ? 0.0 : 73.18;

    const auto log_ds = pipeline::build_dataset(features, perf, "A", 250, 250, TargetMode::Log10);
    CHECK(log_ds.rows.size() == 10);
    CHECK(log_ds.rows[0].target == doctest::Approx(-8.0).epsilon(1e-15));
    CHECK(log_ds.rows[1].target == -12.0);
    CHECK(log_ds.rows[1].precision == 0.0);
    const auto raw = pipeline::build_dataset(features, perf, "A", 250, 250, TargetMode::Unscaled);
    CHECK(raw.rows[2].target == 73.18);
    CHECK(raw.inputs().rows() == 10);
    CHECK(raw.inputs().cols() == 56);
    CHECK(raw.inputs()(3, 7) == features[3].values[7]);

    auto short_perf = perf;
    short_perf.erase(std::remove_if(short_perf.begin(), short_perf.end(),
                                    [](const auto& r) { return r.fid == 2 && r.iid == 4; }),
                     short_perf.end());
    try {
        pipeline::build_dataset(features, short_perf, "A", 250, 250, TargetMode::Unscaled);
        FAIL("expected DataJoinError");
    } catch (const DataJoinError& e) {
        CHECK(std::string(e.what()).find("fid=2, iid=4") != std::string::npos);
    }
    CHECK_THROWS_AS(pipeline::build_dataset(features, perf, "A", 250, 2000, TargetMode::Unscaled), DataJoinError);
    CHECK_THROWS_AS(pipeline::build_dataset(features, perf, "Z", 250, 250, TargetMode::Unscaled), DataJoinError);
}

TEST_CASE("cross-validation") {
    const auto features = testing::synthetic_features(24, 250, 3);
    auto perf = testing::synthetic_perf({"A"}, 24, {250}, 4);
    const auto folds = pipeline::make_folds(suite(24));

    SUBCASE("covers every instance exactly once") {
        const auto ds = pipeline::build_dataset(features, perf, "A", 250, 250, TargetMode::Log10);
        std::map<InstanceKey, int> seen;
        for (int k = 1; k <= 5; ++k)
            for (const auto& [inst, p] : pipeline::predict_fold(rm(8), ds, folds, k)) {
                CHECK(inst.iid == k);
                ++seen[inst];
            }
        CHECK(seen.size() == 120);
        for (const auto& [inst, n] : seen) CHECK(n == 1);
        const auto cv = pipeline::cross_validate(rm(8), ds, folds);
        CHECK(cv.predicted.size() == 120);
        CHECK(cv.truth.size() == 120);
        CHECK(cv.model_id == "RM8");
    }
    SUBCASE("constant targets") {
        for (auto& r : perf) r.precision = 2.5;
        const auto ds = pipeline::build_dataset(features, perf, "A", 250, 250, TargetMode::Unscaled);
        const auto cv = pipeline::cross_validate(rm(20), ds, folds);
        for (const auto& [k, p] : cv.predicted) CHECK(p == 2.5);
        CHECK(pipeline::prediction_quality(cv).rmse == 0.0);
    }
    SUBCASE("held-out targets are never read") {
        const auto ds = pipeline::build_dataset(features, perf, "A", 250, 250, TargetMode::Unscaled);
        for (int k = 1; k <= 5; ++k) {
            auto probe = ds;
            for (auto& row : probe.rows)
                if (row.instance.iid == k) row.target = 1e9 + row.instance.fid;
            for (int m : {1, 9, 27}) CHECK(pipeline::predict_fold(rm(m), probe, folds, k) == pipeline::predict_fold(rm(m), ds, folds, k));
        }
    }
    SUBCASE("a target-revealing feature gives no out-of-fold advantage") {
        // Feature 0 is the target itself, so in-sample fits are near perfect;
        // held-out instances of a function share no target with training rows.
        auto ds = pipeline::build_dataset(features, perf, "A", 250, 250, TargetMode::Log10);
        for (auto& row : ds.rows) row.features[0] = row.target;
        const auto cv = pipeline::cross_validate(rm(1), ds, folds);
        const auto in_sample = forest::fit(rm(1), ds.inputs(), ds.targets());
        double in_err = 0.0, out_err = 0.0;
        for (const auto& row : ds.rows) {
            in_err += std::pow(forest::predict(in_sample, row.features) - row.target, 2);
            out_err += std::pow(cv.predicted.at(row.instance) - row.target, 2);
        }
        CHECK(out_err > 0.0);
        CHECK(in_err < out_err);
    }
    SUBCASE("removing an instance leaves its own fold's model unchanged") {
        const auto ds = pipeline::build_dataset(features, perf, "A", 250, 250, TargetMode::Log10);
        auto reduced = ds;
        reduced.rows.erase(std::find_if(reduced.rows.begin(), reduced.rows.end(),
                                        [](const auto& r) { return r.instance == InstanceKey{5, 2}; }));
        auto expected = pipeline::predict_fold(rm(14), ds, folds, 2);
        expected.erase({5, 2});
        CHECK(pipeline::predict_fold(rm(14), reduced, folds, 2) == expected);
    }
    SUBCASE("fold order does not matter") {
        const auto ds = pipeline::build_dataset(features, perf, "A", 250, 250, TargetMode::Unscaled);
        std::map<InstanceKey, double> backwards;
        for (int k = 5; k >= 1; --k)
            for (const auto& [inst, p] : pipeline::predict_fold(rm(25), ds, folds, k)) backwards[inst] = p;
        CHECK(backwards == pipeline::cross_validate(rm(25), ds, folds).predicted);
        CHECK(pipeline::fold_seed(rm(25).seed, 1) != pipeline::fold_seed(rm(25).seed, 2));
    }
}

TEST_CASE("metric oracles") {
    std::vector<double> p0{0, 0}, t0{3, 4};
    CHECK(pipeline::rmse(p0, t0) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
    std::vector<double> a{1e-2}, b{1e-8};
    CHECK(std::abs(pipeline::log_rmse(a, b) - 6.0) <= 1e-12);
    CHECK(pipeline::rmse(t0, t0) == 0.0);
    CHECK(pipeline::log_rmse(t0, t0) == 0.0);

    Rng rng(1000);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.index(100);
        std::vector<double> p(n), t(n);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = std::pow(10.0, rng.uniform(-14.0, 5.0)) * (rng.uniform() < 0.05 ? 0.0 : 1.0);
            t[i] = std::pow(10.0, rng.uniform(-14.0, 5.0));
        }
        long double se = 0, sl = 0;
        for (std::size_t i = 0; i < n; ++i) {
            se += (static_cast<long double>(p[i]) - t[i]) * (static_cast<long double>(p[i]) - t[i]);
            const long double d = std::log10(std::max<long double>(p[i], 1e-12L)) - std::log10(std::max<long double>(t[i], 1e-12L));
            sl += d * d;
        }
        const double r = static_cast<double>(std::sqrt(se / n)), l = static_cast<double>(std::sqrt(sl / n));
        worst = std::max(worst, std::abs(pipeline::rmse(p, t) - r) / std::max(1.0, r));
        worst = std::max(worst, std::abs(pipeline::log_rmse(p, t) - l));
    }
    CHECK(worst <= 1e-9);

    for (double x : {-11.0, -3.5, 0.0, 2.25})
        for (double y : {-8.0, 1.0, 4.0}) {
            std::vector<double> px{std::pow(10.0, x)}, py{std::pow(10.0, y)};
            CHECK(pipeline::log_rmse(px, py) == doctest::Approx(std::abs(x - y)).epsilon(1e-12));
        }

    std::vector<double> p{1, 5, 2, 8}, t{2, 2, 9, 1};
    const double r = pipeline::rmse(p, t);
    std::swap(p[0], p[3]);
    std::swap(t[0], t[3]);
    CHECK(pipeline::rmse(p, t) == doctest::Approx(r).epsilon(1e-15));

    CHECK_THROWS_AS(pipeline::rmse(std::vector<double>{1}, std::vector<double>{1, 2}), DimensionError);
    CHECK_THROWS_AS(pipeline::log_rmse(std::vector<double>{}, std::vector<double>{}), DimensionError);
}

TEST_CASE("prediction quality maps log predictions back") {
    auto cv = toy_cv("RM1", {-2.0, 1.0}, {-8.0, 1.0});
    cv.mode = TargetMode::Log10;
    const auto q = pipeline::prediction_quality(cv);
    CHECK(q.rmse == doctest::Approx(std::sqrt(std::pow(1e-2 - 1e-8, 2) / 2.0)));
    CHECK(q.log_rmse == doctest::Approx(std::sqrt(36.0 / 2.0)));
}

TEST_CASE("regression report") {
    SUBCASE("single model is best") {
        const auto rows = pipeline::regression_report({toy_cv("RM3", {1, 2}, {1, 3})});
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].best_rmse_model == "RM3");
        CHECK(rows[0].best_log_rmse_model == "RM3");
        CHECK_FALSE(rows[0].incomplete);
    }
    SUBCASE("ties go to the lowest id") {
        const auto rows = pipeline::regression_report(
            {toy_cv("RM10", {1, 2}, {1, 3}), toy_cv("RM2", {1, 2}, {1, 3}), toy_cv("RM11", {1, 5}, {1, 3})});
        CHECK(rows[0].best_rmse_model == "RM2");
        CHECK(rows[0].best_log_rmse_model == "RM2");
        REQUIRE(rows[0].models.size() == 3);
        CHECK(rows[0].models[0].model_id == "RM2");
        CHECK(rows[0].models[1].model_id == "RM10");
        CHECK(pipeline::model_id_less("RM9", "RM10"));
        CHECK_FALSE(pipeline::model_id_less("RM10", "RM9"));
    }
    SUBCASE("incomplete groups are flagged") {
        auto other = toy_cv("RM1", {1, 2}, {1, 3});
        other.algorithm = "B";
        auto partial = toy_cv("RM2", {1, 2}, {1, 3});
        partial.predicted.erase(partial.predicted.begin());
        const auto rows = pipeline::regression_report({toy_cv("RM1", {1, 2}, {1, 3}), partial, other});
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].incomplete);
        CHECK(rows[1].incomplete);
    }
    SUBCASE("table layout") {
        const auto rows = pipeline::regression_report({toy_cv("RM1", {1, 2}, {1, 3}), toy_cv("RM2", {1e-3, 3}, {1e-3, 3})});
        const auto text = pipeline::render_best_model_table(rows, TargetMode::Unscaled);
        CHECK(text ==
              "# target_mode=unscaled sample_size=250 budget=250\n"
              "algorithm,RMSE,model,logRMSE,model\n"
              "A,0,RM2,0,RM2\n");
        CHECK(pipeline::render_best_model_table(rows, TargetMode::Log10).empty());
    }
}
