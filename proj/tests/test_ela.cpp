#include "landsel/bbob.hpp"
#include "landsel/common.hpp"
#include "landsel/ela.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

using namespace landsel;
using testing::feature_index;

namespace {

ela::SampleSet make_set(Eigen::MatrixXd points, Eigen::VectorXd values) {
    ela::SampleSet s;
    s.points = std::move(points);
    s.values = std::move(values);
    return s;
}

Eigen::MatrixXd uniform_points(int n, int dim, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd p(n, dim);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dim; ++j) p(i, j) = rng.uniform(-5.0, 5.0);
    return p;
}

// Brute-force mean(d_nn) / mean(d_nb), best point left out.
double nb_mean_ratio_oracle(const Eigen::MatrixXd& p, const Eigen::VectorXd& y) {
    const auto n = p.rows();
    double sum_nn = 0.0, sum_nb = 0.0;
    int count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double nn = std::numeric_limits<double>::infinity(), nb = nn;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = (p.row(i) - p.row(j)).norm();
            nn = std::min(nn, d);
            if (y[j] < y[i]) nb = std::min(nb, d);
        }
        if (!std::isfinite(nb)) continue;
        sum_nn += nn;
        sum_nb += nb;
        ++count;
    }
    return (sum_nn / count) / (sum_nb / count);
}

}  // namespace

TEST_CASE("feature roster") {
    const auto& names = ela::feature_names();
    CHECK(names.size() == 56);
    CHECK(std::set<std::string_view>(names.begin(), names.end()).size() == 56);
    CHECK(names[0] == "ela_distr.skewness");
    CHECK(names[55] == "nbc.nb_fitness.cor");
    const auto count = [&](std::string_view prefix) {
        return std::count_if(names.begin(), names.end(), [&](auto n) { return n.starts_with(prefix); });
    };
    CHECK(count("ela_distr.") == 3);
    CHECK(count("ela_level.") == 18);
    CHECK(count("ela_meta.") == 9);
    CHECK(count("disp.") == 16);
    CHECK(count("ic.") == 5);
    CHECK(count("nbc.") == 5);
}

TEST_CASE("uniform sampling") {
    const auto inst = bbob::make_instance(1, 0, 5);
    const auto a = ela::uniform_sample(inst, 250, 7);
    CHECK(a.points.rows() == 250);
    CHECK(a.points.minCoeff() >= -5.0);
    CHECK(a.points.maxCoeff() <= 5.0);
    const auto b = ela::uniform_sample(inst, 250, 7);
    CHECK(a.points == b.points);
    CHECK(a.values == b.values);
    for (int i = 0; i < 250; ++i) CHECK(a.values[i] == bbob::evaluate(inst, Eigen::VectorXd(a.points.row(i))));
    CHECK_THROWS_AS(ela::uniform_sample(inst, 6, 1), SampleSizeError);
    CHECK_NOTHROW(ela::uniform_sample(inst, 7, 1));
}

TEST_CASE("sphere mean under uniform sampling matches the analytic moment") {
    // x ~ U(-5, 5): E[x^2] = 25/3, Var[x^2] = 125 - (25/3)^2.
    const auto inst = bbob::make_instance(1, 0, 5);
    const auto s = ela::uniform_sample(inst, 2000, 1);
    const double mean = 5.0 * 25.0 / 3.0;
    const double se = std::sqrt(5.0 * (125.0 - 625.0 / 9.0) / 2000.0);
    CHECK(std::abs(s.values.mean() - mean) <= 3.0 * se);
}

TEST_CASE("y-distribution") {
    SUBCASE("mirrored values have zero skewness") {
        Rng rng(3);
        Eigen::VectorXd y(400);
        for (int i = 0; i < 200; ++i) {
            y[i] = rng.uniform(0.0, 10.0);
            y[200 + i] = -y[i];
        }
        const auto f = ela::ela_distr(make_set(uniform_points(400, 2, 1), y));
        CHECK(std::abs(f[0]) <= 1e-9);
    }
    SUBCASE("normal sample has near-zero excess kurtosis") {
        Rng rng(11);
        Eigen::VectorXd y(2000);
        for (auto& v : y) v = rng.normal();
        CHECK(std::abs(ela::ela_distr(make_set(uniform_points(2000, 2, 2), y))[1]) <= 0.3);
    }
    SUBCASE("two separated clusters give two peaks") {
        Rng rng(5);
        Eigen::VectorXd y(1000);
        for (int i = 0; i < 1000; ++i) y[i] = (i % 2 ? 20.0 : 0.0) + rng.normal();
        CHECK(ela::kde_peak_count(y) == 2);
        CHECK(ela::ela_distr(make_set(uniform_points(1000, 2, 3), y))[2] == 2.0);
    }
    SUBCASE("constant values leave moments undefined") {
        const auto f = ela::ela_distr(make_set(uniform_points(50, 2, 4), Eigen::VectorXd::Constant(50, 3.0)));
        CHECK(std::isnan(f[0]));
        CHECK(std::isnan(f[1]));
    }
    SUBCASE("depends on y only") {
        const auto inst = bbob::make_instance(3, 1, 5);
        auto s = ela::uniform_sample(inst, 300, 9);
        const auto a = ela::ela_distr(s);
        s.points.array() += 1.5;
        CHECK(ela::ela_distr(s) == a);
    }
}

TEST_CASE("levelset classifiers") {
    SUBCASE("linearly separable labels") {
        const auto x = uniform_points(500, 3, 21);
        std::vector<int> labels(500);
        for (int i = 0; i < 500; ++i) labels[i] = x(i, 0) + 0.5 * x(i, 1) < 0.3;
        CHECK(ela::cv_mmce(x, labels, ela::Classifier::Lda, 1) <= 0.05);
    }
    SUBCASE("fair coin labels") {
        const auto x = uniform_points(2000, 5, 22);
        Rng rng(99);
        std::vector<int> labels(2000);
        for (auto& l : labels) l = rng.uniform() < 0.5;
        for (auto c : {ela::Classifier::Lda, ela::Classifier::Qda, ela::Classifier::Knn})
            CHECK(std::abs(ela::cv_mmce(x, labels, c, 4) - 0.5) <= 0.1);
    }
    SUBCASE("self ratio") {
        CHECK(ela::mmce_ratio(0.2, 0.2) == 1.0);
        CHECK(std::isnan(ela::mmce_ratio(0.2, 0.0)));
    }
    SUBCASE("coin flip landscape through ela_level") {
        Rng rng(7);
        Eigen::VectorXd y(2000);
        for (auto& v : y) v = rng.uniform();
        const auto f = ela::ela_level(make_set(uniform_points(2000, 5, 23), y));
        for (int k = 12; k < 15; ++k) CHECK(std::abs(f[k] - 0.5) <= 0.1);
    }
}

TEST_CASE("meta-model") {
    SUBCASE("exactly linear values") {
        const auto x = uniform_points(300, 4, 31);
        Eigen::VectorXd y = (x * Eigen::Vector4d(1.0, -3.0, 0.5, 2.0)).array() + 2.0;
        const auto f = ela::ela_meta(make_set(x, y));
        CHECK(std::abs(f[0] - 1.0) <= 1e-9);
        CHECK(f[1] == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(f[2] == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(f[3] == doctest::Approx(3.0).epsilon(1e-9));
        CHECK(f[4] == doctest::Approx(6.0).epsilon(1e-9));
    }
    SUBCASE("sphere is exactly quadratic") {
        const auto s = ela::uniform_sample(bbob::make_instance(1, 0, 5), 2000, 1);
        const auto f = ela::ela_meta(s);
        CHECK(f[6] >= 0.999);
        CHECK(std::abs(f[7] - 1.0) <= 1e-6);
        CHECK(f[8] >= 0.999);
    }
    SUBCASE("scaling y scales the intercept and keeps levelsets") {
        const auto s = ela::uniform_sample(bbob::make_instance(10, 1, 5), 250, 3);
        auto scaled = s;
        scaled.values *= 10.0;
        CHECK(ela::ela_meta(scaled)[1] == doctest::Approx(10.0 * ela::ela_meta(s)[1]).epsilon(1e-9));
        CHECK(ela::ela_level(scaled) == ela::ela_level(s));
        CHECK(ela::kde_peak_count(scaled.values) == ela::kde_peak_count(s.values));
    }
}

TEST_CASE("dispersion") {
    SUBCASE("constant values behave like a random subset") {
        auto s = make_set(uniform_points(2000, 5, 41), Eigen::VectorXd::Constant(2000, 1.0));
        const auto f = ela::dispersion(s);
        for (int q = 0; q < 4; ++q) {
            CHECK(std::abs(f[4 * q] - 1.0) <= 0.15);
            CHECK(std::abs(f[4 * q + 1] - 1.0) <= 0.15);
        }
    }
    SUBCASE("best sphere points cluster") {
        const auto s = ela::uniform_sample(bbob::make_instance(1, 1, 5), 1000, 5);
        CHECK(ela::dispersion(s)[0] < 1.0);
    }
    SUBCASE("the full set is the identity subset") {
        const auto s = ela::uniform_sample(bbob::make_instance(2, 1, 5), 100, 5);
        const auto f = ela::dispersion_at(s, ela::pairwise_distances(s.points), 1.0);
        CHECK(f[0] == 1.0);
        CHECK(f[1] == 1.0);
        CHECK(f[2] == 0.0);
        CHECK(f[3] == 0.0);
    }
}

TEST_CASE("information content") {
    SUBCASE("flat landscape") {
        const auto f = ela::information_content(make_set(uniform_points(200, 3, 51), Eigen::VectorXd::Zero(200)));
        CHECK(f[0] == 0.0);
        CHECK(f[3] == 0.0);
    }
    // Points on a line, so the greedy tour visits them in index order.
    Eigen::MatrixXd line = Eigen::MatrixXd::Zero(40, 2);
    for (int i = 0; i < 40; ++i) line(i, 0) = i * 0.1;
    SUBCASE("tour on a line") {
        const auto tour = ela::nearest_neighbor_tour(ela::pairwise_distances(line));
        std::vector<int> expected(40);
        std::iota(expected.begin(), expected.end(), 0);
        CHECK(tour == expected);
    }
    SUBCASE("monotone values") {
        Eigen::VectorXd y(40);
        for (int i = 0; i < 40; ++i) y[i] = i * i;
        CHECK(ela::information_content(make_set(line, y))[3] == 0.0);
    }
    SUBCASE("alternating values") {
        Eigen::VectorXd y(40);
        for (int i = 0; i < 40; ++i) y[i] = i % 2;
        const auto f = ela::information_content(make_set(line, y));
        CHECK(f[3] == doctest::Approx(1.0).epsilon(1e-12));
        const auto curve = ela::information_curve(y, ela::pairwise_distances(line),
                                                  ela::nearest_neighbor_tour(ela::pairwise_distances(line)));
        CHECK(curve.epsilons.size() == 101);
        CHECK(curve.epsilons[0] == 0.0);
        CHECK(curve.epsilons[1] == doctest::Approx(1e-5));
        CHECK(curve.epsilons[100] == doctest::Approx(1e15));
    }
    SUBCASE("entropy is bounded") {
        const auto s = ela::uniform_sample(bbob::make_instance(15, 1, 5), 250, 8);
        const auto f = ela::information_content(s);
        CHECK(f[0] >= 0.0);
        CHECK(f[0] <= 1.0);
    }
}

TEST_CASE("nearest better") {
    SUBCASE("two points") {
        Eigen::MatrixXd p(2, 2);
        p << 0, 0, 3, 4;
        Eigen::VectorXd y(2);
        y << 1.0, 2.0;
        CHECK(ela::nearest_better(make_set(p, y))[1] == 1.0);
    }
    SUBCASE("random values agree with a resampling oracle") {
        const auto p = uniform_points(200, 2, 61);
        Rng rng(62);
        std::vector<double> base(200);
        std::iota(base.begin(), base.end(), 0.0);
        double oracle = 0.0;
        for (int r = 0; r < 1000; ++r) {
            for (std::size_t i = base.size(); i > 1; --i) std::swap(base[i - 1], base[rng.index(i)]);
            oracle += nb_mean_ratio_oracle(p, Eigen::Map<Eigen::VectorXd>(base.data(), 200));
        }
        oracle /= 1000.0;
        for (std::size_t i = base.size(); i > 1; --i) std::swap(base[i - 1], base[rng.index(i)]);
        const Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(base.data(), 200);
        const double got = ela::nearest_better(make_set(p, y))[1];
        CHECK(got == doctest::Approx(nb_mean_ratio_oracle(p, y)).epsilon(1e-12));
        CHECK(std::abs(got - oracle) <= 0.15);
    }
    SUBCASE("sphere separates from random values") {
        const auto sphere = ela::uniform_sample(bbob::make_instance(1, 1, 5), 2000, 3);
        Rng rng(4);
        Eigen::VectorXd y(2000);
        for (auto& v : y) v = rng.uniform();
        CHECK(ela::nearest_better(sphere)[1] > ela::nearest_better(make_set(sphere.points, y))[1]);
    }
}

TEST_CASE("replicate aggregation") {
    std::vector<std::array<double, ela::kFeatureCount>> reps(3);
    for (auto& r : reps) r.fill(std::numeric_limits<double>::quiet_NaN());
    reps[0][0] = 1.0;
    reps[1][0] = 2.0;
    reps[2][0] = 10.0;
    reps[0][1] = 4.0;
    const auto f = ela::aggregate_replicates(reps);
    CHECK(f.values[0] == 2.0);
    CHECK(f.values[1] == 4.0);
    CHECK_FALSE(f.imputed[1]);
    CHECK(f.values[2] == 0.0);
    CHECK(f.imputed[2]);
    CHECK(f.reps == 3);
}

TEST_CASE("compute_features") {
    const auto inst = bbob::make_instance(6, 2, 5);
    SUBCASE("one replicate is the direct computation") {
        const auto fv = ela::compute_features(inst, 250, 1, 17);
        const auto direct = ela::all_features(ela::uniform_sample(inst, 250, ela::replicate_seed(17, 6, 2, 250, 0)));
        for (std::size_t k = 0; k < ela::kFeatureCount; ++k) {
            CAPTURE(ela::feature_names()[k]);
            if (std::isfinite(direct[k]))
                CHECK(fv.values[k] == direct[k]);
            else
                CHECK(fv.imputed[k]);
        }
        CHECK(fv.values.size() == 56);
    }
    SUBCASE("independent of the thread count") {
        const auto a = ela::compute_features(inst, 250, 4, 3, 1);
        const auto b = ela::compute_features(inst, 250, 4, 3, 3);
        CHECK(a.values == b.values);
        CHECK(a.imputed == b.imputed);
    }
    SUBCASE("sphere with many replicates") {
        const auto fv = ela::compute_features(bbob::make_instance(1, 1, 5), 2000, 50, 1, 4);
        CHECK(fv.values[feature_index("ela_meta.quad_simple.adj_r2")] >= 0.999);
    }
    SUBCASE("constant landscape is flagged, not fatal") {
        std::vector<std::array<double, ela::kFeatureCount>> reps;
        reps.push_back(ela::all_features(make_set(uniform_points(100, 5, 3), Eigen::VectorXd::Constant(100, 2.0))));
        const auto fv = ela::aggregate_replicates(reps);
        CHECK(fv.values[feature_index("ic.h_max")] == 0.0);
        CHECK(fv.values[feature_index("ic.m0")] == 0.0);
        CHECK(fv.imputed[feature_index("ela_distr.skewness")]);
        for (double v : fv.values) CHECK(std::isfinite(v));
    }
}
