#include "landsel/ela.hpp"

#include "landsel/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace landsel::ela {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::array<double, 3> kLevelQuantiles{0.10, 0.25, 0.50};
constexpr std::array<double, 4> kDispersionQuantiles{0.02, 0.05, 0.10, 0.25};
constexpr int kLevelFolds = 10;
constexpr int kKnnNeighbours = 3;
constexpr int kKdeGrid = 512;
constexpr int kEpsilonGrid = 100;
constexpr double kSettlingEntropy = 0.05;

double mean(std::span<const double> v) {
    if (v.empty()) return kNaN;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
    if (v.size() < 2) return kNaN;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2) return kNaN;
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return kNaN;
    return sab / std::sqrt(saa * sbb);
}

double median_in_place(std::vector<double>& v) {
    if (v.empty()) return kNaN;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lower + upper);
}

// Type-7 (linear interpolation) sample quantile.
double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<double> to_vector(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Order of points by objective value, ties by index.
std::vector<int> rank_by_value(const VectorXd& y) {
    std::vector<int> order(static_cast<std::size_t>(y.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return y[a] < y[b]; });
    return order;
}

// --- level set classifiers -------------------------------------------------

struct GaussianClass {
    VectorXd mean;
    Eigen::LLT<MatrixXd> chol;
    double log_det = 0.0;
    double log_prior = 0.0;
    bool present = false;
};

Eigen::LLT<MatrixXd> regularised_cholesky(MatrixXd cov, double* log_det) {
    const auto d = cov.rows();
    const double scale = std::max(cov.trace() / static_cast<double>(d), 1e-12);
    double ridge = 1e-10 * scale;
    for (int attempt = 0; attempt < 12; ++attempt) {
        Eigen::LLT<MatrixXd> llt(cov + ridge * MatrixXd::Identity(d, d));
        if (llt.info() == Eigen::Success) {
            const VectorXd diag = MatrixXd(llt.matrixL()).diagonal();
            *log_det = 2.0 * diag.array().log().sum();
            return llt;
        }
        ridge *= 10.0;
    }
    Eigen::LLT<MatrixXd> llt(MatrixXd::Identity(d, d) * scale);
    *log_det = static_cast<double>(d) * std::log(scale);
    return llt;
}

std::array<GaussianClass, 2> fit_gaussians(const MatrixXd& x, const std::vector<int>& labels,
                                            const std::vector<int>& rows, bool pooled) {
    const auto d = x.cols();
    std::array<GaussianClass, 2> cls;
    std::array<int, 2> count{0, 0};
    std::array<VectorXd, 2> sum{VectorXd::Zero(d), VectorXd::Zero(d)};
    for (int r : rows) {
        ++count[labels[r]];
        sum[labels[r]] += x.row(r).transpose();
    }
    std::array<MatrixXd, 2> scatter{MatrixXd::Zero(d, d), MatrixXd::Zero(d, d)};
    for (int c = 0; c < 2; ++c) {
        cls[c].present = count[c] > 0;
        if (cls[c].present) cls[c].mean = sum[c] / count[c];
        cls[c].log_prior = cls[c].present ? std::log(double(count[c]) / double(rows.size())) : 0.0;
    }
    for (int r : rows) {
        const VectorXd dev = x.row(r).transpose() - cls[labels[r]].mean;
        scatter[labels[r]] += dev * dev.transpose();
    }
    const int total = count[0] + count[1];
    const MatrixXd pooled_cov = (scatter[0] + scatter[1]) / std::max(1, total - 2);
    for (int c = 0; c < 2; ++c) {
        if (!cls[c].present) continue;
        const MatrixXd cov = (pooled || count[c] < 2) ? pooled_cov : MatrixXd(scatter[c] / (count[c] - 1));
        cls[c].chol = regularised_cholesky(cov, &cls[c].log_det);
    }
    return cls;
}

int predict_gaussian(const std::array<GaussianClass, 2>& cls, const VectorXd& point) {
    if (!cls[0].present) return 1;
    if (!cls[1].present) return 0;
    std::array<double, 2> score{};
    for (int c = 0; c < 2; ++c) {
        const VectorXd dev = point - cls[c].mean;
        const double maha = dev.dot(cls[c].chol.solve(dev));
        score[c] = -0.5 * cls[c].log_det - 0.5 * maha + cls[c].log_prior;
    }
    return score[1] > score[0] ? 1 : 0;
}

int predict_knn(const MatrixXd& x, const std::vector<int>& labels, const std::vector<int>& train, int query) {
    std::vector<std::pair<double, int>> nearest;
    nearest.reserve(train.size());
    for (int r : train) nearest.emplace_back((x.row(r) - x.row(query)).squaredNorm(), r);
    const std::size_t k = std::min<std::size_t>(kKnnNeighbours, nearest.size());
    std::partial_sort(nearest.begin(), nearest.begin() + static_cast<long>(k), nearest.end());
    int votes = 0;
    for (std::size_t i = 0; i < k; ++i) votes += labels[nearest[i].second];
    return 2 * votes > static_cast<int>(k) ? 1 : 0;
}

}  // namespace

const std::array<std::string_view, kFeatureCount>& feature_names() {
    static const std::array<std::string_view, kFeatureCount> names{
        "ela_distr.skewness",
        "ela_distr.kurtosis",
        "ela_distr.number_of_peaks",
        "ela_level.mmce_lda_10",
        "ela_level.mmce_qda_10",
        "ela_level.mmce_knn_10",
        "ela_level.lda_qda_10",
        "ela_level.lda_knn_10",
        "ela_level.qda_knn_10",
        "ela_level.mmce_lda_25",
        "ela_level.mmce_qda_25",
        "ela_level.mmce_knn_25",
        "ela_level.lda_qda_25",
        "ela_level.lda_knn_25",
        "ela_level.qda_knn_25",
        "ela_level.mmce_lda_50",
        "ela_level.mmce_qda_50",
        "ela_level.mmce_knn_50",
        "ela_level.lda_qda_50",
        "ela_level.lda_knn_50",
        "ela_level.qda_knn_50",
        "ela_meta.lin_simple.adj_r2",
        "ela_meta.lin_simple.intercept",
        "ela_meta.lin_simple.coef.min",
        "ela_meta.lin_simple.coef.max",
        "ela_meta.lin_simple.coef.max_by_min",
        "ela_meta.lin_w_interact.adj_r2",
        "ela_meta.quad_simple.adj_r2",
        "ela_meta.quad_simple.cond",
        "ela_meta.quad_w_interact.adj_r2",
        "disp.ratio_mean_02",
        "disp.ratio_median_02",
        "disp.diff_mean_02",
        "disp.diff_median_02",
        "disp.ratio_mean_05",
        "disp.ratio_median_05",
        "disp.diff_mean_05",
        "disp.diff_median_05",
        "disp.ratio_mean_10",
        "disp.ratio_median_10",
        "disp.diff_mean_10",
        "disp.diff_median_10",
        "disp.ratio_mean_25",
        "disp.ratio_median_25",
        "disp.diff_mean_25",
        "disp.diff_median_25",
        "ic.h_max",
        "ic.eps_s",
        "ic.eps_max",
        "ic.m0",
        "ic.eps_ratio",
        "nbc.nn_nb.sd_ratio",
        "nbc.nn_nb.mean_ratio",
        "nbc.nn_nb.cor",
        "nbc.dist_ratio.coeff_var",
        "nbc.nb_fitness.cor",
    };
    return names;
}

SampleSet uniform_sample(const bbob::ProblemInstance& inst, int n, std::uint64_t seed) {
    if (n < inst.dim + 2)
        throw SampleSizeError("sample size " + std::to_string(n) + " below dim + 2 = " + std::to_string(inst.dim + 2));
    Rng rng(seed);
    SampleSet s;
    s.seed = seed;
    s.points.resize(n, inst.dim);
    s.values.resize(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < inst.dim; ++j) s.points(i, j) = rng.uniform(bbob::kDomainLower, bbob::kDomainUpper);
    for (int i = 0; i < n; ++i) s.values[i] = bbob::evaluate(inst, VectorXd(s.points.row(i).transpose()));
    return s;
}

MatrixXd pairwise_distances(const MatrixXd& points) {
    const auto n = points.rows();
    MatrixXd d(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (points.row(i) - points.row(j)).norm();
    }
    return d;
}

// --- y-distribution --------------------------------------------------------

int kde_peak_count(const VectorXd& y) {
    const auto n = y.size();
    const double lo = y.minCoeff(), hi = y.maxCoeff();
    const std::vector<double> v = to_vector(y);
    const double sd = sample_sd(v);
    if (!(sd > 0.0) || lo == hi) return 1;
    const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
    const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    const double bw = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);

    std::vector<double> density(kKdeGrid, 0.0);
    for (int g = 0; g < kKdeGrid; ++g) {
        const double at = lo + (hi - lo) * g / (kKdeGrid - 1);
        double acc = 0.0;
        for (double yi : v) {
            const double u = (at - yi) / bw;
            acc += std::exp(-0.5 * u * u);
        }
        density[g] = acc;
    }
    int peaks = 0;
    for (int g = 0; g < kKdeGrid; ++g) {
        const bool above_left = g == 0 || density[g] > density[g - 1];
        const bool above_right = g == kKdeGrid - 1 || density[g] > density[g + 1];
        if (above_left && above_right) ++peaks;
    }
    return peaks;
}

std::array<double, 3> ela_distr(const SampleSet& s) {
    const auto& y = s.values;
    const double n = static_cast<double>(y.size());
    const double m = y.mean();
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : y) {
        const double d = v - m;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    const double skew = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : kNaN;
    const double kurt = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : kNaN;
    return {skew, kurt, static_cast<double>(kde_peak_count(y))};
}

// --- level set -------------------------------------------------------------

double cv_mmce(const MatrixXd& x, const std::vector<int>& labels, Classifier classifier, std::uint64_t seed) {
    const int n = static_cast<int>(x.rows());
    std::vector<int> fold(n);
    for (int c = 0; c < 2; ++c) {
        std::vector<int> members;
        for (int i = 0; i < n; ++i)
            if (labels[i] == c) members.push_back(i);
        Rng rng(hash_combine(seed, static_cast<std::uint64_t>(c)));
        for (std::size_t j = members.size(); j > 1; --j) std::swap(members[j - 1], members[rng.index(j)]);
        for (std::size_t j = 0; j < members.size(); ++j) fold[members[j]] = static_cast<int>(j % kLevelFolds);
    }

    int errors = 0;
    for (int k = 0; k < kLevelFolds; ++k) {
        std::vector<int> train, test;
        for (int i = 0; i < n; ++i) (fold[i] == k ? test : train).push_back(i);
        if (test.empty()) continue;
        if (classifier == Classifier::Knn) {
            for (int q : test) errors += predict_knn(x, labels, train, q) != labels[q];
        } else {
            const auto cls = fit_gaussians(x, labels, train, classifier == Classifier::Lda);
            for (int q : test) errors += predict_gaussian(cls, x.row(q).transpose()) != labels[q];
        }
    }
    return static_cast<double>(errors) / n;
}

double mmce_ratio(double numerator, double denominator) {
    if (!(denominator != 0.0)) return kNaN;
    return numerator / denominator;
}

std::array<double, 18> ela_level(const SampleSet& s) {
    std::array<double, 18> out;
    out.fill(kNaN);
    const auto n = s.values.size();
    const std::vector<double> y = to_vector(s.values);
    for (std::size_t qi = 0; qi < kLevelQuantiles.size(); ++qi) {
        const double threshold = quantile(y, kLevelQuantiles[qi]);
        std::vector<int> labels(n);
        int below = 0;
        for (Eigen::Index i = 0; i < n; ++i) below += labels[i] = y[i] < threshold ? 1 : 0;
        if (below == 0 || below == static_cast<int>(n)) continue;

        const std::uint64_t seed = hash_combine(s.seed, 0x1e7e1000 + qi);
        const double lda = cv_mmce(s.points, labels, Classifier::Lda, seed);
        const double qda = cv_mmce(s.points, labels, Classifier::Qda, seed);
        const double knn = cv_mmce(s.points, labels, Classifier::Knn, seed);
        double* block = out.data() + 6 * qi;
        block[0] = lda;
        block[1] = qda;
        block[2] = knn;
        block[3] = mmce_ratio(lda, qda);
        block[4] = mmce_ratio(lda, knn);
        block[5] = mmce_ratio(qda, knn);
    }
    return out;
}

// --- meta model ------------------------------------------------------------

namespace {

struct LinearFit {
    VectorXd coef;
    double adj_r2 = kNaN;
};

LinearFit least_squares(const MatrixXd& design, const VectorXd& y) {
    LinearFit fit;
    fit.coef = design.completeOrthogonalDecomposition().solve(y);
    const double n = static_cast<double>(y.size());
    const double predictors = static_cast<double>(design.cols() - 1);
    const double sst = (y.array() - y.mean()).square().sum();
    const double sse = (y - design * fit.coef).squaredNorm();
    if (sst > 0.0 && n - predictors - 1.0 > 0.0) {
        const double r2 = 1.0 - sse / sst;
        fit.adj_r2 = 1.0 - (1.0 - r2) * (n - 1.0) / (n - predictors - 1.0);
    }
    return fit;
}

MatrixXd design_matrix(const MatrixXd& x, bool squares, bool interactions) {
    const auto n = x.rows(), d = x.cols();
    Eigen::Index cols = 1 + d + (squares ? d : 0) + (interactions ? d * (d - 1) / 2 : 0);
    MatrixXd m(n, cols);
    m.col(0).setOnes();
    m.middleCols(1, d) = x;
    Eigen::Index c = 1 + d;
    if (squares) {
        m.middleCols(c, d) = x.array().square().matrix();
        c += d;
    }
    if (interactions)
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = i + 1; j < d; ++j) m.col(c++) = x.col(i).cwiseProduct(x.col(j));
    return m;
}

}  // namespace

std::array<double, 9> ela_meta(const SampleSet& s) {
    const auto& x = s.points;
    const auto& y = s.values;
    const auto d = x.cols();

    const LinearFit lin = least_squares(design_matrix(x, false, false), y);
    const LinearFit lin_inter = least_squares(design_matrix(x, false, true), y);
    const LinearFit quad = least_squares(design_matrix(x, true, false), y);
    const LinearFit quad_inter = least_squares(design_matrix(x, true, true), y);

    const VectorXd lin_abs = lin.coef.tail(d).cwiseAbs();
    const double cmin = lin_abs.minCoeff(), cmax = lin_abs.maxCoeff();
    const VectorXd sq_abs = quad.coef.tail(d).cwiseAbs();
    const double qmin = sq_abs.minCoeff(), qmax = sq_abs.maxCoeff();

    return {
        lin.adj_r2,
        lin.coef[0],
        cmin,
        cmax,
        cmin > 0.0 ? cmax / cmin : kNaN,
        lin_inter.adj_r2,
        quad.adj_r2,
        qmin > 0.0 ? qmax / qmin : kNaN,
        quad_inter.adj_r2,
    };
}

// --- dispersion ------------------------------------------------------------

namespace {

struct DistanceSummary {
    double mean = kNaN;
    double median = kNaN;
};

DistanceSummary summarise_pairs(const MatrixXd& distances, const std::vector<int>& subset) {
    std::vector<double> pairs;
    pairs.reserve(subset.size() * (subset.size() - 1) / 2);
    for (std::size_t a = 0; a < subset.size(); ++a)
        for (std::size_t b = a + 1; b < subset.size(); ++b) pairs.push_back(distances(subset[a], subset[b]));
    if (pairs.empty()) return {};
    DistanceSummary out;
    out.mean = mean(pairs);
    out.median = median_in_place(pairs);
    return out;
}

std::size_t subset_size(double q, std::size_t n) {
    // Guard against q*n landing a hair above an integer.
    return static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
}

std::array<double, 4> dispersion_with(const MatrixXd& distances, double q, const std::vector<int>& order,
                                      const DistanceSummary& all) {
    const std::size_t k = std::min(subset_size(q, order.size()), order.size());
    if (k < 2) return {kNaN, kNaN, kNaN, kNaN};
    // Index order, so the full subset sums its pairs exactly like `all`.
    std::vector<int> best(order.begin(), order.begin() + static_cast<long>(k));
    std::sort(best.begin(), best.end());
    const DistanceSummary sub = summarise_pairs(distances, best);
    return {sub.mean / all.mean, sub.median / all.median, sub.mean - all.mean, sub.median - all.median};
}

std::vector<int> identity_order(std::size_t n) {
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 0);
    return v;
}

}  // namespace

std::array<double, 4> dispersion_at(const SampleSet& s, const MatrixXd& distances, double q) {
    const auto order = rank_by_value(s.values);
    const DistanceSummary all = summarise_pairs(distances, identity_order(order.size()));
    return dispersion_with(distances, q, order, all);
}

std::array<double, 16> dispersion(const SampleSet& s, const MatrixXd& distances) {
    const auto order = rank_by_value(s.values);
    const DistanceSummary all = summarise_pairs(distances, identity_order(order.size()));
    std::array<double, 16> out;
    for (std::size_t qi = 0; qi < kDispersionQuantiles.size(); ++qi) {
        const auto block = dispersion_with(distances, kDispersionQuantiles[qi], order, all);
        std::copy(block.begin(), block.end(), out.begin() + static_cast<long>(4 * qi));
    }
    return out;
}

std::array<double, 16> dispersion(const SampleSet& s) { return dispersion(s, pairwise_distances(s.points)); }

// --- information content ---------------------------------------------------

std::vector<int> nearest_neighbor_tour(const MatrixXd& distances) {
    const auto n = distances.rows();
    std::vector<int> tour;
    if (n == 0) return tour;
    tour.reserve(static_cast<std::size_t>(n));
    std::vector<bool> visited(static_cast<std::size_t>(n), false);
    int current = 0;
    visited[0] = true;
    tour.push_back(0);
    for (Eigen::Index step = 1; step < n; ++step) {
        int next = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (visited[j]) continue;
            if (distances(current, j) < best) {
                best = distances(current, j);
                next = static_cast<int>(j);
            }
        }
        visited[next] = true;
        tour.push_back(next);
        current = next;
    }
    return tour;
}

InformationCurve information_curve(const VectorXd& y, const MatrixXd& distances, const std::vector<int>& tour) {
    InformationCurve curve;
    curve.epsilons.push_back(0.0);
    for (int j = 0; j < kEpsilonGrid; ++j) curve.epsilons.push_back(std::pow(10.0, -5.0 + 20.0 * j / (kEpsilonGrid - 1)));

    std::vector<double> slope;
    for (std::size_t i = 0; i + 1 < tour.size(); ++i) {
        const double step = distances(tour[i], tour[i + 1]);
        const double dy = y[tour[i + 1]] - y[tour[i]];
        slope.push_back(step > 0.0 ? dy / step : 0.0);
    }

    const std::size_t m = slope.size();
    std::vector<int> symbols(m);
    for (double eps : curve.epsilons) {
        for (std::size_t i = 0; i < m; ++i) symbols[i] = slope[i] > eps ? 1 : (slope[i] < -eps ? -1 : 0);
        if (m < 2) {
            curve.entropy.push_back(kNaN);
            curve.partial.push_back(kNaN);
            continue;
        }
        std::array<int, 9> pair_count{};
        for (std::size_t i = 0; i + 1 < m; ++i) ++pair_count[3 * (symbols[i] + 1) + (symbols[i + 1] + 1)];
        double h = 0.0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                if (a == b || pair_count[3 * a + b] == 0) continue;
                const double p = static_cast<double>(pair_count[3 * a + b]) / static_cast<double>(m - 1);
                h -= p * std::log(p) / std::log(6.0);
            }
        curve.entropy.push_back(h);

        int changes = 0, last = 0;
        for (int sym : symbols) {
            if (sym == 0) continue;
            if (last != 0 && sym != last) ++changes;
            last = sym;
        }
        curve.partial.push_back(static_cast<double>(changes) / static_cast<double>(m - 1));
    }
    return curve;
}

std::array<double, 5> information_content(const SampleSet& s, const MatrixXd& distances) {
    if (s.values.size() < 3) return {kNaN, kNaN, kNaN, kNaN, kNaN};
    const auto curve = information_curve(s.values, distances, nearest_neighbor_tour(distances));
    const auto& eps = curve.epsilons;
    const auto& h = curve.entropy;
    const auto& m = curve.partial;

    const double h_max = *std::max_element(h.begin(), h.end());
    double eps_s = kNaN;
    std::size_t arg_max = 1;
    for (std::size_t j = 1; j < eps.size(); ++j) {
        if (h[j] >= kSettlingEntropy) eps_s = std::log10(eps[j]);
        if (h[j] > h[arg_max]) arg_max = j;
    }
    const double m0 = m[0];
    double eps_ratio = kNaN;
    for (std::size_t j = 1; j < eps.size(); ++j) {
        if (m[j] <= 0.5 * m0) {
            eps_ratio = std::log10(eps[j]);
            break;
        }
    }
    return {h_max, eps_s, std::log10(eps[arg_max]), m0, eps_ratio};
}

std::array<double, 5> information_content(const SampleSet& s) {
    return information_content(s, pairwise_distances(s.points));
}

// --- nearest-better clustering ----------------------------------------------

std::array<double, 5> nearest_better(const SampleSet& s, const MatrixXd& distances) {
    const auto n = s.values.size();
    const auto& y = s.values;
    std::vector<double> nn_kept, nb_kept, ratio;
    std::vector<double> indegree(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        double nn = std::numeric_limits<double>::infinity();
        double nb = std::numeric_limits<double>::infinity();
        int nb_index = -1;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dij = distances(i, j);
            nn = std::min(nn, dij);
            if (y[j] < y[i] && dij < nb) {
                nb = dij;
                nb_index = static_cast<int>(j);
            }
        }
        if (nb_index < 0) continue;
        indegree[nb_index] += 1.0;
        nn_kept.push_back(nn);
        nb_kept.push_back(nb);
        ratio.push_back(nn / nb);
    }
    const std::vector<double> fitness = to_vector(y);
    return {
        sample_sd(nn_kept) / sample_sd(nb_kept),
        mean(nn_kept) / mean(nb_kept),
        pearson(nn_kept, nb_kept),
        sample_sd(ratio) / mean(ratio),
        pearson(indegree, fitness),
    };
}

std::array<double, 5> nearest_better(const SampleSet& s) { return nearest_better(s, pairwise_distances(s.points)); }

// --- aggregation -------------------------------------------------------------

std::array<double, kFeatureCount> all_features(const SampleSet& s) {
    const MatrixXd distances = pairwise_distances(s.points);
    std::array<double, kFeatureCount> out;
    auto it = out.begin();
    auto append = [&it](const auto& block) { it = std::copy(block.begin(), block.end(), it); };
    append(ela_distr(s));
    append(ela_level(s));
    append(ela_meta(s));
    append(dispersion(s, distances));
    append(information_content(s, distances));
    append(nearest_better(s, distances));
    return out;
}

FeatureVector aggregate_replicates(const std::vector<std::array<double, kFeatureCount>>& replicates) {
    FeatureVector fv;
    fv.reps = static_cast<int>(replicates.size());
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        std::vector<double> finite;
        for (const auto& rep : replicates)
            if (std::isfinite(rep[f])) finite.push_back(rep[f]);
        if (finite.empty()) {
            fv.values[f] = 0.0;
            fv.imputed[f] = true;
        } else {
            fv.values[f] = median_in_place(finite);
        }
    }
    return fv;
}

std::uint64_t replicate_seed(std::uint64_t master, int fid, int iid, int sample_size, int rep) {
    return stable_hash({master, std::uint64_t(fid), std::uint64_t(iid), std::uint64_t(sample_size), std::uint64_t(rep)});
}

FeatureVector compute_features(const bbob::ProblemInstance& inst, int sample_size, int reps, std::uint64_t seed,
                               unsigned jobs) {
    if (reps < 1) throw Error("replicate count must be >= 1");
    std::vector<std::array<double, kFeatureCount>> replicates(static_cast<std::size_t>(reps));
    parallel_for(replicates.size(), jobs, [&](std::size_t r) {
        const auto sample =
            uniform_sample(inst, sample_size, replicate_seed(seed, inst.fid, inst.iid, sample_size, static_cast<int>(r)));
        replicates[r] = all_features(sample);
    });
    FeatureVector fv = aggregate_replicates(replicates);
    fv.fid = inst.fid;
    fv.iid = inst.iid;
    fv.dim = inst.dim;
    fv.sample_size = sample_size;
    return fv;
}

}  // namespace landsel::ela
