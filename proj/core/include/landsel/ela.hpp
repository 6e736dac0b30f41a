#pragma once

#include "landsel/bbob.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace landsel::ela {

inline constexpr std::size_t kFeatureCount = 56;

/// Canonical feature roster, in output order:
///   ela_distr 3, ela_level 18, ela_meta 9, disp 16, ic 5, nbc 5.
const std::array<std::string_view, kFeatureCount>& feature_names();

struct SampleSet {
    Eigen::MatrixXd points;  // n x dim
    Eigen::VectorXd values;
    std::uint64_t seed = 0;
};

/// n i.i.d. uniform points in [-5, 5]^dim with their objective values.
SampleSet uniform_sample(const bbob::ProblemInstance& inst, int n, std::uint64_t seed);

/// Pairwise Euclidean distances, shared by the distance-based feature sets.
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points);

// Each feature set returns its values in canonical order. Undefined values
// are reported as NaN and resolved later by the replicate aggregation.

/// skewness, excess kurtosis, number of KDE peaks.
std::array<double, 3> ela_distr(const SampleSet& s);

/// Number of strict local maxima of a Gaussian KDE (Silverman bandwidth)
/// evaluated on a 512-point grid over [min y, max y].
int kde_peak_count(const Eigen::VectorXd& y);

enum class Classifier { Lda, Qda, Knn };

/// Cross-validated misclassification rate of `classifier` on the binary
/// labels, using stratified 10-fold CV seeded by `seed`.
double cv_mmce(const Eigen::MatrixXd& x, const std::vector<int>& labels, Classifier classifier, std::uint64_t seed);

/// mmce ratio; NaN when the denominator is zero.
double mmce_ratio(double numerator, double denominator);

/// Per quantile 0.10/0.25/0.50: mmce of LDA, QDA, 3-NN, then the ratios
/// lda/qda, lda/knn, qda/knn.
std::array<double, 18> ela_level(const SampleSet& s);

/// Adjusted R^2 of four polynomial models plus coefficient summaries of the
/// linear and pure-quadratic fits.
std::array<double, 9> ela_meta(const SampleSet& s);

/// ratio_mean, ratio_median, diff_mean, diff_median for the best ceil(q*n)
/// points.
std::array<double, 4> dispersion_at(const SampleSet& s, const Eigen::MatrixXd& distances, double q);
std::array<double, 16> dispersion(const SampleSet& s);
std::array<double, 16> dispersion(const SampleSet& s, const Eigen::MatrixXd& distances);

/// Greedy nearest-neighbour tour starting at point 0.
std::vector<int> nearest_neighbor_tour(const Eigen::MatrixXd& distances);

struct InformationCurve {
    std::vector<double> epsilons;  // epsilons[0] == 0, then the log grid
    std::vector<double> entropy;   // H(eps)
    std::vector<double> partial;   // M(eps)
};

/// Entropy and partial information of the symbol sequence along `tour`.
InformationCurve information_curve(const Eigen::VectorXd& y, const Eigen::MatrixXd& distances,
                                   const std::vector<int>& tour);

/// h_max, eps_s, eps_max, m0, eps_ratio.
std::array<double, 5> information_content(const SampleSet& s);
std::array<double, 5> information_content(const SampleSet& s, const Eigen::MatrixXd& distances);

/// nn_nb sd_ratio, nn_nb mean_ratio, nn_nb cor, dist_ratio coeff_var,
/// nb_fitness cor. The best point has no better neighbour and is left out of
/// every d_nb aggregate.
std::array<double, 5> nearest_better(const SampleSet& s);
std::array<double, 5> nearest_better(const SampleSet& s, const Eigen::MatrixXd& distances);

/// All 56 features of one sample, NaN where undefined.
std::array<double, kFeatureCount> all_features(const SampleSet& s);

struct FeatureVector {
    int fid = 0;
    int iid = 0;
    int dim = 0;
    int sample_size = 0;
    int reps = 0;
    std::array<double, kFeatureCount> values{};
    /// Set when every replicate was undefined and the value was imputed as 0.
    std::array<bool, kFeatureCount> imputed{};
};

/// Coordinate-wise median over replicates, taken over finite values only;
/// a feature with no finite replicate is imputed as 0 and flagged.
FeatureVector aggregate_replicates(const std::vector<std::array<double, kFeatureCount>>& replicates);

/// Seed for one replicate, independent of scheduling.
std::uint64_t replicate_seed(std::uint64_t master, int fid, int iid, int sample_size, int rep);

/// Median-of-replicates feature vector. Replicates run on up to `jobs`
/// threads; the result does not depend on `jobs`.
FeatureVector compute_features(const bbob::ProblemInstance& inst, int sample_size, int reps, std::uint64_t seed,
                               unsigned jobs = 1);

}  // namespace landsel::ela
