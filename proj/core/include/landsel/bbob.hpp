#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace landsel::bbob {

inline constexpr int kFunctionCount = 24;
inline constexpr double kDomainLower = -5.0;
inline constexpr double kDomainUpper = 5.0;

/// Peak landscape shared by the Gallagher functions (FID 21, 22).
struct Peaks {
    Eigen::MatrixXd centers;   // one peak per column; column 0 is the global optimum
    Eigen::MatrixXd scales;    // per-peak diagonal conditioning, one column per peak
    Eigen::VectorXd weights;
};

/// One noiseless benchmark instance. Immutable after make_instance, so it can
/// be evaluated concurrently from any number of threads.
struct ProblemInstance {
    int fid = 0;
    int iid = 0;
    int dim = 0;
    Eigen::VectorXd x_opt;
    double f_opt = 0.0;
    Eigen::MatrixXd rotation;    // R
    Eigen::MatrixXd rotation2;   // Q, used by functions with two rotations
    Eigen::VectorXd signs;       // random +-1 vector (FID 5, 20, 24)
    Peaks peaks;                 // populated for FID 21 and 22 only
};

/// Builds instance `iid` of function `fid`. iid 0 is the untransformed base
/// function: identity rotations, f_opt = 0 and a zero shift wherever the
/// function allows one. Every random quantity is drawn from a seed that is a
/// stable hash of (fid, iid, dim).
ProblemInstance make_instance(int fid, int iid, int dim);

/// Objective value f(x). Throws DimensionError on a length mismatch.
double evaluate(const ProblemInstance& inst, std::span<const double> x);
double evaluate(const ProblemInstance& inst, const Eigen::VectorXd& x);

/// f(x) - f_opt, non-negative for every x.
double precision(const ProblemInstance& inst, std::span<const double> x);

/// Seeded orthogonal matrix: QR of a Gaussian matrix with the signs chosen so
/// that the triangular factor has a positive diagonal.
Eigen::MatrixXd random_rotation(int dim, std::uint64_t seed);

}  // namespace landsel::bbob
