#include "landsel/bbob.hpp"

#include "landsel/common.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace landsel::bbob {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Seed streams drawn from the per-instance hash.
enum Stream : std::uint64_t { kShift = 1, kFopt, kRot1, kRot2, kSigns, kPeaks };

double t_osz_scalar(double x) {
    if (x == 0.0) return 0.0;
    const double xh = std::log(std::abs(x));
    const double c1 = x > 0 ? 10.0 : 5.5;
    const double c2 = x > 0 ? 7.9 : 3.1;
    return (x > 0 ? 1.0 : -1.0) * std::exp(xh + 0.049 * (std::sin(c1 * xh) + std::sin(c2 * xh)));
}

VectorXd t_osz(VectorXd x) {
    for (auto& v : x) v = t_osz_scalar(v);
    return x;
}

VectorXd t_asy(VectorXd x, double beta) {
    const auto d = x.size();
    for (Eigen::Index i = 0; i < d; ++i) {
        if (x[i] > 0) {
            const double ratio = d > 1 ? static_cast<double>(i) / static_cast<double>(d - 1) : 0.0;
            x[i] = std::pow(x[i], 1.0 + beta * ratio * std::sqrt(x[i]));
        }
    }
    return x;
}

// Diagonal of the conditioning matrix Lambda^alpha.
VectorXd lambda(int dim, double alpha) {
    VectorXd out(dim);
    for (int i = 0; i < dim; ++i) {
        const double ratio = dim > 1 ? static_cast<double>(i) / (dim - 1) : 0.0;
        out[i] = std::pow(alpha, 0.5 * ratio);
    }
    return out;
}

double f_pen(const VectorXd& x) {
    double s = 0.0;
    for (double v : x) {
        const double excess = std::abs(v) - 5.0;
        if (excess > 0) s += excess * excess;
    }
    return s;
}

double rastrigin_sum(const VectorXd& z) {
    double c = 0.0;
    for (double v : z) c += std::cos(kTwoPi * v);
    return 10.0 * (static_cast<double>(z.size()) - c) + z.squaredNorm();
}

double ratio_pow(double base, int i, int dim, double scale) {
    const double ratio = dim > 1 ? static_cast<double>(i) / (dim - 1) : 0.0;
    return std::pow(base, scale * ratio);
}

double schaffer(const VectorXd& z, const VectorXd& x) {
    const auto d = z.size();
    double s = 0.0;
    for (Eigen::Index i = 0; i + 1 < d; ++i) {
        const double si = std::sqrt(z[i] * z[i] + z[i + 1] * z[i + 1]);
        const double root = std::sqrt(si);
        const double sn = std::sin(50.0 * std::pow(si, 0.2));
        s += root + root * sn * sn;
    }
    s /= static_cast<double>(d - 1);
    return s * s + 10.0 * f_pen(x);
}

double gallagher(const ProblemInstance& p, const VectorXd& x) {
    const double d = p.dim;
    double best = 0.0;
    for (Eigen::Index k = 0; k < p.peaks.centers.cols(); ++k) {
        const VectorXd r = p.rotation * (x - p.peaks.centers.col(k));
        const double q = (r.array().square() * p.peaks.scales.col(k).array()).sum();
        best = std::max(best, p.peaks.weights[k] * std::exp(-q / (2.0 * d)));
    }
    const double t = t_osz_scalar(10.0 - best);
    return t * t + f_pen(x);
}

Peaks make_peaks(int dim, int count, double global_alpha, std::uint64_t seed, const VectorXd& x_opt) {
    Rng rng(seed);
    Peaks peaks;
    peaks.centers.resize(dim, count);
    peaks.scales.resize(dim, count);
    peaks.weights.resize(count);
    peaks.centers.col(0) = x_opt;
    for (int k = 1; k < count; ++k)
        for (int i = 0; i < dim; ++i) peaks.centers(i, k) = rng.uniform(-4.9, 4.9);

    // Condition numbers 1000^(2j/(count-2)), shuffled over the local peaks.
    std::vector<double> alphas(count - 1);
    for (int j = 0; j < count - 1; ++j) alphas[j] = std::pow(1000.0, 2.0 * j / (count - 2));
    for (int j = count - 2; j > 0; --j) std::swap(alphas[j], alphas[rng.index(j + 1)]);

    for (int k = 0; k < count; ++k) {
        const double alpha = k == 0 ? global_alpha : alphas[k - 1];
        std::vector<double> diag(dim);
        for (int i = 0; i < dim; ++i) diag[i] = ratio_pow(alpha, i, dim, 0.5);
        for (int i = dim - 1; i > 0; --i) std::swap(diag[i], diag[rng.index(i + 1)]);
        const double norm = std::pow(alpha, 0.25);
        for (int i = 0; i < dim; ++i) peaks.scales(i, k) = diag[i] / norm;
        peaks.weights[k] = k == 0 ? 10.0 : 1.1 + 8.0 * (k - 1) / (count - 2);
    }
    return peaks;
}

double raw_value(const ProblemInstance& p, const VectorXd& x) {
    const int dim = p.dim;
    const double d = dim;
    const MatrixXd& R = p.rotation;
    const MatrixXd& Q = p.rotation2;
    const VectorXd shifted = x - p.x_opt;

    switch (p.fid) {
    case 1:
        return shifted.squaredNorm();
    case 2: {
        const VectorXd z = t_osz(shifted);
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += ratio_pow(1e6, i, dim, 1.0) * z[i] * z[i];
        return s;
    }
    case 3: {
        const VectorXd z = lambda(dim, 10.0).asDiagonal() * t_asy(t_osz(shifted), 0.2);
        return rastrigin_sum(z);
    }
    case 4: {
        VectorXd z = t_osz(shifted);
        for (int i = 0; i < dim; ++i) {
            const double base = ratio_pow(10.0, i, dim, 0.5);
            z[i] *= (z[i] > 0 && i % 2 == 0) ? 10.0 * base : base;
        }
        return rastrigin_sum(z) + 100.0 * f_pen(x);
    }
    case 5: {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double si = p.signs[i] * ratio_pow(10.0, i, dim, 1.0);
            const double zi = p.x_opt[i] * x[i] < 25.0 ? x[i] : p.x_opt[i];
            s += 5.0 * std::abs(si) - si * zi;
        }
        return s;
    }
    case 6: {
        const VectorXd z = Q * (lambda(dim, 10.0).asDiagonal() * (R * shifted));
        double s = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double si = z[i] * p.x_opt[i] > 0 ? 100.0 : 1.0;
            s += (si * z[i]) * (si * z[i]);
        }
        return std::pow(t_osz_scalar(s), 0.9);
    }
    case 7: {
        const VectorXd zh = lambda(dim, 10.0).asDiagonal() * (R * shifted);
        VectorXd zt(dim);
        for (int i = 0; i < dim; ++i)
            zt[i] = std::abs(zh[i]) > 0.5 ? std::floor(0.5 + zh[i]) : std::floor(0.5 + 10.0 * zh[i]) / 10.0;
        const VectorXd z = Q * zt;
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += ratio_pow(10.0, i, dim, 2.0) * z[i] * z[i];
        return 0.1 * std::max(std::abs(zh[0]) / 1e4, s) + f_pen(x);
    }
    case 8:
    case 9: {
        const double c = std::max(1.0, std::sqrt(d) / 8.0);
        const VectorXd z = (c * (p.fid == 8 ? shifted : VectorXd(R * shifted))).array() + 1.0;
        double s = 0.0;
        for (int i = 0; i + 1 < dim; ++i) {
            const double a = z[i] * z[i] - z[i + 1];
            s += 100.0 * a * a + (z[i] - 1.0) * (z[i] - 1.0);
        }
        return s;
    }
    case 10: {
        const VectorXd z = t_osz(R * shifted);
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += ratio_pow(1e6, i, dim, 1.0) * z[i] * z[i];
        return s;
    }
    case 11: {
        const VectorXd z = t_osz(R * shifted);
        return 1e6 * z[0] * z[0] + z.tail(dim - 1).squaredNorm();
    }
    case 12: {
        const VectorXd z = R * t_asy(R * shifted, 0.5);
        return z[0] * z[0] + 1e6 * z.tail(dim - 1).squaredNorm();
    }
    case 13: {
        const VectorXd z = Q * (lambda(dim, 10.0).asDiagonal() * (R * shifted));
        return z[0] * z[0] + 100.0 * z.tail(dim - 1).norm();
    }
    case 14: {
        const VectorXd z = R * shifted;
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += std::pow(std::abs(z[i]), 2.0 + 4.0 * (dim > 1 ? double(i) / (dim - 1) : 0.0));
        return std::sqrt(s);
    }
    case 15: {
        const VectorXd z = R * (lambda(dim, 10.0).asDiagonal() * (Q * t_asy(t_osz(R * shifted), 0.2)));
        return rastrigin_sum(z);
    }
    case 16: {
        const VectorXd z = R * (lambda(dim, 0.01).asDiagonal() * (Q * t_osz(R * shifted)));
        double f0 = 0.0;
        for (int k = 0; k < 12; ++k) f0 += std::pow(0.5, k) * std::cos(std::numbers::pi * std::pow(3.0, k));
        double s = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int k = 0; k < 12; ++k)
                s += std::pow(0.5, k) * std::cos(kTwoPi * std::pow(3.0, k) * (z[i] + 0.5));
        const double inner = s / d - f0;
        return 10.0 * inner * inner * inner + 10.0 / d * f_pen(x);
    }
    case 17:
    case 18: {
        const double cond = p.fid == 17 ? 10.0 : 1000.0;
        const VectorXd z = lambda(dim, cond).asDiagonal() * (Q * t_asy(R * shifted, 0.5));
        return schaffer(z, x);
    }
    case 19: {
        const double c = std::max(1.0, std::sqrt(d) / 8.0);
        const VectorXd z = (c * (R * shifted)).array() + 1.0;
        double s = 0.0;
        for (int i = 0; i + 1 < dim; ++i) {
            const double a = z[i] * z[i] - z[i + 1];
            const double si = 100.0 * a * a + (z[i] - 1.0) * (z[i] - 1.0);
            s += si / 4000.0 - std::cos(si);
        }
        return 10.0 / (d - 1.0) * s + 10.0;
    }
    case 20: {
        const VectorXd two_abs = 2.0 * p.x_opt.cwiseAbs();
        const VectorXd xh = 2.0 * p.signs.cwiseProduct(x);
        VectorXd zh = xh;
        for (int i = 1; i < dim; ++i) zh[i] = xh[i] + 0.25 * (xh[i - 1] - two_abs[i - 1]);
        const VectorXd z = 100.0 * (lambda(dim, 10.0).asDiagonal() * (zh - two_abs) + two_abs);
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += z[i] * std::sin(std::sqrt(std::abs(z[i])));
        return -s / (100.0 * d) + 4.189828872724339 + 100.0 * f_pen(z / 100.0);
    }
    case 21:
    case 22:
        return gallagher(p, x);
    case 23: {
        const VectorXd z = Q * (lambda(dim, 100.0).asDiagonal() * (R * shifted));
        const double expo = 10.0 / std::pow(d, 1.2);
        double prod = 1.0;
        for (int i = 0; i < dim; ++i) {
            double s = 0.0;
            for (int j = 1; j <= 32; ++j) {
                const double t = std::ldexp(z[i], j);
                s += std::abs(t - std::nearbyint(t)) / std::ldexp(1.0, j);
            }
            prod *= std::pow(1.0 + (i + 1) * s, expo);
        }
        return 10.0 / (d * d) * prod - 10.0 / (d * d) + f_pen(x);
    }
    case 24: {
        constexpr double mu0 = 2.5;
        const double s = 1.0 - 1.0 / (2.0 * std::sqrt(d + 20.0) - 8.2);
        const double mu1 = -std::sqrt((mu0 * mu0 - 1.0) / s);
        const VectorXd xh = 2.0 * p.signs.cwiseProduct(x);
        const VectorXd z = Q * (lambda(dim, 100.0).asDiagonal() * (R * (xh.array() - mu0).matrix()));
        const double first = (xh.array() - mu0).square().sum();
        const double second = d + s * (xh.array() - mu1).square().sum();
        double c = 0.0;
        for (double v : z) c += std::cos(kTwoPi * v);
        return std::min(first, second) + 10.0 * (d - c) + 1e4 * f_pen(x);
    }
    default:
        throw InvalidProblem("unknown function id " + std::to_string(p.fid));
    }
}

}  // namespace

Eigen::MatrixXd random_rotation(int dim, std::uint64_t seed) {
    Rng rng(seed);
    MatrixXd g(dim, dim);
    for (int c = 0; c < dim; ++c)
        for (int r = 0; r < dim; ++r) g(r, c) = rng.normal();
    Eigen::HouseholderQR<MatrixXd> qr(g);
    MatrixXd q = qr.householderQ() * MatrixXd::Identity(dim, dim);
    const MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < dim; ++i)
        if (r(i, i) < 0) q.col(i) = -q.col(i);
    return q;
}

ProblemInstance make_instance(int fid, int iid, int dim) {
    if (fid < 1 || fid > kFunctionCount) throw InvalidProblem("function id out of range 1..24: " + std::to_string(fid));
    if (iid < 0) throw InvalidProblem("instance id must be >= 0: " + std::to_string(iid));
    if (dim < 2) throw InvalidProblem("dimension must be >= 2: " + std::to_string(dim));

    const std::uint64_t base = stable_hash({0xbb0bULL, std::uint64_t(fid), std::uint64_t(iid), std::uint64_t(dim)});
    auto stream = [&](Stream s) { return hash_combine(base, s); };

    ProblemInstance p;
    p.fid = fid;
    p.iid = iid;
    p.dim = dim;
    const bool base_function = iid == 0;

    p.signs = VectorXd::Ones(dim);
    if (!base_function) {
        Rng rng(stream(kSigns));
        for (auto& s : p.signs) s = rng.uniform() < 0.5 ? -1.0 : 1.0;
    }

    p.x_opt = VectorXd::Zero(dim);
    if (!base_function) {
        Rng rng(stream(kShift));
        for (auto& v : p.x_opt) v = rng.uniform(-4.0, 4.0);
    }
    switch (fid) {
    case 4:
        for (int i = 0; i < dim; i += 2) p.x_opt[i] = std::abs(p.x_opt[i]);
        break;
    case 5:
        p.x_opt = 5.0 * p.signs;
        break;
    case 20:
        p.x_opt = 0.5 * 4.2096874633 * p.signs;
        break;
    case 24:
        p.x_opt = 0.5 * 2.5 * p.signs;
        break;
    default:
        break;
    }

    if (base_function) {
        p.rotation = MatrixXd::Identity(dim, dim);
        p.rotation2 = MatrixXd::Identity(dim, dim);
        p.f_opt = 0.0;
    } else {
        p.rotation = random_rotation(dim, stream(kRot1));
        p.rotation2 = random_rotation(dim, stream(kRot2));
        Rng rng(stream(kFopt));
        p.f_opt = rng.uniform(-100.0, 100.0);
    }

    if (fid == 21) p.peaks = make_peaks(dim, 101, 1000.0, stream(kPeaks), p.x_opt);
    if (fid == 22) p.peaks = make_peaks(dim, 21, 1e6, stream(kPeaks), p.x_opt);
    return p;
}

double evaluate(const ProblemInstance& inst, const Eigen::VectorXd& x) {
    if (x.size() != inst.dim)
        throw DimensionError("point has " + std::to_string(x.size()) + " coordinates, instance has dimension " +
                             std::to_string(inst.dim));
    return raw_value(inst, x) + inst.f_opt;
}

double evaluate(const ProblemInstance& inst, std::span<const double> x) {
    if (static_cast<int>(x.size()) != inst.dim)
        throw DimensionError("point has " + std::to_string(x.size()) + " coordinates, instance has dimension " +
                             std::to_string(inst.dim));
    return evaluate(inst, Eigen::Map<const VectorXd>(x.data(), inst.dim).eval());
}

double precision(const ProblemInstance& inst, std::span<const double> x) { return evaluate(inst, x) - inst.f_opt; }

}  // namespace landsel::bbob
