#pragma once

// Test-only reference implementations. They deliberately avoid the library's
// solver and prox code paths and use Eigen's JacobiSVD instead of BDCSVD.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "pqpcp/matrix.hpp"

namespace oracle {

using Mat = Eigen::MatrixXd;

inline Mat to_eigen(const pqpcp::DenseMatrix& m) { return m.eigen(); }

inline Eigen::VectorXd jacobi_sigma(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues();
}

/// Brute-force minimizer of lambda*w*|x| + (x - y)^2 / 2 over `points` grid points on [-2|y|, 2|y|].
/// Returns the minimizing grid point and the grid step.
inline std::pair<double, double> scalar_grid_min(double y, double w, double lambda, std::size_t points = 1'000'000) {
    const double half = std::max(2.0 * std::abs(y), 1e-12);
    const double step = 2.0 * half / static_cast<double>(points - 1);
    double best_x = -half, best_f = INFINITY;
    for (std::size_t k = 0; k < points; ++k) {
        const double x = -half + step * static_cast<double>(k);
        const double f = lambda * w * std::abs(x) + 0.5 * (x - y) * (x - y);
        if (f < best_f) {
            best_f = f;
            best_x = x;
        }
    }
    return {best_x, step};
}

/// Classical singular value thresholding, sigma -> max(sigma - tau, 0).
inline Mat svt(const Mat& y, double tau) {
    Eigen::JacobiSVD<Mat> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd s = (svd.singularValues().array() - tau).max(0.0);
    return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

inline Mat soft(const Mat& y, double tau) {
    return y.unaryExpr([tau](double v) { return v > tau ? v - tau : (v < -tau ? v + tau : 0.0); });
}

/// lambda1 sum (sigma+eps)^p + lambda2 sum (|s|+eps)^q + 1/2 ||L+S-X||^2, written independently.
inline double relaxed_objective(const Mat& l, const Mat& s, const Mat& x, double p, double q, double lambda1,
                                double lambda2, double eps) {
    const Eigen::VectorXd sigma = jacobi_sigma(l);
    double low = 0.0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) low += std::pow(sigma(i) + eps, p);
    double sparse = 0.0;
    for (Eigen::Index j = 0; j < s.cols(); ++j)
        for (Eigen::Index i = 0; i < s.rows(); ++i) sparse += std::pow(std::abs(s(i, j)) + eps, q);
    const Mat r = l + s - x;
    double fit = 0.0;
    for (Eigen::Index j = 0; j < r.cols(); ++j)
        for (Eigen::Index i = 0; i < r.rows(); ++i) fit += r(i, j) * r(i, j);
    return lambda1 * low + lambda2 * sparse + 0.5 * fit;
}

/// p = q = 1 reference: unweighted SVT + soft threshold, Jacobi-style gradient steps from (L0, S0).
struct ConvexReference {
    Mat x, l, s;
    double lambda1, lambda2, mu1, mu2;

    void step() {
        const Mat r = l + s - x;
        Mat l_next = svt(l - r / mu1, lambda1 / mu1);
        Mat s_next = soft(s - r / mu2, lambda2 / mu2);
        l = std::move(l_next);
        s = std::move(s_next);
    }
};

/// Weighted nuclear objective lambda * sum w_i sigma_i(X) + 1/2 ||X - Y||^2.
inline double weighted_nuclear_objective(const Mat& x, const Mat& y, const std::vector<double>& w, double lambda) {
    const Eigen::VectorXd sigma = jacobi_sigma(x);
    double pen = 0.0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) pen += w[static_cast<std::size_t>(i)] * sigma(i);
    return lambda * pen + 0.5 * (x - y).squaredNorm();
}

inline Mat random_direction(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double radius) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Mat d(rows, cols);
    for (Eigen::Index i = 0; i < d.size(); ++i) d.data()[i] = normal(rng);
    return d * (radius * unit(rng) / d.norm());
}

} // namespace oracle
