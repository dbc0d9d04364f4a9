#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pqpcp/matrix.hpp"

namespace pqpcp {

/// Per-singular-value weights, nonnegative and non-decreasing.
///
/// The order matters: the weighted SVT closed form is only a global minimizer
/// when w_1 <= w_2 <= ... <= w_s. Construction throws InvariantError otherwise.
class WeightVector {
public:
    explicit WeightVector(std::vector<double> weights);
    static WeightVector uniform(std::size_t length, double value);

    std::size_t size() const { return weights_.size(); }
    double operator[](std::size_t i) const { return weights_[i]; }
    std::span<const double> values() const { return weights_; }

private:
    std::vector<double> weights_;
};

/// Element-wise weights for the sparse part; all entries nonnegative.
class WeightMatrix {
public:
    explicit WeightMatrix(DenseMatrix weights);
    static WeightMatrix uniform(std::size_t rows, std::size_t cols, double value);

    std::size_t rows() const { return weights_.rows(); }
    std::size_t cols() const { return weights_.cols(); }
    const DenseMatrix& matrix() const { return weights_; }

private:
    DenseMatrix weights_;
};

/// Scalar soft threshold: sign(y) * max(|y| - t, 0).
inline double shrink_scalar(double y, double threshold) {
    if (y > threshold) return y - threshold;
    if (y < -threshold) return y + threshold;
    return 0.0;
}

/// Result of a weighted SVT together with the singular values of the output.
struct ThresholdedSvd {
    DenseMatrix matrix;
    std::vector<double> singular_values; ///< non-increasing, length min(m, n)
};

/// argmin_X lambda * sum_i w_i sigma_i(X) + 1/2 ||X - Y||_F^2, i.e. U diag((sigma - lambda w)_+) V^T.
ThresholdedSvd weighted_svt(const DenseMatrix& y, const WeightVector& weights, double lambda);

DenseMatrix prox_weighted_svt(const DenseMatrix& y, const WeightVector& weights, double lambda);

/// Element-wise argmin_x lambda * w |x| + 1/2 (x - y)^2.
DenseMatrix prox_weighted_shrink(const DenseMatrix& y, const WeightMatrix& weights, double lambda);

} // namespace pqpcp
