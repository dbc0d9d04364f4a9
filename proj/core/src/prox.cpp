#include "pqpcp/prox.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "pqpcp/error.hpp"

namespace pqpcp {

namespace {

void check_lambda(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw InvariantError("threshold scale lambda must be positive and finite");
}

} // namespace

WeightVector::WeightVector(std::vector<double> weights) : weights_(std::move(weights)) {
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        const double w = weights_[i];
        if (!std::isfinite(w) || w < 0.0)
            throw InvariantError("weight " + std::to_string(i) + " is negative or non-finite");
        if (i > 0 && w < weights_[i - 1])
            throw InvariantError("weights must be non-decreasing (w[" + std::to_string(i) +
                                 "] < w[" + std::to_string(i - 1) + "])");
    }
}

WeightVector WeightVector::uniform(std::size_t length, double value) {
    return WeightVector(std::vector<double>(length, value));
}

WeightMatrix::WeightMatrix(DenseMatrix weights) : weights_(std::move(weights)) {
    for (double w : weights_.data())
        if (w < 0.0) throw InvariantError("weight matrix entries must be nonnegative");
}

WeightMatrix WeightMatrix::uniform(std::size_t rows, std::size_t cols, double value) {
    return WeightMatrix(DenseMatrix::constant(rows, cols, value));
}

ThresholdedSvd weighted_svt(const DenseMatrix& y, const WeightVector& weights, double lambda) {
    check_lambda(lambda);
    const std::size_t s = std::min(y.rows(), y.cols());
    if (weights.size() != s)
        throw DimensionError("weight vector length " + std::to_string(weights.size()) +
                             " != min(m, n) = " + std::to_string(s));

    const Eigen::MatrixXd m = y.eigen();
    Eigen::BDCSVD<Eigen::MatrixXd> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success) throw NumericError("SVD did not converge in weighted SVT");

    const Eigen::VectorXd& sigma = dec.singularValues();
    std::vector<double> shrunk(s);
    Eigen::Index keep = 0;
    for (std::size_t i = 0; i < s; ++i) {
        shrunk[i] = std::max(sigma(static_cast<Eigen::Index>(i)) - lambda * weights[i], 0.0);
        if (shrunk[i] > 0.0) keep = static_cast<Eigen::Index>(i) + 1;
    }

    // Shrunk values are non-increasing, so only the leading `keep` triplets contribute.
    RowMajorMatrix out = RowMajorMatrix::Zero(m.rows(), m.cols());
    if (keep > 0) {
        const Eigen::Map<const Eigen::VectorXd> d(shrunk.data(), keep);
        out.noalias() = dec.matrixU().leftCols(keep) * d.asDiagonal() *
                        dec.matrixV().leftCols(keep).transpose();
    }
    return ThresholdedSvd{DenseMatrix(std::move(out)), std::move(shrunk)};
}

DenseMatrix prox_weighted_svt(const DenseMatrix& y, const WeightVector& weights, double lambda) {
    return weighted_svt(y, weights, lambda).matrix;
}

DenseMatrix prox_weighted_shrink(const DenseMatrix& y, const WeightMatrix& weights, double lambda) {
    check_lambda(lambda);
    if (!y.same_shape(weights.matrix()))
        throw DimensionError("weight matrix shape does not match input");
    const auto& yv = y.eigen();
    const auto& wv = weights.matrix().eigen();
    RowMajorMatrix out(yv.rows(), yv.cols());
    for (Eigen::Index i = 0; i < yv.size(); ++i)
        out.data()[i] = shrink_scalar(yv.data()[i], lambda * wv.data()[i]);
    return DenseMatrix(std::move(out));
}

} // namespace pqpcp
