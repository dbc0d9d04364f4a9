#include "pqpcp/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "pqpcp/error.hpp"

namespace pqpcp {

namespace {

void check_dims(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) {
        throw DimensionError("matrix dimensions must be positive, got " + std::to_string(rows) +
                             "x" + std::to_string(cols));
    }
}

void check_finite(const RowMajorMatrix& m) {
    if (m.allFinite()) return;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (!std::isfinite(m(i, j)))
                throw NumericError("non-finite matrix entry at (" + std::to_string(i) + ", " +
                                   std::to_string(j) + ")");
}

void check_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()));
    }
}

} // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data) {
    check_dims(rows, cols);
    if (data.size() != rows * cols) {
        throw DimensionError("data length " + std::to_string(data.size()) + " != " +
                             std::to_string(rows) + "x" + std::to_string(cols));
    }
    values_ = Eigen::Map<const RowMajorMatrix>(data.data(), static_cast<Eigen::Index>(rows),
                                               static_cast<Eigen::Index>(cols));
    check_finite(values_);
}

DenseMatrix::DenseMatrix(RowMajorMatrix values) : values_(std::move(values)) {
    check_dims(static_cast<std::size_t>(values_.rows()), static_cast<std::size_t>(values_.cols()));
    check_finite(values_);
}

DenseMatrix DenseMatrix::zeros(std::size_t rows, std::size_t cols) {
    return constant(rows, cols, 0.0);
}

DenseMatrix DenseMatrix::constant(std::size_t rows, std::size_t cols, double value) {
    check_dims(rows, cols);
    return DenseMatrix(RowMajorMatrix::Constant(static_cast<Eigen::Index>(rows),
                                                static_cast<Eigen::Index>(cols), value));
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    check_dims(n, n);
    const auto k = static_cast<Eigen::Index>(n);
    return DenseMatrix(RowMajorMatrix::Identity(k, k));
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> diag, std::size_t rows, std::size_t cols) {
    check_dims(rows, cols);
    if (diag.size() != std::min(rows, cols))
        throw DimensionError("diagonal length must be min(rows, cols)");
    RowMajorMatrix m = RowMajorMatrix::Zero(static_cast<Eigen::Index>(rows),
                                            static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < diag.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = diag[i];
    return DenseMatrix(std::move(m));
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw DimensionError("ragged row list");
        data.insert(data.end(), row.begin(), row.end());
    }
    return DenseMatrix(r, c, std::move(data));
}

DenseMatrix DenseMatrix::transpose() const {
    return DenseMatrix(RowMajorMatrix(values_.transpose()));
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
    check_same_shape(a, b, "add");
    return DenseMatrix(RowMajorMatrix(a.eigen() + b.eigen()));
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
    check_same_shape(a, b, "subtract");
    return DenseMatrix(RowMajorMatrix(a.eigen() - b.eigen()));
}

DenseMatrix operator*(double s, const DenseMatrix& a) {
    return DenseMatrix(RowMajorMatrix(s * a.eigen()));
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
    return DenseMatrix(RowMajorMatrix(a.eigen() * b.eigen()));
}

SvdFactors svd(const DenseMatrix& a) {
    const Eigen::MatrixXd m = a.eigen();
    Eigen::BDCSVD<Eigen::MatrixXd> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success)
        throw NumericError("SVD did not converge on a " + std::to_string(a.rows()) + "x" +
                           std::to_string(a.cols()) + " matrix");
    const Eigen::VectorXd& s = dec.singularValues();
    std::vector<double> sigma(s.data(), s.data() + s.size());
    if (!s.allFinite()) throw NumericError("SVD produced non-finite singular values");
    return SvdFactors{DenseMatrix(RowMajorMatrix(dec.matrixU())), std::move(sigma),
                      DenseMatrix(RowMajorMatrix(dec.matrixV().transpose()))};
}

std::vector<double> singular_values(const DenseMatrix& a) {
    const Eigen::MatrixXd m = a.eigen();
    Eigen::BDCSVD<Eigen::MatrixXd> dec(m);
    if (dec.info() != Eigen::Success) throw NumericError("singular value computation did not converge");
    const Eigen::VectorXd& s = dec.singularValues();
    return {s.data(), s.data() + s.size()};
}

DenseMatrix reconstruct(const SvdFactors& f) {
    const Eigen::Map<const Eigen::VectorXd> sigma(f.singular_values.data(),
                                                  static_cast<Eigen::Index>(f.singular_values.size()));
    return DenseMatrix(RowMajorMatrix(f.u.eigen() * sigma.asDiagonal() * f.vt.eigen()));
}

double frob_norm(const DenseMatrix& a) { return a.eigen().norm(); }

double frob_distance(const DenseMatrix& a, const DenseMatrix& b) {
    check_same_shape(a, b, "frob_distance");
    return (a.eigen() - b.eigen()).norm();
}

double nuclear_norm(const DenseMatrix& a) {
    const auto sigma = singular_values(a);
    double total = 0.0;
    for (double s : sigma) total += s;
    return total;
}

std::size_t numerical_rank(std::span<const double> sigma) {
    if (sigma.empty() || !(sigma.front() > 0.0)) return 0;
    const double cut = kRankTolerance * sigma.front();
    return static_cast<std::size_t>(
        std::count_if(sigma.begin(), sigma.end(), [cut](double s) { return s > cut; }));
}

std::size_t numerical_rank(const DenseMatrix& a) { return numerical_rank(singular_values(a)); }

DenseMatrix randn_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 engine(seed);
    return randn_matrix(rows, cols, engine);
}

DenseMatrix randn_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& engine) {
    check_dims(rows, cols);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> data(rows * cols);
    for (double& v : data) v = normal(engine);
    return DenseMatrix(rows, cols, std::move(data));
}

} // namespace pqpcp
