#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace pqpcp {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Real rows-by-cols matrix, row-major, immutable after construction.
///
/// Every constructor rejects zero dimensions (DimensionError) and non-finite
/// entries (NumericError), so a DenseMatrix that exists is always finite.
class DenseMatrix {
public:
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    explicit DenseMatrix(RowMajorMatrix values);

    static DenseMatrix zeros(std::size_t rows, std::size_t cols);
    static DenseMatrix constant(std::size_t rows, std::size_t cols, double value);
    static DenseMatrix identity(std::size_t n);
    /// rows x cols matrix with `diag` on the main diagonal (length min(rows, cols)).
    static DenseMatrix diagonal(std::span<const double> diag, std::size_t rows, std::size_t cols);
    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values_.cols()); }
    std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
    double operator()(std::size_t i, std::size_t j) const {
        return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    std::span<const double> data() const { return {values_.data(), size()}; }
    const RowMajorMatrix& eigen() const { return values_; }

    bool same_shape(const DenseMatrix& other) const {
        return rows() == other.rows() && cols() == other.cols();
    }
    DenseMatrix transpose() const;

    friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
        return a.same_shape(b) && a.values_ == b.values_;
    }

private:
    RowMajorMatrix values_;
};

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double s, const DenseMatrix& a);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

/// Thin SVD: u is m x s, vt is s x n, s = min(m, n), singular values non-increasing.
struct SvdFactors {
    DenseMatrix u;
    std::vector<double> singular_values;
    DenseMatrix vt;
};

SvdFactors svd(const DenseMatrix& a);
std::vector<double> singular_values(const DenseMatrix& a);
DenseMatrix reconstruct(const SvdFactors& f);

double frob_norm(const DenseMatrix& a);
double frob_distance(const DenseMatrix& a, const DenseMatrix& b);
double nuclear_norm(const DenseMatrix& a);

/// Relative threshold below which a singular value counts as zero.
inline constexpr double kRankTolerance = 1e-9;

/// Count of sigma_i > kRankTolerance * sigma_1; `sigma` must be sorted non-increasing.
std::size_t numerical_rank(std::span<const double> sigma);
std::size_t numerical_rank(const DenseMatrix& a);

/// I.i.d. standard-normal entries; identical seed gives an identical matrix.
DenseMatrix randn_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed);
DenseMatrix randn_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& engine);

} // namespace pqpcp
