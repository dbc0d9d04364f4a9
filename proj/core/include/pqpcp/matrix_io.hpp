#pragma once

#include <filesystem>
#include <iosfwd>

#include "pqpcp/matrix.hpp"

namespace pqpcp {

// CSV: one matrix row per line, comma separated, '.' decimal point.
// Written with 17 significant digits so doubles round-trip exactly.
DenseMatrix read_csv(std::istream& in);
void write_csv(std::ostream& out, const DenseMatrix& m);

// Binary: little-endian u64 rows, u64 cols, then rows*cols float64 in row-major order.
DenseMatrix read_binary(std::istream& in);
void write_binary(std::ostream& out, const DenseMatrix& m);

/// Chooses the binary format for a ".bin" extension and CSV otherwise.
DenseMatrix load_matrix(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const DenseMatrix& m);

} // namespace pqpcp
