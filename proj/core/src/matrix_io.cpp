#include "pqpcp/matrix_io.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "pqpcp/error.hpp"

namespace pqpcp {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_field(std::string_view field, std::size_t line, std::size_t col) {
    field = trim(field);
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (!field.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (field.empty() || ec != std::errc() || ptr != last) {
        throw ParseError("malformed number '" + std::string(field) + "' at line " +
                         std::to_string(line) + ", column " + std::to_string(col));
    }
    return value;
}

bool is_bin(const std::filesystem::path& path) { return path.extension() == ".bin"; }

void put_u64(std::ostream& out, std::uint64_t v) {
    std::array<char, 8> bytes{};
    for (std::size_t i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    out.write(bytes.data(), 8);
}

std::uint64_t get_u64(std::istream& in) {
    std::array<unsigned char, 8> bytes{};
    if (!in.read(reinterpret_cast<char*>(bytes.data()), 8))
        throw ParseError("binary matrix: truncated header");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return v;
}

} // namespace

DenseMatrix read_csv(std::istream& in) {
    std::vector<double> data;
    std::size_t rows = 0, cols = 0, line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (view.empty()) continue;
        std::size_t count = 0;
        while (true) {
            const auto comma = view.find(',');
            data.push_back(parse_field(view.substr(0, comma), line_no, count + 1));
            ++count;
            if (comma == std::string_view::npos) break;
            view.remove_prefix(comma + 1);
        }
        if (rows == 0) {
            cols = count;
        } else if (count != cols) {
            throw ParseError("line " + std::to_string(line_no) + " has " + std::to_string(count) +
                             " fields, expected " + std::to_string(cols));
        }
        ++rows;
    }
    if (rows == 0) throw ParseError("CSV matrix is empty");
    try {
        return DenseMatrix(rows, cols, std::move(data));
    } catch (const NumericError& e) {
        throw ParseError(std::string("CSV matrix: ") + e.what());
    }
}

void write_csv(std::ostream& out, const DenseMatrix& m) {
    std::array<char, 32> buf{};
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out.put(',');
            const int n = std::snprintf(buf.data(), buf.size(), "%.17g", m(i, j));
            out.write(buf.data(), n);
        }
        out.put('\n');
    }
}

DenseMatrix read_binary(std::istream& in) {
    const std::uint64_t rows = get_u64(in);
    const std::uint64_t cols = get_u64(in);
    if (rows == 0 || cols == 0) throw ParseError("binary matrix: zero dimension");
    constexpr std::uint64_t kMaxEntries = std::uint64_t{1} << 34;
    if (rows > kMaxEntries / cols)
        throw ParseError("binary matrix: implausible dimensions");
    std::vector<double> data(static_cast<std::size_t>(rows * cols));
    std::array<unsigned char, 8> bytes{};
    for (double& v : data) {
        if (!in.read(reinterpret_cast<char*>(bytes.data()), 8))
            throw ParseError("binary matrix: truncated payload");
        std::uint64_t bits = 0;
        for (std::size_t i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
        std::memcpy(&v, &bits, sizeof v);
    }
    try {
        return DenseMatrix(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols), std::move(data));
    } catch (const NumericError& e) {
        throw ParseError(std::string("binary matrix: ") + e.what());
    }
}

void write_binary(std::ostream& out, const DenseMatrix& m) {
    put_u64(out, m.rows());
    put_u64(out, m.cols());
    for (double v : m.data()) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof v);
        put_u64(out, bits);
    }
}

DenseMatrix load_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open matrix file " + path.string());
    try {
        return is_bin(path) ? read_binary(in) : read_csv(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void save_matrix(const std::filesystem::path& path, const DenseMatrix& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot open " + path.string() + " for writing");
    if (is_bin(path))
        write_binary(out, m);
    else
        write_csv(out, m);
    if (!out) throw ParseError("write failed for " + path.string());
}

} // namespace pqpcp
