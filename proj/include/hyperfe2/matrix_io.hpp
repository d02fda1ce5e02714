#pragma once

// Binary dense-matrix container shared by snapshots and bases.
//
//   bytes 0..7   magic "HPRSNAP1"
//   u32          rows
//   u32          cols
//   u8           kind
//   rows*cols    f64, row-major
//
// All integers and floats are little-endian.

#include "hyperfe2/common.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace hyperfe2 {

enum class MatrixKind : std::uint8_t {
    strain = 0,
    energy = 1,
    internal = 2,
    strain_basis = 3,
    energy_basis = 4,
    internal_basis = 5,
};

inline constexpr char kMatrixMagic[8] = {'H', 'P', 'R', 'S', 'N', 'A', 'P', '1'};

namespace detail {

template <class T>
void put_le(std::vector<char>& buf, T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    buf.insert(buf.end(), bytes, bytes + sizeof(T));
}

template <class T>
T get_le(const char* p) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

inline std::vector<char> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace detail

inline std::vector<char> encode_matrix(const Matrix& m, MatrixKind kind) {
    if (m.rows() > std::numeric_limits<std::uint32_t>::max() || m.cols() > std::numeric_limits<std::uint32_t>::max())
        throw FormatError("matrix too large for the container");
    std::vector<char> buf(kMatrixMagic, kMatrixMagic + 8);
    buf.reserve(17 + 8 * m.size());
    detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(m.rows()));
    detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(m.cols()));
    buf.push_back(static_cast<char>(kind));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) detail::put_le<double>(buf, m(i, j));
    return buf;
}

struct DecodedMatrix {
    Matrix matrix;
    MatrixKind kind;
};

inline DecodedMatrix decode_matrix(const std::vector<char>& buf) {
    if (buf.size() < 17 || std::memcmp(buf.data(), kMatrixMagic, 8) != 0)
        throw FormatError("bad matrix magic");
    const auto rows = detail::get_le<std::uint32_t>(buf.data() + 8);
    const auto cols = detail::get_le<std::uint32_t>(buf.data() + 12);
    const auto kind = static_cast<std::uint8_t>(buf[16]);
    if (kind > 5) throw FormatError("unknown matrix kind " + std::to_string(kind));
    const std::size_t expected = 17 + 8ull * rows * cols;
    if (buf.size() != expected) throw FormatError("matrix payload size mismatch");
    DecodedMatrix out{Matrix(rows, cols), static_cast<MatrixKind>(kind)};
    const char* p = buf.data() + 17;
    for (std::uint32_t i = 0; i < rows; ++i)
        for (std::uint32_t j = 0; j < cols; ++j, p += 8) out.matrix(i, j) = detail::get_le<double>(p);
    return out;
}

inline void write_matrix(const std::filesystem::path& path, const Matrix& m, MatrixKind kind) {
    const auto buf = encode_matrix(m, kind);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw FormatError("short write to " + path.string());
}

inline DecodedMatrix read_matrix(const std::filesystem::path& path) {
    return decode_matrix(detail::read_file_bytes(path));
}

inline Matrix read_matrix(const std::filesystem::path& path, MatrixKind expected) {
    auto d = read_matrix(path);
    if (d.kind != expected) throw FormatError(path.string() + ": unexpected matrix kind");
    return std::move(d.matrix);
}

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const char* data, std::size_t n) {
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string file_hash(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(bytes.data(), bytes.size());
    return os.str();
}

}  // namespace hyperfe2
