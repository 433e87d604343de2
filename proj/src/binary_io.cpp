#include "slrfr/binary_io.hpp"

#include <array>
#include <bit>
#include <cstring>

namespace slrfr::binary {
namespace {

constexpr std::uint32_t kMaxStringBytes = 1u << 20;
constexpr std::uint64_t kMaxMatrixEntries = 1ull << 32;

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw DataError("unexpected end of binary stream");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(bytes[i]) << (8 * i);
  }
  return value;
}

}  // namespace

void write_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

void write_u32(std::ostream& out, std::uint32_t value) { put_le(out, value); }
void write_u64(std::ostream& out, std::uint64_t value) { put_le(out, value); }

void write_f64(std::ostream& out, double value) {
  put_le(out, std::bit_cast<std::uint64_t>(value));
}

void write_string(std::ostream& out, std::string_view text) {
  write_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

void write_matrix_values(std::ostream& out, const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) write_f64(out, m(i, j));
  }
}

void write_matrix(std::ostream& out, const Matrix& m) {
  write_u32(out, static_cast<std::uint32_t>(m.rows()));
  write_u32(out, static_cast<std::uint32_t>(m.cols()));
  write_matrix_values(out, m);
}

void write_vector(std::ostream& out, const Vector& v) {
  write_u32(out, static_cast<std::uint32_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) write_f64(out, v(i));
}

void expect_magic(std::istream& in, std::string_view magic) {
  std::string got(magic.size(), '\0');
  in.read(got.data(), static_cast<std::streamsize>(got.size()));
  if (!in || got != magic) {
    throw DataError("bad magic: expected \"" + std::string(magic) + "\"");
  }
}

std::uint32_t read_u32(std::istream& in) { return get_le<std::uint32_t>(in); }
std::uint64_t read_u64(std::istream& in) { return get_le<std::uint64_t>(in); }

double read_f64(std::istream& in) {
  return std::bit_cast<double>(get_le<std::uint64_t>(in));
}

std::string read_string(std::istream& in) {
  const std::uint32_t n = read_u32(in);
  if (n > kMaxStringBytes) throw DataError("string length out of range");
  std::string text(n, '\0');
  in.read(text.data(), n);
  if (!in) throw DataError("unexpected end of binary stream");
  return text;
}

Matrix read_matrix_values(std::istream& in, Index rows, Index cols) {
  if (static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols) >
      kMaxMatrixEntries) {
    throw DataError("matrix size out of range");
  }
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = read_f64(in);
  }
  return m;
}

Matrix read_matrix(std::istream& in) {
  const Index rows = read_u32(in);
  const Index cols = read_u32(in);
  return read_matrix_values(in, rows, cols);
}

Vector read_vector(std::istream& in) {
  const Index n = read_u32(in);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = read_f64(in);
  return v;
}

}  // namespace slrfr::binary
