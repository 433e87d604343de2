#pragma once

// Little-endian binary encoding shared by every serialized artifact.

#include "slrfr/core.hpp"

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

namespace slrfr::binary {

void write_magic(std::ostream& out, std::string_view magic);
void write_u32(std::ostream& out, std::uint32_t value);
void write_u64(std::ostream& out, std::uint64_t value);
void write_f64(std::ostream& out, double value);
void write_string(std::ostream& out, std::string_view text);
// Column-major scalars, no shape prefix.
void write_matrix_values(std::ostream& out, const Matrix& m);
// u32 rows, u32 cols, then values.
void write_matrix(std::ostream& out, const Matrix& m);
void write_vector(std::ostream& out, const Vector& v);

// Throws DataError when the magic does not match.
void expect_magic(std::istream& in, std::string_view magic);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);
std::string read_string(std::istream& in);
Matrix read_matrix_values(std::istream& in, Index rows, Index cols);
Matrix read_matrix(std::istream& in);
Vector read_vector(std::istream& in);

}  // namespace slrfr::binary
