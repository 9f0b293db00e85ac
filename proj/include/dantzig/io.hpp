#pragma once

#include <string>

#include "dantzig/matrix.hpp"

namespace dantzig {

// Text matrices are comma-separated rows without a header. Binary matrices
// start with the magic "DKM1", then u64 n, u64 p, then n*p little-endian
// doubles in row-major order. The format is chosen by sniffing the magic.

Matrix read_matrix(const std::string& path);
void write_matrix_csv(const std::string& path, const Matrix& m);
void write_matrix_binary(const std::string& path, const Matrix& m);

/// One value per line, or a DKM1 file with a single row or column.
Vector read_vector(const std::string& path);
void write_vector_csv(const std::string& path, const Vector& v);

/// Writes `contents` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

}  // namespace dantzig
