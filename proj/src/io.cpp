#include "dantzig/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "dantzig/errors.hpp"

namespace dantzig {

namespace {

constexpr char kMagic[4] = {'D', 'K', 'M', '1'};

static_assert(std::endian::native == std::endian::little,
              "binary matrix I/O assumes a little-endian host");

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double parse_number(std::string_view field, const std::string& path,
                    std::size_t line) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
    field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' ||
                            field.back() == '\r'))
    field.remove_suffix(1);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || end != field.data() + field.size())
    throw InvalidArgument(path + ":" + std::to_string(line) +
                          ": cannot parse '" + std::string(field) + "'");
  if (!std::isfinite(v))
    throw InvalidArgument(path + ":" + std::to_string(line) +
                          ": non-finite value");
  return v;
}

Matrix parse_binary(const std::string& data, const std::string& path) {
  if (data.size() < 20) throw InvalidArgument(path + ": truncated DKM1 header");
  std::uint64_t n, p;
  std::memcpy(&n, data.data() + 4, 8);
  std::memcpy(&p, data.data() + 12, 8);
  if (n == 0 || p == 0 || n > (1ULL << 32) || p > (1ULL << 32))
    throw InvalidArgument(path + ": invalid DKM1 shape");
  if (data.size() != 20 + 8 * n * p)
    throw InvalidArgument(path + ": DKM1 payload has " +
                          std::to_string(data.size() - 20) + " bytes, expected " +
                          std::to_string(8 * n * p));
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  const char* cursor = data.data() + 20;
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t j = 0; j < p; ++j, cursor += 8) {
      double v;
      std::memcpy(&v, cursor, 8);
      if (!std::isfinite(v))
        throw InvalidArgument(path + ": non-finite value in DKM1 payload");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  return m;
}

Matrix parse_csv(const std::string& data, const std::string& path) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0, start = 0;
  while (start < data.size()) {
    std::size_t stop = data.find('\n', start);
    if (stop == std::string::npos) stop = data.size();
    std::string_view line(data.data() + start, stop - start);
    start = stop + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (true) {
      std::size_t comma = line.find(',', pos);
      row.push_back(parse_number(line.substr(pos, comma - pos), path, line_no));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw InvalidArgument(path + ":" + std::to_string(line_no) + ": row has " +
                            std::to_string(row.size()) + " fields, expected " +
                            std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidArgument(path + ": empty matrix file");
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

}  // namespace

Matrix read_matrix(const std::string& path) {
  std::string data = slurp(path);
  if (data.size() >= 4 && std::memcmp(data.data(), kMagic, 4) == 0)
    return parse_binary(data, path);
  return parse_csv(data, path);
}

Vector read_vector(const std::string& path) {
  Matrix m = read_matrix(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw InvalidArgument(path + ": expected a vector, found " +
                        std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()) + " matrix");
}

std::string format_double(double v) {
  std::array<char, 32> buf;
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + tmp.string());
    out << contents;
    if (!out) throw InvalidArgument("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw InvalidArgument("cannot rename onto " + path + ": " + ec.message());
  }
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

void write_matrix_binary(const std::string& path, const Matrix& m) {
  std::string out(kMagic, 4);
  std::uint64_t n = static_cast<std::uint64_t>(m.rows());
  std::uint64_t p = static_cast<std::uint64_t>(m.cols());
  out.append(reinterpret_cast<const char*>(&n), 8);
  out.append(reinterpret_cast<const char*>(&p), 8);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double v = m(i, j);
      out.append(reinterpret_cast<const char*>(&v), 8);
    }
  write_file_atomic(path, out);
}

void write_vector_csv(const std::string& path, const Vector& v) {
  write_matrix_csv(path, Matrix(v));
}

}  // namespace dantzig
