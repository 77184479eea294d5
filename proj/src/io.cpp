#include "npsolve/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace npsolve {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename failed: " + path);
}

void write_matrix(const std::string& path, const CsrMatrix& A) {
  std::ostringstream out;
  out << A.n_rows() << ' ' << A.n_cols() << ' ' << A.nnz() << '\n';
  const auto& off = A.row_offsets();
  const auto& col = A.col_indices();
  const auto& val = A.values();
  for (int i = 0; i < A.n_rows(); ++i)
    for (std::int64_t k = off[i]; k < off[i + 1]; ++k)
      out << i << ' ' << col[k] << ' ' << format_double(val[k]) << '\n';
  write_file_atomic(path, out.str());
}

CsrMatrix read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file: " + path);
  int n_rows = 0, n_cols = 0;
  std::int64_t nnz = 0;
  if (!(in >> n_rows >> n_cols >> nnz))
    throw std::runtime_error("malformed matrix header: " + path);
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(nnz));
  for (std::int64_t k = 0; k < nnz; ++k) {
    Triplet t{};
    if (!(in >> t.row >> t.col >> t.value))
      throw std::runtime_error("malformed matrix triple in " + path);
    trips.push_back(t);
  }
  return CsrMatrix::from_triplets(n_rows, n_cols, std::move(trips));
}

void write_vector(const std::string& path, const DenseVector& v) {
  std::ostringstream out;
  for (double x : v) out << format_double(x) << '\n';
  write_file_atomic(path, out.str());
}

DenseVector read_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vector file: " + path);
  DenseVector v;
  double x;
  while (in >> x) v.push_back(x);
  return v;
}

}  // namespace npsolve
