#pragma once

/// Text formats used for all on-disk exchange:
///  - matrix: header "n_rows n_cols nnz", then one "row col value" triple per
///    line, 0-indexed. Readers accept unsorted/duplicated triples and
///    canonicalize; writers emit canonical order.
///  - vector: one real per line.
/// Values are printed with 17 significant digits so round-trips are exact.

#include <string>

#include "npsolve/csr.hpp"
#include "npsolve/vec.hpp"

namespace npsolve {

std::string format_double(double v);

void write_matrix(const std::string& path, const CsrMatrix& A);
CsrMatrix read_matrix(const std::string& path);

void write_vector(const std::string& path, const DenseVector& v);
DenseVector read_vector(const std::string& path);

/// Writes content to a temporary file in the same directory and renames it
/// into place, so readers never observe a partial file.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace npsolve
