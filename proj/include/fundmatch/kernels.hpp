#pragma once

#include <cstddef>
#include <span>

// Publication x call cosine kernels. The serial versions are the reference
// the OpenMP versions are tested and benchmarked against.
namespace fundmatch::kernels {

/// Row-major block of `rows` vectors of length `dim`.
struct MatrixView {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t dim = 0;

  std::span<const double> row(std::size_t i) const { return {data + i * dim, dim}; }
};

/// Plain left-to-right accumulation in double.
double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

/// (a.b)/(|a||b|), 0 when either norm is 0.
double cosine(std::span<const double> a, std::span<const double> b);

/// out[i * right.rows + j] = cosine(left.row(i), right.row(j)).
void cosine_matrix_serial(MatrixView left, MatrixView right, std::span<double> out);

/// Same contract, parallel over left rows and tiled over right rows. Each
/// output element is produced by one thread with a fixed reduction order,
/// so results do not depend on the thread count.
void cosine_matrix_omp(MatrixView left, MatrixView right, std::span<double> out);

/// Row norms; parallel, elementwise deterministic.
void row_norms(MatrixView m, std::span<double> out);

}  // namespace fundmatch::kernels
