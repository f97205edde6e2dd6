#include "fundmatch/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fundmatch::kernels {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

void cosine_matrix_serial(MatrixView left, MatrixView right, std::span<double> out) {
  if (left.dim != right.dim) throw std::invalid_argument("cosine_matrix: dimension mismatch");
  if (out.size() != left.rows * right.rows) throw std::invalid_argument("cosine_matrix: output size");
  for (std::size_t i = 0; i < left.rows; ++i)
    for (std::size_t j = 0; j < right.rows; ++j) out[i * right.rows + j] = cosine(left.row(i), right.row(j));
}

namespace {

inline double simd_dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
#pragma omp simd reduction(+ : acc)
  for (std::size_t k = 0; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

}  // namespace

void row_norms(MatrixView m, std::span<double> out) {
  const auto rows = static_cast<std::ptrdiff_t>(m.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const double* r = m.data + static_cast<std::size_t>(i) * m.dim;
    out[static_cast<std::size_t>(i)] = std::sqrt(simd_dot(r, r, m.dim));
  }
}

void cosine_matrix_omp(MatrixView left, MatrixView right, std::span<double> out) {
  if (left.dim != right.dim) throw std::invalid_argument("cosine_matrix: dimension mismatch");
  if (out.size() != left.rows * right.rows) throw std::invalid_argument("cosine_matrix: output size");
  std::vector<double> left_norm(left.rows);
  std::vector<double> right_norm(right.rows);
  row_norms(left, left_norm);
  row_norms(right, right_norm);

  // Right-hand tile sized to stay in L2 alongside one left row.
  constexpr std::size_t kTileBytes = 256 * 1024;
  const std::size_t tile = std::max<std::size_t>(1, kTileBytes / (sizeof(double) * std::max<std::size_t>(1, left.dim)));
  const std::size_t dim = left.dim;
  const std::size_t n_right = right.rows;
  const auto n_left = static_cast<std::ptrdiff_t>(left.rows);

  for (std::size_t j0 = 0; j0 < n_right; j0 += tile) {
    const std::size_t j1 = std::min(n_right, j0 + tile);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t si = 0; si < n_left; ++si) {
      const auto i = static_cast<std::size_t>(si);
      const double* a = left.data + i * dim;
      double* dst = out.data() + i * n_right;
      for (std::size_t j = j0; j < j1; ++j) {
        const double denom = left_norm[i] * right_norm[j];
        dst[j] = denom == 0.0 ? 0.0 : simd_dot(a, right.data + j * dim, dim) / denom;
      }
    }
  }
}

}  // namespace fundmatch::kernels
