#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fundmatch/kernels.hpp"
#include "fundmatch/parallel.hpp"

using namespace fundmatch::kernels;

namespace {

std::vector<double> random_matrix(std::size_t rows, std::size_t dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> m(rows * dim);
  for (auto& x : m) x = g(rng);
  return m;
}

}  // namespace

TEST(Cosine, HandValues) {
  std::vector<double> v{0.3, -1.2, 4.0};
  EXPECT_NEAR(cosine(v, v), 1.0, 1e-15);
  EXPECT_EQ(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  EXPECT_NEAR(cosine(std::vector<double>{1, 0}, std::vector<double>{1, 1}), 0.70710678, 1e-8);
  EXPECT_EQ(cosine(std::vector<double>{0, 0}, std::vector<double>{1, 1}), 0.0);
  EXPECT_THROW(cosine(std::vector<double>{1}, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST(CosineMatrix, OmpMatchesSerial) {
  for (auto [rows, cols, dim] : {std::tuple{1, 1, 1}, {7, 3, 5}, {50, 40, 96}, {3, 700, 768}}) {
    auto l = random_matrix(rows, dim, 1), r = random_matrix(cols, dim, 2);
    std::fill(l.begin(), l.begin() + dim, 0.0);  // a zero row
    MatrixView L{l.data(), static_cast<std::size_t>(rows), static_cast<std::size_t>(dim)};
    MatrixView R{r.data(), static_cast<std::size_t>(cols), static_cast<std::size_t>(dim)};
    std::vector<double> a(rows * cols), b(rows * cols);
    cosine_matrix_serial(L, R, a);
    cosine_matrix_omp(L, R, b);
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12) << k;
    for (int j = 0; j < cols; ++j) EXPECT_EQ(b[j], 0.0);
  }
}

TEST(CosineMatrix, OmpIsIndependentOfThreadCount) {
  auto l = random_matrix(97, 64, 3), r = random_matrix(300, 64, 4);
  MatrixView L{l.data(), 97, 64}, R{r.data(), 300, 64};
  std::vector<double> ref(97 * 300);
  fundmatch::parallel::set_max_threads(1);
  cosine_matrix_omp(L, R, ref);
  for (int t : {2, 3, 4, 8}) {
    fundmatch::parallel::set_max_threads(t);
    std::vector<double> out(ref.size());
    cosine_matrix_omp(L, R, out);
    EXPECT_EQ(out, ref) << t << " threads";
  }
  fundmatch::parallel::set_max_threads(0);
}

TEST(CosineMatrix, ShapeErrors) {
  std::vector<double> l(6), r(6), out(4);
  EXPECT_THROW(cosine_matrix_omp({l.data(), 2, 3}, {r.data(), 3, 2}, out), std::invalid_argument);
  EXPECT_THROW(cosine_matrix_serial({l.data(), 2, 3}, {r.data(), 2, 3}, std::span<double>(out.data(), 3)),
               std::invalid_argument);
}

TEST(RowNorms, MatchSerialNorm) {
  auto m = random_matrix(20, 33, 5);
  std::vector<double> out(20);
  row_norms({m.data(), 20, 33}, out);
  for (std::size_t i = 0; i < 20; ++i)
    EXPECT_NEAR(out[i], norm(std::span<const double>(m.data() + i * 33, 33)), 1e-12);
}

TEST(Parallel, FirstErrorRethrowsAfterRegion) {
  fundmatch::parallel::FirstError err;
#pragma omp parallel for
  for (int i = 0; i < 100; ++i)
    err.run([&] {
      if (i == 42) throw std::runtime_error("item 42");
    });
  EXPECT_THROW(err.rethrow(), std::runtime_error);
}
