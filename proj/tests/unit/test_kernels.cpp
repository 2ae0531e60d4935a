//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"

#include "chemhg/kernels.hpp"
#include "chemhg/rng.hpp"

using namespace chemhg;
using namespace chemhg::num;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, Rng& rng) {
  Tensor t(r, c);
  for (auto& x : t.data()) x = rng.uniform(-1.0, 1.0);
  return t;
}

CsrMatrix random_sparse(std::size_t r, std::size_t c, double density, Rng& rng) {
  std::vector<CsrMatrix::Triplet> t;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      if (rng.uniform() < density) t.push_back({i, j, rng.uniform(-1.0, 1.0)});
    }
  }
  return CsrMatrix::from_triplets(r, c, std::move(t));
}

Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  Tensor out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      long double s = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += static_cast<long double>(a(i, k)) * b(k, j);
      out(i, j) = static_cast<double>(s);
    }
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  Tensor t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

void check_close(const Tensor& a, const Tensor& b, double tol) {
  REQUIRE(a.same_shape(b));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= tol);
}

}  // namespace

TEST_CASE("matmul variants agree with a long double oracle") {
  Rng rng(7);
  const std::size_t dims[][3] = {{1, 1, 1}, {3, 5, 2}, {40, 33, 17}, {200, 150, 90}};
  for (const auto& [m, k, n] : dims) {
    const Tensor a = random_tensor(m, k, rng);
    const Tensor b = random_tensor(k, n, rng);
    const Tensor want = naive_matmul(a, b);
    check_close(kernels::reference::matmul(a, b), want, 1e-12);
    check_close(kernels::reference::matmul_tn(transpose(a), b), want, 1e-12);
    check_close(kernels::reference::matmul_nt(a, transpose(b)), want, 1e-12);
  }
}

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
  Rng rng(11);
  const Tensor a = random_tensor(300, 257, rng);
  const Tensor b = random_tensor(257, 130, rng);
  const Tensor at = transpose(a);
  const Tensor bt = transpose(b);
  CHECK(kernels::parallel::matmul(a, b) == kernels::reference::matmul(a, b));
  CHECK(kernels::parallel::matmul_tn(at, b) == kernels::reference::matmul_tn(at, b));
  CHECK(kernels::parallel::matmul_nt(a, bt) == kernels::reference::matmul_nt(a, bt));
  const CsrMatrix p = random_sparse(500, 257, 0.05, rng);
  CHECK(kernels::parallel::spmm(p, b) == kernels::reference::spmm(p, b));
  Tensor s1, s2;
  kernels::parallel::softmax_rows(a, s1);
  kernels::reference::softmax_rows(a, s2);
  CHECK(s1 == s2);
}

TEST_CASE("spmm matches dense product") {
  Rng rng(3);
  const CsrMatrix p = random_sparse(60, 45, 0.1, rng);
  const Tensor x = random_tensor(45, 8, rng);
  check_close(kernels::spmm(p, x), naive_matmul(p.to_dense(), x), 1e-12);
  const CsrMatrix pt = p.transposed();
  check_close(pt.to_dense(), transpose(p.to_dense()), 0.0);
}

TEST_CASE("csr construction sums duplicates and keeps columns sorted") {
  const CsrMatrix m = CsrMatrix::from_triplets(2, 3, {{1, 2, 1.0}, {0, 1, 2.0}, {1, 2, 0.5}, {1, 0, 4.0}});
  CHECK(m.nnz() == 3);
  const Tensor d = m.to_dense();
  CHECK(d(0, 1) == 2.0);
  CHECK(d(1, 2) == 1.5);
  CHECK(d(1, 0) == 4.0);
  CHECK(m.col_idx == std::vector<std::size_t>{1, 0, 2});
}

TEST_CASE("softmax rows are stable and normalized") {
  Tensor x(2, 3, std::vector<double>{1000.0, 1000.0, 1000.0, -5.0, 0.0, 5.0});
  Tensor s;
  kernels::softmax_rows(x, s);
  CHECK(s.all_finite());
  for (std::size_t r = 0; r < 2; ++r) {
    double sum = 0;
    for (double v : s.row(r)) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK(s(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(s(1, 2) > s(1, 1));
}

TEST_CASE("shape mismatches throw") {
  CHECK_THROWS_AS(kernels::matmul(Tensor(2, 3), Tensor(2, 3)), ShapeMismatch);
  CHECK_THROWS_AS(kernels::spmm(CsrMatrix::from_triplets(2, 3, {}), Tensor(2, 1)), ShapeMismatch);
}
