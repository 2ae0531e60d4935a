//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "chemhg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace chemhg::num::kernels {
namespace {

// Below this many multiply-adds the thread fork costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 14;

void check_matmul(const Tensor& a, const Tensor& b, std::size_t ak, std::size_t bk,
                  const char* op) {
  if (ak != bk) {
    throw ShapeMismatch(std::string(op) + ": " + a.shape_str() + " vs " + b.shape_str());
  }
}

inline void row_kernel(const Tensor& a, const Tensor& b, Tensor& c, std::size_t i) {
  const std::size_t k_n = a.cols(), n = b.cols();
  double* ci = c.row(i).data();
  for (std::size_t k = 0; k < k_n; ++k) {
    const double aik = a(i, k);
    if (aik == 0.0) continue;
    const double* bk = b.row(k).data();
    for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
  }
}

inline void row_kernel_tn(const Tensor& a, const Tensor& b, Tensor& c, std::size_t i) {
  const std::size_t k_n = a.rows(), n = b.cols();
  double* ci = c.row(i).data();
  for (std::size_t k = 0; k < k_n; ++k) {
    const double aki = a(k, i);
    if (aki == 0.0) continue;
    const double* bk = b.row(k).data();
    for (std::size_t j = 0; j < n; ++j) ci[j] += aki * bk[j];
  }
}

inline void row_kernel_nt(const Tensor& a, const Tensor& b, Tensor& c, std::size_t i) {
  const std::size_t k_n = a.cols(), n = b.rows();
  const double* ai = a.row(i).data();
  for (std::size_t j = 0; j < n; ++j) {
    const double* bj = b.row(j).data();
    double s = 0.0;
    for (std::size_t k = 0; k < k_n; ++k) s += ai[k] * bj[k];
    c(i, j) = s;
  }
}

inline void row_kernel_sp(const CsrMatrix& p, const Tensor& x, Tensor& out, std::size_t r) {
  const std::size_t n = x.cols();
  double* o = out.row(r).data();
  for (std::size_t k = p.row_ptr[r]; k < p.row_ptr[r + 1]; ++k) {
    const double v = p.values[k];
    const double* xr = x.row(p.col_idx[k]).data();
    for (std::size_t j = 0; j < n; ++j) o[j] += v * xr[j];
  }
}

inline void row_softmax(const Tensor& x, Tensor& out, std::size_t r) {
  const auto in = x.row(r);
  auto o = out.row(r);
  double mx = -INFINITY;
  for (double v : in) mx = std::max(mx, v);
  double sum = 0.0;
  for (std::size_t j = 0; j < in.size(); ++j) {
    o[j] = std::exp(in[j] - mx);
    sum += o[j];
  }
  for (double& v : o) v /= sum;
}

void check_spmm(const CsrMatrix& p, const Tensor& x) {
  if (p.cols != x.rows()) {
    throw ShapeMismatch("spmm: sparse " + std::to_string(p.rows) + "x" +
                        std::to_string(p.cols) + " vs " + x.shape_str());
  }
}

}  // namespace

namespace reference {

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_matmul(a, b, a.cols(), b.rows(), "matmul");
  Tensor c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) row_kernel(a, b, c, i);
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  check_matmul(a, b, a.rows(), b.rows(), "matmul_tn");
  Tensor c(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) row_kernel_tn(a, b, c, i);
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  check_matmul(a, b, a.cols(), b.cols(), "matmul_nt");
  Tensor c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) row_kernel_nt(a, b, c, i);
  return c;
}

Tensor spmm(const CsrMatrix& p, const Tensor& x) {
  check_spmm(p, x);
  Tensor out(p.rows, x.cols());
  for (std::size_t r = 0; r < p.rows; ++r) row_kernel_sp(p, x, out, r);
  return out;
}

void softmax_rows(const Tensor& x, Tensor& out) {
  out = Tensor(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) row_softmax(x, out, r);
}

}  // namespace reference

namespace parallel {

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_matmul(a, b, a.cols(), b.rows(), "matmul");
  Tensor c(a.rows(), b.cols());
  const auto n = static_cast<std::int64_t>(a.rows());
  const bool go = a.rows() * a.cols() * b.cols() > kParallelWork;
#pragma omp parallel for schedule(static) if (go)
  for (std::int64_t i = 0; i < n; ++i) row_kernel(a, b, c, static_cast<std::size_t>(i));
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  check_matmul(a, b, a.rows(), b.rows(), "matmul_tn");
  Tensor c(a.cols(), b.cols());
  const auto n = static_cast<std::int64_t>(a.cols());
  const bool go = a.rows() * a.cols() * b.cols() > kParallelWork;
#pragma omp parallel for schedule(static) if (go)
  for (std::int64_t i = 0; i < n; ++i) row_kernel_tn(a, b, c, static_cast<std::size_t>(i));
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  check_matmul(a, b, a.cols(), b.cols(), "matmul_nt");
  Tensor c(a.rows(), b.rows());
  const auto n = static_cast<std::int64_t>(a.rows());
  const bool go = a.rows() * a.cols() * b.rows() > kParallelWork;
#pragma omp parallel for schedule(static) if (go)
  for (std::int64_t i = 0; i < n; ++i) row_kernel_nt(a, b, c, static_cast<std::size_t>(i));
  return c;
}

Tensor spmm(const CsrMatrix& p, const Tensor& x) {
  check_spmm(p, x);
  Tensor out(p.rows, x.cols());
  const auto n = static_cast<std::int64_t>(p.rows);
  const bool go = p.nnz() * x.cols() > kParallelWork;
#pragma omp parallel for schedule(dynamic, 16) if (go)
  for (std::int64_t r = 0; r < n; ++r) row_kernel_sp(p, x, out, static_cast<std::size_t>(r));
  return out;
}

void softmax_rows(const Tensor& x, Tensor& out) {
  out = Tensor(x.rows(), x.cols());
  const auto n = static_cast<std::int64_t>(x.rows());
  const bool go = x.size() > kParallelWork;
#pragma omp parallel for schedule(static) if (go)
  for (std::int64_t r = 0; r < n; ++r) row_softmax(x, out, static_cast<std::size_t>(r));
}

}  // namespace parallel

}  // namespace chemhg::num::kernels
