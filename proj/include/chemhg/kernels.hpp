//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "chemhg/tensor.hpp"

// Dense and sparse products used by the tape. `reference` is the plain
// serial implementation kept as the testing oracle; `parallel` splits output
// rows across OpenMP threads. Both accumulate every output element in the
// same order, so their results are bit-identical.
namespace chemhg::num::kernels {

namespace reference {
Tensor matmul(const Tensor& a, const Tensor& b);     // a b
Tensor matmul_tn(const Tensor& a, const Tensor& b);  // a^T b
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // a b^T
Tensor spmm(const CsrMatrix& p, const Tensor& x);    // p x
void softmax_rows(const Tensor& x, Tensor& out);
}  // namespace reference

namespace parallel {
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matmul_tn(const Tensor& a, const Tensor& b);
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor spmm(const CsrMatrix& p, const Tensor& x);
void softmax_rows(const Tensor& x, Tensor& out);
}  // namespace parallel

// Entry points used by the library.
inline Tensor matmul(const Tensor& a, const Tensor& b) { return parallel::matmul(a, b); }
inline Tensor matmul_tn(const Tensor& a, const Tensor& b) { return parallel::matmul_tn(a, b); }
inline Tensor matmul_nt(const Tensor& a, const Tensor& b) { return parallel::matmul_nt(a, b); }
inline Tensor spmm(const CsrMatrix& p, const Tensor& x) { return parallel::spmm(p, x); }
inline void softmax_rows(const Tensor& x, Tensor& out) { parallel::softmax_rows(x, out); }

}  // namespace chemhg::num::kernels
