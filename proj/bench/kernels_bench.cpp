//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "chemhg/kernels.hpp"
#include "chemhg/rng.hpp"

namespace {

using chemhg::num::CsrMatrix;
using chemhg::num::Tensor;
namespace k = chemhg::num::kernels;

Tensor random_tensor(std::size_t r, std::size_t c, std::uint64_t seed) {
  chemhg::Rng rng(seed);
  Tensor t(r, c);
  for (auto& x : t.data()) x = rng.uniform(-1.0, 1.0);
  return t;
}

CsrMatrix random_sparse(std::size_t n, std::size_t per_row, std::uint64_t seed) {
  chemhg::Rng rng(seed);
  std::vector<CsrMatrix::Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < per_row; ++j) t.push_back({i, rng.index(n), rng.uniform()});
  }
  return CsrMatrix::from_triplets(n, n, std::move(t));
}

template <Tensor (*F)(const Tensor&, const Tensor&)>
void BM_matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_tensor(n, 2048 / 8, 1);
  const Tensor b = random_tensor(2048 / 8, 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(F(a, b));
  state.SetItemsProcessed(state.iterations() * n * 256 * 64);
}

template <Tensor (*F)(const CsrMatrix&, const Tensor&)>
void BM_spmm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const CsrMatrix p = random_sparse(n, 12, 3);
  const Tensor x = random_tensor(n, 64, 4);
  for (auto _ : state) benchmark::DoNotOptimize(F(p, x));
  state.SetItemsProcessed(state.iterations() * p.nnz() * 64);
}

BENCHMARK(BM_matmul<k::reference::matmul>)->Arg(256)->Arg(2048);
BENCHMARK(BM_matmul<k::parallel::matmul>)->Arg(256)->Arg(2048);
BENCHMARK(BM_spmm<k::reference::spmm>)->Arg(1000)->Arg(20000);
BENCHMARK(BM_spmm<k::parallel::spmm>)->Arg(1000)->Arg(20000);

}  // namespace

BENCHMARK_MAIN();
