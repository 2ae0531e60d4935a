//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "chemhg/rng.hpp"
#include "chemhg/screen.hpp"

namespace chemhg::testing {

// Six 4-d embeddings: three of them sum to exactly zero, the other three are
// random. Row order is shuffled by `seed`.
inline num::Tensor planted_instance(std::uint64_t seed, std::size_t dim = 4) {
  Rng rng(derive_seed(seed, "planted"));
  std::vector<std::vector<double>> rows(6, std::vector<double>(dim));
  for (std::size_t j = 0; j < dim; ++j) {
    rows[0][j] = rng.uniform(-1.0, 1.0);
    rows[1][j] = rng.uniform(-1.0, 1.0);
    rows[2][j] = -(rows[0][j] + rows[1][j]);
    for (std::size_t r = 3; r < 6; ++r) rows[r][j] = rng.uniform(-1.0, 1.0);
  }
  rng.shuffle(rows);
  num::Tensor t(6, dim);
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t j = 0; j < dim; ++j) t(r, j) = rows[r][j];
  }
  return t;
}

// Exhaustive minimum of the objective over all subsets of size 1..max_size.
inline std::pair<double, std::vector<std::size_t>> brute_force_min(const num::Tensor& emb,
                                                                   std::size_t max_size) {
  const std::size_t n = emb.rows();
  std::pair<double, std::vector<std::size_t>> best{1e300, {}};
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<std::size_t> sel;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) sel.push_back(i);
    }
    if (sel.size() > max_size) continue;
    const double f = screen::objective(sel, emb);
    if (f < best.first) best = {f, sel};
  }
  return best;
}

}  // namespace chemhg::testing
