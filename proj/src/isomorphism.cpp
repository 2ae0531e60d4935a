//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "chemhg/isomorphism.hpp"

#include <algorithm>
#include <cstdint>

#include "chemhg/fingerprint.hpp"
#include "chemhg/valence.hpp"

namespace chemhg::mol {
namespace {

std::vector<std::uint64_t> colors(const MolGraph& m) {
  // Refinement with map numbers folded in so mapped atoms only meet their
  // own number.
  auto inv = atom_invariants(m, std::min(m.num_atoms(), 6));
  for (int i = 0; i < m.num_atoms(); ++i) {
    inv[i] ^= static_cast<std::uint64_t>(m.atoms[i].map_num) * 0x9e3779b97f4a7c15ULL;
  }
  return inv;
}

class Matcher {
 public:
  Matcher(const MolGraph& a, const MolGraph& b)
      : a_(a), b_(b), adj_a_(adjacency(a)), adj_b_(adjacency(b)),
        col_a_(colors(a)), col_b_(colors(b)),
        map_ab_(a.num_atoms(), -1), map_ba_(b.num_atoms(), -1) {
    // Visit atoms of `a` in BFS order so every step after the first extends
    // a connected partial match.
    std::vector<bool> seen(a.num_atoms(), false);
    for (int r = 0; r < a.num_atoms(); ++r) {
      if (seen[r]) continue;
      std::vector<int> q{r};
      seen[r] = true;
      for (std::size_t k = 0; k < q.size(); ++k) {
        order_.push_back(q[k]);
        for (const Neighbor& nb : adj_a_[q[k]]) {
          if (!seen[nb.atom]) {
            seen[nb.atom] = true;
            q.push_back(nb.atom);
          }
        }
      }
    }
  }

  bool solve() { return extend(0); }
  const std::vector<int>& mapping() const { return map_ab_; }

 private:
  bool extend(std::size_t depth) {
    if (depth == order_.size()) return true;
    const int u = order_[depth];
    for (int v = 0; v < b_.num_atoms(); ++v) {
      if (map_ba_[v] >= 0 || col_a_[u] != col_b_[v]) continue;
      if (!feasible(u, v)) continue;
      map_ab_[u] = v;
      map_ba_[v] = u;
      if (extend(depth + 1)) return true;
      map_ab_[u] = -1;
      map_ba_[v] = -1;
    }
    return false;
  }

  bool feasible(int u, int v) const {
    if (adj_a_[u].size() != adj_b_[v].size()) return false;
    // Every mapped neighbor of u must map to a neighbor of v with the same
    // bond order, and vice versa.
    int mapped_a = 0;
    for (const Neighbor& nb : adj_a_[u]) {
      const int w = map_ab_[nb.atom];
      if (w < 0) continue;
      ++mapped_a;
      const int bond = b_.find_bond(v, w);
      if (bond < 0 || b_.bonds[bond].order != a_.bonds[nb.bond].order) return false;
    }
    int mapped_b = 0;
    for (const Neighbor& nb : adj_b_[v]) {
      if (map_ba_[nb.atom] >= 0) ++mapped_b;
    }
    return mapped_a == mapped_b;
  }

  const MolGraph& a_;
  const MolGraph& b_;
  Adjacency adj_a_, adj_b_;
  std::vector<std::uint64_t> col_a_, col_b_;
  std::vector<int> map_ab_, map_ba_;
  std::vector<int> order_;
};

}  // namespace

bool isomorphic(const MolGraph& a, const MolGraph& b, std::vector<int>* mapping) {
  if (a.num_atoms() != b.num_atoms() || a.num_bonds() != b.num_bonds()) return false;
  auto ca = colors(a), cb = colors(b);
  std::sort(ca.begin(), ca.end());
  std::sort(cb.begin(), cb.end());
  if (ca != cb) return false;
  Matcher matcher(a, b);
  if (!matcher.solve()) return false;
  if (mapping) *mapping = matcher.mapping();
  return true;
}

}  // namespace chemhg::mol
