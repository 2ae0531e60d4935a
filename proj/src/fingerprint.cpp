//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "chemhg/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <utility>

#include "chemhg/valence.hpp"

namespace chemhg::mol {
namespace {

class Fnv {
 public:
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) byte(static_cast<unsigned char>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  // Length prefix before each variable-length group.
  void length(std::size_t n) { u64(n); }
  std::uint64_t value() const { return h_; }

 private:
  void byte(unsigned char b) {
    h_ ^= b;
    h_ *= 0x100000001b3ULL;
  }
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

int bond_code(BondOrder o) { return static_cast<int>(o) + 1; }

std::vector<std::vector<std::uint64_t>> invariant_rounds(const MolGraph& m,
                                                          int rounds) {
  const Adjacency adj = adjacency(m);
  const int n = m.num_atoms();
  std::vector<std::vector<std::uint64_t>> all;
  std::vector<std::uint64_t> cur(n);
  for (int i = 0; i < n; ++i) {
    const Atom& a = m.atoms[i];
    Fnv h;
    h.length(5);
    h.i64(element_info(a.element).atomic_number);
    h.i64(a.charge);
    h.i64(a.aromatic ? 1 : 0);
    h.i64(total_hydrogens(m, adj, i));
    h.i64(static_cast<std::int64_t>(adj[i].size()));
    cur[i] = h.value();
  }
  all.push_back(cur);
  for (int r = 1; r <= rounds; ++r) {
    std::vector<std::uint64_t> next(n);
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int, std::uint64_t>> env;
      env.reserve(adj[i].size());
      for (const Neighbor& nb : adj[i]) {
        env.emplace_back(bond_code(m.bonds[nb.bond].order), cur[nb.atom]);
      }
      std::sort(env.begin(), env.end());
      Fnv h;
      h.i64(r);
      h.u64(cur[i]);
      h.length(env.size());
      for (const auto& [order, inv] : env) {
        h.i64(order);
        h.u64(inv);
      }
      next[i] = h.value();
    }
    cur = std::move(next);
    all.push_back(cur);
  }
  return all;
}

}  // namespace

Fingerprint::Fingerprint(int n_bits, int radius)
    : n_bits_(n_bits), radius_(radius), words_((n_bits + 63) / 64, 0) {}

int Fingerprint::count() const {
  int c = 0;
  for (auto w : words_) c += std::popcount(w);
  return c;
}

std::vector<int> Fingerprint::on_bits() const {
  std::vector<int> out;
  for (int i = 0; i < n_bits_; ++i) {
    if (test(i)) out.push_back(i);
  }
  return out;
}

Fingerprint fingerprint(const MolGraph& m, int radius, int bits) {
  if (radius < 0) throw std::invalid_argument("fingerprint: radius must be >= 0");
  if (bits <= 0 || !std::has_single_bit(static_cast<unsigned>(bits))) {
    throw std::invalid_argument("fingerprint: bits must be a power of two");
  }
  Fingerprint fp(bits, radius);
  for (const auto& round : invariant_rounds(m, radius)) {
    for (std::uint64_t inv : round) fp.set(static_cast<int>(inv % static_cast<std::uint64_t>(bits)));
  }
  return fp;
}

std::vector<std::uint64_t> atom_invariants(const MolGraph& m, int rounds) {
  return invariant_rounds(m, rounds).back();
}

}  // namespace chemhg::mol
