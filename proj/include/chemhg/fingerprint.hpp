//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <vector>

#include "chemhg/molecule.hpp"

namespace chemhg::mol {

// Fixed-length circular fingerprint.
class Fingerprint {
 public:
  Fingerprint() = default;
  Fingerprint(int n_bits, int radius);

  int size() const { return n_bits_; }
  int radius() const { return radius_; }
  bool test(int bit) const { return (words_[bit >> 6] >> (bit & 63)) & 1U; }
  void set(int bit) { words_[bit >> 6] |= std::uint64_t{1} << (bit & 63); }
  int count() const;
  std::vector<int> on_bits() const;

  bool operator==(const Fingerprint&) const = default;

 private:
  int n_bits_ = 0;
  int radius_ = 0;
  std::vector<std::uint64_t> words_;
};

struct FingerprintParams {
  int radius = 3;
  int bits = 2048;
};

// Morgan-style neighborhood hashing. Round 0 hashes the per-atom tuple
// (element, charge, aromatic, hydrogen count, heavy degree); each later
// round hashes the atom's previous invariant with the sorted multiset of
// (bond order, neighbor invariant). Every invariant of every round sets bit
// hash % bits. Hashing is 64-bit FNV-1a over a length-prefixed byte
// encoding, so the result depends only on the graph, not on atom order.
Fingerprint fingerprint(const MolGraph& m, int radius = 3, int bits = 2048);
inline Fingerprint fingerprint(const MolGraph& m, const FingerprintParams& p) {
  return fingerprint(m, p.radius, p.bits);
}

// Per-atom invariants after `rounds` refinement rounds (exposed for the
// isomorphism matcher and tests).
std::vector<std::uint64_t> atom_invariants(const MolGraph& m, int rounds);

}  // namespace chemhg::mol
