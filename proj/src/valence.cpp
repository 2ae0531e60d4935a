//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "chemhg/valence.hpp"

#include <algorithm>
#include <cstdlib>

namespace chemhg::mol {

int bond_valence(BondOrder order) {
  switch (order) {
    case BondOrder::kSingle:
    case BondOrder::kAromatic:
      return 1;
    case BondOrder::kDouble:
      return 2;
    case BondOrder::kTriple:
      return 3;
  }
  return 1;
}

std::vector<int> allowed_valences(const Atom& atom) {
  const ElementInfo& info = element_info(atom.element);
  std::vector<int> out;
  for (int i = 0; i < info.n_valences; ++i) {
    int v = info.valences[i];
    const int q = atom.charge;
    if (q != 0) {
      switch (info.group) {
        case 13:
          v -= q;
          break;
        case 15:
        case 16:
        case 17:
          v += q;
          break;
        default:
          v -= std::abs(q);
          break;
      }
    }
    if (v >= 0) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int bond_valence_sum(const MolGraph& m, const Adjacency& adj, int atom) {
  int sum = 0;
  for (const Neighbor& nb : adj[atom]) sum += bond_valence(m.bonds[nb.bond].order);
  return sum;
}

int implicit_hydrogens(const MolGraph& m, const Adjacency& adj, int atom) {
  const Atom& a = m.atoms[atom];
  if (a.bracket) return 0;
  const ElementInfo& info = element_info(a.element);
  const int used = bond_valence_sum(m, adj, atom);
  if (a.aromatic) {
    // Only aromatic carbon takes an implicit hydrogen; n, o, s, p, b need
    // brackets to carry one.
    if (info.symbol == "C") return std::max(0, 3 - used);
    return 0;
  }
  for (int v : allowed_valences(a)) {
    if (v >= used) return v - used;
  }
  return 0;
}

int total_hydrogens(const MolGraph& m, const Adjacency& adj, int atom) {
  return m.atoms[atom].h_count + implicit_hydrogens(m, adj, atom);
}

std::vector<int> total_hydrogens(const MolGraph& m) {
  const Adjacency adj = adjacency(m);
  std::vector<int> out(m.atoms.size());
  for (int i = 0; i < m.num_atoms(); ++i) out[i] = total_hydrogens(m, adj, i);
  return out;
}

namespace {

int pi_contribution(const Atom& a, int saturated) {
  if (!a.aromatic) return 0;
  const auto allowed = allowed_valences(a);
  if (allowed.empty()) return 0;
  if (std::find(allowed.begin(), allowed.end(), saturated) != allowed.end()) {
    return 0;
  }
  return saturated + 1 <= allowed.back() ? 1 : 0;
}

}  // namespace

int filled_valence(const MolGraph& m, const Adjacency& adj, int atom) {
  const int saturated =
      bond_valence_sum(m, adj, atom) + total_hydrogens(m, adj, atom);
  return saturated + pi_contribution(m.atoms[atom], saturated);
}

bool valence_ok(const MolGraph& m, std::string* why) {
  auto fail = [&](std::string msg) {
    if (why) *why = std::move(msg);
    return false;
  };
  const Adjacency adj = adjacency(m);
  const std::vector<bool> ring = ring_bonds(m);
  for (int i = 0; i < m.num_atoms(); ++i) {
    const Atom& a = m.atoms[i];
    if (a.h_count < 0) return fail("atom " + std::to_string(i) + ": negative H");
    const auto allowed = allowed_valences(a);
    const int filled = filled_valence(m, adj, i);
    if (allowed.empty() ? filled > 0 : filled > allowed.back()) {
      return fail("atom " + std::to_string(i) + " (" +
                  std::string(element_info(a.element).symbol) +
                  "): valence " + std::to_string(filled) + " exceeds table");
    }
    if (a.aromatic) {
      int n_arom = 0;
      for (const Neighbor& nb : adj[i]) {
        if (m.bonds[nb.bond].order == BondOrder::kAromatic) ++n_arom;
      }
      if (n_arom < 2) {
        return fail("atom " + std::to_string(i) +
                    ": aromatic atom with fewer than two aromatic bonds");
      }
    }
  }
  for (int b = 0; b < m.num_bonds(); ++b) {
    const Bond& bd = m.bonds[b];
    if (bd.order != BondOrder::kAromatic) continue;
    if (!m.atoms[bd.a].aromatic || !m.atoms[bd.b].aromatic) {
      return fail("bond " + std::to_string(b) + ": aromatic bond on non-aromatic atom");
    }
    if (!ring[b]) {
      return fail("bond " + std::to_string(b) + ": aromatic bond outside a ring");
    }
  }
  return true;
}

}  // namespace chemhg::mol
