//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "chemhg/reaction_center.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

namespace chemhg::mol {
namespace {

std::set<int> side_maps(const std::vector<MolGraph>& side) {
  std::set<int> maps;
  for (const MolGraph& m : side) {
    for (const Atom& a : m.atoms) {
      if (a.map_num > 0) maps.insert(a.map_num);
    }
  }
  return maps;
}

using BondKey = std::pair<int, int>;  // (partner map or 0, order)

std::map<int, std::multiset<BondKey>> incident_bonds(
    const std::vector<MolGraph>& side, const std::set<int>& shared) {
  std::map<int, std::multiset<BondKey>> out;
  for (const MolGraph& m : side) {
    for (const Bond& b : m.bonds) {
      const int ma = m.atoms[b.a].map_num;
      const int mb = m.atoms[b.b].map_num;
      const bool sa = shared.count(ma) > 0;
      const bool sb = shared.count(mb) > 0;
      const int order = static_cast<int>(b.order);
      if (sa) out[ma].insert({sb ? mb : 0, order});
      if (sb) out[mb].insert({sa ? ma : 0, order});
    }
  }
  return out;
}

}  // namespace

bool is_mapped(const Reaction& r) {
  const auto lhs = side_maps(r.reactants);
  const auto rhs = side_maps(r.products);
  return std::any_of(lhs.begin(), lhs.end(), [&](int m) { return rhs.count(m) > 0; });
}

std::vector<int> reaction_center(const Reaction& r) {
  const auto lhs = side_maps(r.reactants);
  const auto rhs = side_maps(r.products);
  std::set<int> shared;
  std::set_intersection(lhs.begin(), lhs.end(), rhs.begin(), rhs.end(),
                        std::inserter(shared, shared.end()));
  auto before = incident_bonds(r.reactants, shared);
  auto after = incident_bonds(r.products, shared);
  std::vector<int> center;
  for (int m : shared) {
    if (before[m] != after[m]) center.push_back(m);
  }
  return center;
}

std::vector<std::vector<bool>> reactant_center_flags(const Reaction& r) {
  const auto center = reaction_center(r);
  const std::set<int> in_center(center.begin(), center.end());
  std::vector<std::vector<bool>> flags;
  for (const MolGraph& m : r.reactants) {
    std::vector<bool> f(m.atoms.size(), false);
    for (int i = 0; i < m.num_atoms(); ++i) {
      f[i] = m.atoms[i].map_num > 0 && in_center.count(m.atoms[i].map_num) > 0;
    }
    flags.push_back(std::move(f));
  }
  return flags;
}

}  // namespace chemhg::mol
