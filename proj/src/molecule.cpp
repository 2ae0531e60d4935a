//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "chemhg/molecule.hpp"

#include <array>
#include <numeric>
#include <stdexcept>

namespace chemhg::mol {
namespace {

// Organic subset first; WLN one-hot features follow this order.
constexpr std::array<ElementInfo, 21> kElements{{
    {"B", 5, {3, 0, 0}, 1, 13, true, true},
    {"C", 6, {4, 0, 0}, 1, 14, true, true},
    {"N", 7, {3, 5, 0}, 2, 15, true, true},
    {"O", 8, {2, 0, 0}, 1, 16, true, true},
    {"P", 15, {3, 5, 0}, 2, 15, true, true},
    {"S", 16, {2, 4, 6}, 3, 16, true, true},
    {"F", 9, {1, 0, 0}, 1, 17, true, false},
    {"Cl", 17, {1, 0, 0}, 1, 17, true, false},
    {"Br", 35, {1, 0, 0}, 1, 17, true, false},
    {"I", 53, {1, 3, 5}, 3, 17, true, false},
    {"H", 1, {1, 0, 0}, 1, 0, false, false},
    {"Si", 14, {4, 0, 0}, 1, 14, false, false},
    {"Se", 34, {2, 4, 6}, 3, 16, false, false},
    {"Sn", 50, {4, 2, 0}, 2, 14, false, false},
    {"Li", 3, {1, 0, 0}, 1, 1, false, false},
    {"Na", 11, {1, 0, 0}, 1, 1, false, false},
    {"K", 19, {1, 0, 0}, 1, 1, false, false},
    {"Mg", 12, {2, 0, 0}, 1, 2, false, false},
    {"Zn", 30, {2, 0, 0}, 1, 2, false, false},
    {"Cu", 29, {1, 2, 0}, 2, 2, false, false},
    {"Pd", 46, {2, 4, 0}, 2, 2, false, false},
}};

}  // namespace

std::span<const ElementInfo> elements() { return kElements; }

int find_element(std::string_view symbol) {
  for (std::size_t i = 0; i < kElements.size(); ++i) {
    if (kElements[i].symbol == symbol) return static_cast<int>(i);
  }
  return -1;
}

const ElementInfo& element_info(int index) {
  return kElements.at(static_cast<std::size_t>(index));
}

int MolGraph::find_bond(int a, int b) const {
  for (std::size_t i = 0; i < bonds.size(); ++i) {
    const Bond& bd = bonds[i];
    if ((bd.a == a && bd.b == b) || (bd.a == b && bd.b == a)) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

Adjacency adjacency(const MolGraph& m) {
  Adjacency adj(m.atoms.size());
  for (std::size_t i = 0; i < m.bonds.size(); ++i) {
    const Bond& b = m.bonds[i];
    adj[b.a].push_back({b.b, static_cast<int>(i)});
    adj[b.b].push_back({b.a, static_cast<int>(i)});
  }
  return adj;
}

std::vector<int> fragment_labels(const MolGraph& m) {
  std::vector<int> parent(m.atoms.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const Bond& b : m.bonds) {
    int ra = find(b.a), rb = find(b.b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<int> label(m.atoms.size(), -1);
  std::vector<int> root_label(m.atoms.size(), -1);
  int next = 0;
  for (int i = 0; i < m.num_atoms(); ++i) {
    int r = find(i);
    if (root_label[r] < 0) root_label[r] = next++;
    label[i] = root_label[r];
  }
  return label;
}

int fragment_count(const MolGraph& m) {
  auto labels = fragment_labels(m);
  int n = 0;
  for (int l : labels) n = std::max(n, l + 1);
  return n;
}

std::vector<bool> ring_bonds(const MolGraph& m) {
  // A bond is a ring bond iff it is not a bridge. Tarjan low-link, iterative.
  const int n = m.num_atoms();
  const Adjacency adj = adjacency(m);
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<bool> ring(m.bonds.size(), true);
  int timer = 0;
  struct Frame {
    int atom;
    int parent_bond;
    std::size_t next;
  };
  for (int root = 0; root < n; ++root) {
    if (disc[root] >= 0) continue;
    std::vector<Frame> stack{{root, -1, 0}};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next < adj[f.atom].size()) {
        const Neighbor nb = adj[f.atom][f.next++];
        if (nb.bond == f.parent_bond) continue;
        if (disc[nb.atom] < 0) {
          disc[nb.atom] = low[nb.atom] = timer++;
          stack.push_back({nb.atom, nb.bond, 0});
        } else {
          low[f.atom] = std::min(low[f.atom], disc[nb.atom]);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          Frame& up = stack.back();
          low[up.atom] = std::min(low[up.atom], low[done.atom]);
          if (low[done.atom] > disc[up.atom]) ring[done.parent_bond] = false;
        }
      }
    }
  }
  return ring;
}

MolGraph without_bond(const MolGraph& m, int bond) {
  if (bond < 0 || bond >= m.num_bonds()) {
    throw std::out_of_range("without_bond: bond index out of range");
  }
  MolGraph out = m;
  out.bonds.erase(out.bonds.begin() + bond);
  return out;
}

}  // namespace chemhg::mol
