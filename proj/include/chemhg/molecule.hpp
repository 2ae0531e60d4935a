//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chemhg::mol {

struct ElementInfo {
  std::string_view symbol;
  int atomic_number;
  // Neutral valences, ascending. Empty-tail entries are 0.
  int valences[3];
  int n_valences;
  // Group used to shift valences under formal charge (13..17, 1/2 for
  // metals, 0 for hydrogen).
  int group;
  bool organic_subset;
  // Whether the lowercase aromatic form may appear outside brackets.
  bool aromatic_organic;
};

// Supported element table. Atom::element indexes into it.
std::span<const ElementInfo> elements();
// Index into elements() or -1.
int find_element(std::string_view symbol);
const ElementInfo& element_info(int index);

enum class BondOrder : std::uint8_t { kSingle, kDouble, kTriple, kAromatic };

struct Atom {
  std::uint8_t element = 0;
  int charge = 0;
  bool aromatic = false;
  // Explicit hydrogens; meaningful for bracket atoms only. Organic-subset
  // atoms get implicit hydrogens from the valence table.
  int h_count = 0;
  // Atom-map number, 0 when unmapped.
  int map_num = 0;
  bool bracket = false;

  bool operator==(const Atom&) const = default;
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::kSingle;

  int other(int atom) const { return atom == a ? b : a; }
  bool operator==(const Bond&) const = default;
};

struct MolGraph {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::string smiles_source;

  int num_atoms() const { return static_cast<int>(atoms.size()); }
  int num_bonds() const { return static_cast<int>(bonds.size()); }
  // Index of the bond joining a and b, or -1.
  int find_bond(int a, int b) const;
};

struct Neighbor {
  int atom;
  int bond;
};

using Adjacency = std::vector<std::vector<Neighbor>>;

// Neighbor lists in bond-index order.
Adjacency adjacency(const MolGraph& m);

struct Reaction {
  std::vector<MolGraph> reactants;
  std::vector<MolGraph> products;
  std::optional<int> template_id;
};

// Connected component label per atom; labels are dense and ordered by
// lowest atom index.
std::vector<int> fragment_labels(const MolGraph& m);
int fragment_count(const MolGraph& m);

// True for bonds lying on at least one cycle.
std::vector<bool> ring_bonds(const MolGraph& m);

// Returns the graph without the given bond (indices of later bonds shift).
MolGraph without_bond(const MolGraph& m, int bond);

}  // namespace chemhg::mol
