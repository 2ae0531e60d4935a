//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <string>
#include <vector>

#include "chemhg/molecule.hpp"

namespace chemhg::mol {

// Contribution of one bond to an atom's valence; aromatic counts as 1 and
// the ring's pi electron is accounted for per atom.
int bond_valence(BondOrder order);

// Allowed valences after the formal-charge shift, ascending.
std::vector<int> allowed_valences(const Atom& atom);

// Sum of bond valences over the atom's bonds.
int bond_valence_sum(const MolGraph& m, const Adjacency& adj, int atom);

int implicit_hydrogens(const MolGraph& m, const Adjacency& adj, int atom);
int total_hydrogens(const MolGraph& m, const Adjacency& adj, int atom);
std::vector<int> total_hydrogens(const MolGraph& m);

// Valence of a bracket atom including the aromatic pi contribution when the
// element has room for it. Used to keep edited atoms saturated.
int filled_valence(const MolGraph& m, const Adjacency& adj, int atom);

// Checks every atom against the valence table and basic aromaticity sanity
// (aromatic bonds join aromatic atoms and lie on rings; aromatic atoms carry
// at least two aromatic bonds). On failure `why` names the first problem.
bool valence_ok(const MolGraph& m, std::string* why = nullptr);

}  // namespace chemhg::mol
