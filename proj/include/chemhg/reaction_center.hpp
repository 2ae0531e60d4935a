//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <vector>

#include "chemhg/molecule.hpp"

namespace chemhg::mol {

// True when at least one atom-map number occurs on both sides.
bool is_mapped(const Reaction& r);

// Map numbers of reaction-center atoms: atoms mapped on both sides whose
// incident bond multiset differs between reactants and products. A bond is
// keyed by (partner map number, order); partners that are unmapped or mapped
// on one side only are keyed as partner 0. Sorted ascending.
std::vector<int> reaction_center(const Reaction& r);

// Per reactant, per atom: whether the atom is a reaction-center atom.
std::vector<std::vector<bool>> reactant_center_flags(const Reaction& r);

}  // namespace chemhg::mol
