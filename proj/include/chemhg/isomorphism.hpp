//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <vector>

#include "chemhg/molecule.hpp"

namespace chemhg::mol {

// Label-preserving graph isomorphism for small molecules (VF2-style
// backtracking with refinement-based candidate pruning). Atoms match on
// element, charge, aromaticity, total hydrogens and map number; bonds on
// order. On success `mapping[i]` is the atom of `b` matched to atom i of
// `a`.
bool isomorphic(const MolGraph& a, const MolGraph& b,
                std::vector<int>* mapping = nullptr);

}  // namespace chemhg::mol
