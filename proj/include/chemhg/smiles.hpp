//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chemhg/error.hpp"
#include "chemhg/molecule.hpp"

namespace chemhg::mol {

// Parse failure with the byte offset into the SMILES string.
class SmilesError : public DataError {
 public:
  SmilesError(std::size_t position, const std::string& reason);
  std::size_t position() const { return position_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t position_;
  std::string reason_;
};

class SyntaxError : public SmilesError {
 public:
  using SmilesError::SmilesError;
};

// Valid SMILES outside the supported subset (unknown elements, '*', ...).
class UnsupportedFeature : public SmilesError {
 public:
  using SmilesError::SmilesError;
};

// Parses the supported SMILES subset: organic-subset and aromatic atoms,
// bracket atoms (isotope ignored; H count, charge, map number), branches,
// ring closures (digits and %nn), bond symbols - = # : and '.'.
// Stereo markers (/ \ @) are accepted and dropped.
MolGraph parse_smiles(std::string_view s);

struct SerializedSmiles {
  std::string smiles;
  // order[k] = index of the k-th atom written; parsing `smiles` back yields
  // atoms in this order.
  std::vector<int> order;
};

// With a non-empty `rank`, traversal starts each fragment at its lowest
// ranked atom and visits neighbors in rank order; otherwise index order.
SerializedSmiles serialize_smiles_with_order(const MolGraph& m, std::span<const int> rank = {});
std::string serialize_smiles(const MolGraph& m);

// Drops atom maps and turns bracket atoms that the organic subset can
// express into plain atoms. Used for node identity.
MolGraph strip_maps(const MolGraph& m);

class ReactionParseError : public DataError {
 public:
  ReactionParseError(const std::string& what) : DataError(what) {}
};

// "reactants[>>products][\ttemplate_id]". An agent block (a>b>c) is
// accepted and ignored.
Reaction parse_reaction(std::string_view line);

struct ReactionFileLine {
  std::size_t line_no;
  Reaction reaction;
};

struct ReactionFileFailure {
  std::size_t line_no;
  std::string message;
};

struct ReactionFile {
  std::vector<ReactionFileLine> reactions;
  std::vector<ReactionFileFailure> failures;
};

// Reads a reaction file; '#' comment lines and blank lines are skipped and
// parse failures are collected with their 1-based line numbers.
ReactionFile read_reactions(std::istream& in);
ReactionFile read_reactions_file(const std::string& path);

}  // namespace chemhg::mol
