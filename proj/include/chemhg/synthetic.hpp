//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "chemhg/molecule.hpp"

namespace chemhg::synth {

// Building-block counts per template. Every compatible combination becomes
// one reaction, so a reactant set is positive exactly when it matches a
// template.
struct CorpusConfig {
  int acids = 10;          // esterification: acid + alcohol
  int alcohols = 10;
  int acyl_chlorides = 10;  // amide coupling: acyl chloride + amine
  int amines = 10;
  int aldehydes = 5;       // Mannich: aldehyde + secondary amine + methyl ketone
  int secondary_amines = 5;
  int ketones = 4;
  std::uint64_t seed = 0;  // line order
};

// 10 acids x 10 alcohols + 10 x 10 amides + 5 x 5 x 4 Mannich = 300.
CorpusConfig default_corpus();
// 4 x 4 + 4 x 4 + 3 x 3 x 2 = 50 reactions.
CorpusConfig small_corpus();

struct CorpusLine {
  std::string reaction_smiles;  // fully atom-mapped
  int template_id;              // 1 ester, 2 amide, 3 Mannich
};

std::vector<CorpusLine> make_corpus(const CorpusConfig& config);
// One `reaction\ttemplate_id` line per reaction.
void write_corpus(const std::vector<CorpusLine>& lines, std::ostream& out);
std::vector<mol::Reaction> corpus_reactions(const std::vector<CorpusLine>& lines);

}  // namespace chemhg::synth
