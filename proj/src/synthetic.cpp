//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "chemhg/synthetic.hpp"

#include <algorithm>
#include <iterator>
#include <ostream>
#include <stdexcept>

#include "chemhg/rng.hpp"
#include "chemhg/smiles.hpp"

namespace chemhg::synth {

namespace {

// Substituents; each string is completed by a reactive group appended at
// the end (acids, acyl chlorides, aldehydes) or prepended (alcohols,
// amines, ketones), so reactive atom indices are known.
const char* const kAcylR[] = {"C",          "CC",          "CCC",         "CC(C)",
                              "c1ccccc1",   "c1ccc(C)cc1", "C1CCCCC1",    "ClCC",
                              "COc1ccc(cc1)", "CC(C)(C)",  "C=CC",        "FC(F)(F)"};
const char* const kAlcohols[] = {"OC",        "OCC",      "OCCC",   "OC(C)C",  "OCc1ccccc1",
                                 "OCC=C",     "OC1CCCC1", "OCCCl",  "OCCOC",   "OCC(C)C",
                                 "OCCCC",     "OCC#C"};
// Primary and secondary amines interleaved; the secondary ones are the
// Mannich amines too, which gives the 2-section triangles that are not
// reactions.
const char* const kAmines[] = {"NC",         "N1CCCC1",   "NCC",        "N(C)C",
                               "Nc1ccccc1",  "N1CCOCC1",  "NCc1ccccc1", "N1CCCCC1",
                               "NC1CCCCC1",  "N(CC)CC",   "NCCO",       "NCC(C)C"};
const char* const kAldehydeR[] = {"", "c1ccccc1", "CC", "CCC", "Clc1ccc(cc1)", "CC(C)"};
const char* const kSecondary[] = {"N1CCCC1", "N(C)C", "N1CCOCC1", "N1CCCCC1", "N(CC)CC",
                                  "N1CCSCC1"};
const char* const kKetones[] = {"CC(=O)C", "CC(=O)c1ccccc1", "CC(=O)CC", "CC(=O)C1CC1",
                                "CC(=O)CCC"};

template <std::size_t N>
void check_count(int n, const char* const (&)[N], const char* what) {
  if (n < 1 || static_cast<std::size_t>(n) > N) {
    throw std::invalid_argument(std::string("synthetic corpus: ") + what + " count must be in 1.." +
                                std::to_string(N));
  }
}

// Molecules of one reaction share a map counter.
struct Builder {
  int next_map = 1;

  mol::MolGraph mapped(const std::string& smiles) {
    mol::MolGraph m = mol::parse_smiles(smiles);
    for (mol::Atom& a : m.atoms) a.map_num = next_map++;
    return m;
  }
};

// Appends the atoms and bonds of `src` into `dst`, skipping atoms in
// `drop`; returns old -> new index (-1 for dropped atoms).
std::vector<int> merge(mol::MolGraph& dst, const mol::MolGraph& src, const std::vector<int>& drop) {
  std::vector<int> idx(src.atoms.size(), -1);
  for (int i = 0; i < src.num_atoms(); ++i) {
    if (std::find(drop.begin(), drop.end(), i) != drop.end()) continue;
    idx[i] = dst.num_atoms();
    dst.atoms.push_back(src.atoms[i]);
  }
  for (const mol::Bond& b : src.bonds) {
    if (idx[b.a] >= 0 && idx[b.b] >= 0) dst.bonds.push_back({idx[b.a], idx[b.b], b.order});
  }
  return idx;
}

mol::MolGraph single_atom(const mol::Atom& a) {
  mol::MolGraph m;
  m.atoms.push_back(a);
  return m;
}

std::string side(const std::vector<mol::MolGraph>& mols) {
  std::string out;
  for (std::size_t i = 0; i < mols.size(); ++i) {
    if (i) out += '.';
    out += mol::serialize_smiles(mols[i]);
  }
  return out;
}

std::string reaction_text(const std::vector<mol::MolGraph>& lhs, const std::vector<mol::MolGraph>& rhs) {
  return side(lhs) + ">>" + side(rhs);
}

// R-C(=O)OH + HO-R' -> R-C(=O)O-R' + H2O
std::string ester(const char* r, const char* alcohol) {
  Builder b;
  mol::MolGraph acid = b.mapped(std::string(r) + "C(=O)O");
  mol::MolGraph alc = b.mapped(alcohol);
  const int n = acid.num_atoms();
  const int carbonyl = n - 3;
  const int hydroxyl = n - 1;
  mol::MolGraph prod;
  merge(prod, acid, {hydroxyl});
  const auto ia = merge(prod, alc, {});
  prod.bonds.push_back({carbonyl, ia[0], mol::BondOrder::kSingle});
  return reaction_text({acid, alc}, {prod, single_atom(acid.atoms[hydroxyl])});
}

// R-C(=O)Cl + H2N-R' -> R-C(=O)NH-R' + HCl
std::string amide(const char* r, const char* amine) {
  Builder b;
  mol::MolGraph chloride = b.mapped(std::string(r) + "C(=O)Cl");
  mol::MolGraph am = b.mapped(amine);
  const int n = chloride.num_atoms();
  mol::MolGraph prod;
  merge(prod, chloride, {n - 1});
  const auto ia = merge(prod, am, {});
  prod.bonds.push_back({n - 3, ia[0], mol::BondOrder::kSingle});
  return reaction_text({chloride, am}, {prod, single_atom(chloride.atoms[n - 1])});
}

// R-CHO + HNR'2 + CH3-C(=O)R'' -> R''C(=O)CH2-CH(R)-NR'2 + H2O
std::string mannich(const char* r, const char* amine, const char* ketone) {
  Builder b;
  mol::MolGraph ald = b.mapped(std::string(r) + "C=O");
  mol::MolGraph am = b.mapped(amine);
  mol::MolGraph ket = b.mapped(ketone);
  const int n = ald.num_atoms();
  const int carbon = n - 2;
  const int oxygen = n - 1;
  mol::MolGraph prod;
  merge(prod, ald, {oxygen});
  const auto ia = merge(prod, am, {});
  const auto ik = merge(prod, ket, {});
  prod.bonds.push_back({carbon, ia[0], mol::BondOrder::kSingle});
  prod.bonds.push_back({carbon, ik[0], mol::BondOrder::kSingle});
  return reaction_text({ald, am, ket}, {prod, single_atom(ald.atoms[oxygen])});
}

}  // namespace

CorpusConfig default_corpus() { return {}; }

CorpusConfig small_corpus() {
  CorpusConfig c;
  c.acids = c.alcohols = c.acyl_chlorides = c.amines = 4;
  c.aldehydes = c.secondary_amines = 3;
  c.ketones = 2;
  return c;
}

std::vector<CorpusLine> make_corpus(const CorpusConfig& c) {
  check_count(c.acids, kAcylR, "acid");
  check_count(c.alcohols, kAlcohols, "alcohol");
  check_count(c.acyl_chlorides, kAcylR, "acyl chloride");
  check_count(c.amines, kAmines, "amine");
  check_count(c.aldehydes, kAldehydeR, "aldehyde");
  check_count(c.secondary_amines, kSecondary, "secondary amine");
  check_count(c.ketones, kKetones, "ketone");
  std::vector<CorpusLine> out;
  for (int i = 0; i < c.acids; ++i) {
    for (int j = 0; j < c.alcohols; ++j) out.push_back({ester(kAcylR[i], kAlcohols[j]), 1});
  }
  // Acyl chlorides use the substituents from the other end of the list so
  // the two templates share few carbon skeletons.
  const int na = static_cast<int>(std::size(kAcylR));
  for (int i = 0; i < c.acyl_chlorides; ++i) {
    for (int j = 0; j < c.amines; ++j) out.push_back({amide(kAcylR[na - 1 - i], kAmines[j]), 2});
  }
  for (int i = 0; i < c.aldehydes; ++i) {
    for (int j = 0; j < c.secondary_amines; ++j) {
      for (int k = 0; k < c.ketones; ++k) {
        out.push_back({mannich(kAldehydeR[i], kSecondary[j], kKetones[k]), 3});
      }
    }
  }
  Rng rng(derive_seed(c.seed, "synth"));
  rng.shuffle(out);
  return out;
}

void write_corpus(const std::vector<CorpusLine>& lines, std::ostream& out) {
  out << "# synthetic mapped reactions: reaction_smiles<TAB>template_id\n";
  for (const CorpusLine& l : lines) out << l.reaction_smiles << '\t' << l.template_id << '\n';
}

std::vector<mol::Reaction> corpus_reactions(const std::vector<CorpusLine>& lines) {
  std::vector<mol::Reaction> out;
  for (const CorpusLine& l : lines) {
    mol::Reaction r = mol::parse_reaction(l.reaction_smiles);
    r.template_id = l.template_id;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace chemhg::synth
