//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chemhg/error.hpp"
#include "chemhg/hypergraph.hpp"
#include "chemhg/rng.hpp"

namespace chemhg::neg {

using hg::EdgeId;
using hg::NodeId;

enum class Strategy { kSns, kMns, kCns, kRcns, kMixed };

const char* strategy_name(Strategy s);
// Accepts SNS, MNS, CNS, RCNS, MIXED in any case.
Strategy parse_strategy(std::string_view s);

class ExhaustedAttempts : public Error {
 public:
  using Error::Error;
};

class GlobalExhaustion : public Error {
 public:
  using Error::Error;
};

struct NegSampleConfig {
  Strategy strategy = Strategy::kMixed;
  double ratio = 1.0;  // negatives per positive
  std::uint64_t seed = 0;
  int max_attempts = 1000;
};

struct BondEdit {
  enum class Kind { kDeleteRingBond, kDemoteToSingle, kDeleteAcyclicBond };
  Kind kind;
  int bond;  // index into the unedited molecule
  int atom_a;
  int atom_b;
};

const char* edit_name(BondEdit::Kind k);

struct NegativeSample {
  Strategy strategy = Strategy::kSns;
  // Sorted member nodes. For RCNS before insertion these are the members
  // other than the replaced reactant; insert() adds the virtual node.
  std::vector<NodeId> nodes;
  std::optional<EdgeId> source_edge;
  // RCNS only.
  std::optional<NodeId> replaced;
  std::optional<mol::MolGraph> virtual_mol;
  std::vector<BondEdit> edits;
  std::vector<NodeId> virtual_nodes;
  std::optional<EdgeId> edge;  // set by insert()
};

// Applies one edit. Bracket atoms touched by the edit get their hydrogen
// count adjusted to keep their filled valence; editing an aromatic bond
// turns its whole aromatic system into single bonds. Returns nullopt when
// the result fails valence checks or the SMILES round trip.
std::optional<mol::MolGraph> apply_bond_edit(const mol::MolGraph& m, const BondEdit& edit);

// Edits around `center` atoms in menu order: ring bond deletions, then
// demotions of double/aromatic bonds, then acyclic deletions that leave two
// fragments of at least two atoms each. Not all of them need be valid.
std::vector<BondEdit> candidate_edits(const mol::MolGraph& m, const std::vector<bool>& center);

struct RcnsSkip {
  std::size_t reaction;
  std::string reason;
};

class Sampler {
 public:
  // Positive edges of `h` define the 2-section and the collision set.
  Sampler(const hg::Hypergraph& h, int max_attempts);

  // k drawn from the positive size distribution when not given.
  NegativeSample sns(Rng& rng, std::optional<std::size_t> k = std::nullopt);
  NegativeSample mns(Rng& rng, std::optional<std::size_t> k = std::nullopt);
  NegativeSample cns(Rng& rng);

  // One RCNS negative for reaction `r` (edge `edge`, reactant placement
  // `links`), or nullopt with the reason appended to `skips`.
  std::optional<NegativeSample> rcns(Rng& rng, std::size_t r, const mol::Reaction& reaction,
                                     EdgeId edge, std::span<const hg::ReactantLink> links,
                                     std::vector<RcnsSkip>& skips);

  bool collides(const std::vector<NodeId>& nodes) const;
  // Marks a node set as taken so later samples avoid it.
  void reserve(const std::vector<NodeId>& nodes) { taken_.insert(nodes); }

  const hg::SimpleGraph& two_section() const { return g2_; }

 private:
  std::size_t draw_size(Rng& rng, std::size_t min_size);

  const hg::Hypergraph& h_;
  int max_attempts_;
  hg::SimpleGraph g2_;
  std::vector<NodeId> real_nodes_;
  std::vector<EdgeId> positives_;
  std::vector<std::size_t> sizes_;  // positive edge sizes, for sampling k
  std::set<std::vector<NodeId>> positive_sets_;
  std::set<std::vector<NodeId>> taken_;
};

struct SampleResult {
  std::vector<NegativeSample> samples;
  std::vector<RcnsSkip> skips;
  std::size_t unmapped = 0;
  std::size_t requested = 0;
  std::vector<std::size_t> per_strategy = std::vector<std::size_t>(4, 0);
  std::vector<bool> exhausted = std::vector<bool>(4, false);
};

// Generates ratio x |positives| negatives. `reactions[i]` must be the
// reaction behind edge i with reactant placement `links[i]` (as produced by
// hg::build). MIXED splits the total evenly (remainder round-robin) and
// hands the quota of an exhausted strategy to the others in SNS, MNS, CNS,
// RCNS order. Throws GlobalExhaustion when every strategy is exhausted
// before the total is met (MIXED) or ExhaustedAttempts when a single
// sampling strategy cannot produce a sample.
SampleResult generate(const hg::Hypergraph& h, std::span<const mol::Reaction> reactions,
                      const std::vector<std::vector<hg::ReactantLink>>& links,
                      const NegSampleConfig& config);

// Adds every sample to `h` as a negative edge (RCNS samples get a virtual
// node first) and records the new edge and node ids.
void insert(hg::Hypergraph& h, std::vector<NegativeSample>& samples);

// `strategy\tsource_edge_id\tnode_ids\tvirtual_smiles` per inserted sample.
void write_samples(const std::vector<NegativeSample>& samples, std::ostream& out);
// Replays a dump onto `h` (which must match the hypergraph it was written
// from) and returns the samples with edge ids filled in.
std::vector<NegativeSample> read_samples(hg::Hypergraph& h, std::istream& in);

}  // namespace chemhg::neg
