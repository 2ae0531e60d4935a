//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "chemhg/error.hpp"
#include "chemhg/fingerprint.hpp"
#include "chemhg/molecule.hpp"
#include "chemhg/smiles.hpp"
#include "chemhg/tensor.hpp"

namespace chemhg::hg {

using NodeId = std::size_t;
using EdgeId = std::size_t;

class EmptyReaction : public DataError {
 public:
  using DataError::DataError;
};

enum class EdgeLabel { kPositive, kNegative };

struct HyperNode {
  // Identity key: SMILES of the map-stripped molecule.
  std::string key;
  // parse(key); atom order follows the key.
  mol::MolGraph mol;
  mol::Fingerprint fp;
  bool is_virtual = false;
};

struct Hyperedge {
  // Sorted, duplicate-free, non-empty.
  std::vector<NodeId> nodes;
  EdgeLabel label = EdgeLabel::kPositive;
  double weight = 1.0;
};

// Where a reactant of an input reaction landed: its node and, for each atom
// of the reactant, the matching atom of the node molecule.
struct ReactantLink {
  NodeId node;
  std::vector<int> atom_map;
};

struct BuildOptions {
  mol::FingerprintParams fp;
  // Merge reactants by graph isomorphism instead of by SMILES key.
  bool isomorphism_dedup = false;
};

// Reaction hypergraph: molecules are nodes, reactant sets are hyperedges.
// Append-only; node and edge ids are stable once assigned.
// Serialization of the map-stripped molecule with traversal ordered by
// refined atom invariants, so most atom renumberings give the same string.
mol::SerializedSmiles identity_key(const mol::MolGraph& m);

class Hypergraph {
 public:
  explicit Hypergraph(mol::FingerprintParams fp = {}, bool isomorphism_dedup = false);

  // Returns the node for `m`, creating it when no node with the same
  // identity exists. `atom_map` receives reactant-atom -> node-atom.
  NodeId intern(const mol::MolGraph& m, std::vector<int>* atom_map = nullptr);
  // Always appends a new node.
  NodeId add_node(const mol::MolGraph& m, bool is_virtual);
  EdgeId add_edge(std::vector<NodeId> nodes, EdgeLabel label, double weight = 1.0);

  struct VirtualInsert {
    NodeId node;
    EdgeId edge;
  };
  // Appends a virtual node for `m` and a negative hyperedge over `others`
  // plus the new node.
  VirtualInsert add_virtual(const mol::MolGraph& m, std::span<const NodeId> others);

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  const HyperNode& node(NodeId v) const { return nodes_[v]; }
  const Hyperedge& edge(EdgeId e) const { return edges_[e]; }
  const std::vector<HyperNode>& nodes() const { return nodes_; }
  const std::vector<Hyperedge>& edges() const { return edges_; }
  const mol::FingerprintParams& fingerprint_params() const { return fp_; }

  // d(v) = sum_e w_e H(v,e).
  const std::vector<double>& node_degrees() const { return node_degree_; }
  // delta(e) = sum_v H(v,e).
  std::vector<double> edge_degrees() const;
  // Coordinate triplets (v, e, 1) of the incidence matrix.
  std::vector<num::CsrMatrix::Triplet> incidence() const;
  num::CsrMatrix incidence_matrix() const;

  std::vector<EdgeId> edges_with_label(EdgeLabel label) const;

 private:
  mol::FingerprintParams fp_;
  bool iso_dedup_;
  std::vector<HyperNode> nodes_;
  std::vector<Hyperedge> edges_;
  std::vector<double> node_degree_;
  std::unordered_map<std::string, NodeId> by_key_;
};

// One node per distinct reactant, one positive hyperedge per reaction over
// its reactants. Products never become nodes. `links`, when given, receives
// the placement of every reactant of every reaction.
Hypergraph build(std::span<const mol::Reaction> reactions, const BuildOptions& options = {},
                 std::vector<std::vector<ReactantLink>>* links = nullptr);

// P = Dv^-1/2 H W De^-1 H^T Dv^-1/2 over the edges selected by `edge_mask`
// (all edges when empty). Zero-degree nodes get Dv^-1/2 = 0, so their rows
// and columns vanish.
num::CsrMatrix propagation_operator(const Hypergraph& h, std::span<const bool> edge_mask = {});

struct SimpleGraph {
  std::size_t num_nodes = 0;
  // u < v, sorted, unique.
  std::vector<std::pair<NodeId, NodeId>> edges;
  // Sorted neighbor lists.
  std::vector<std::vector<NodeId>> adj;

  bool adjacent(NodeId u, NodeId v) const;
};

// 2-section: u~v iff some hyperedge contains both. Restricted to edges with
// the given label when `only` is set.
SimpleGraph clique_expand(const Hypergraph& h, std::optional<EdgeLabel> only = std::nullopt);

const char* label_name(EdgeLabel label);

// Line-oriented dump: node table "id\tsmiles\tvirtual" and edge table
// "edge_id\tlabel\tnode_ids" (comma separated). Each starts with a '#'
// header line.
void write_node_table(const Hypergraph& h, std::ostream& out);
void write_edge_table(const Hypergraph& h, std::ostream& out);

}  // namespace chemhg::hg
