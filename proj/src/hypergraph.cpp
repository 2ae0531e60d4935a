//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "chemhg/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "chemhg/isomorphism.hpp"
#include "chemhg/smiles.hpp"

namespace chemhg::hg {

mol::SerializedSmiles identity_key(const mol::MolGraph& m) {
  const mol::MolGraph stripped = mol::strip_maps(m);
  const int rounds = std::min(stripped.num_atoms(), 8);
  const std::vector<std::uint64_t> inv = mol::atom_invariants(stripped, rounds);
  std::vector<std::uint64_t> sorted = inv;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> rank(inv.size());
  for (std::size_t i = 0; i < inv.size(); ++i) {
    rank[i] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), inv[i]) - sorted.begin());
  }
  return mol::serialize_smiles_with_order(stripped, rank);
}

Hypergraph::Hypergraph(mol::FingerprintParams fp, bool isomorphism_dedup)
    : fp_(fp), iso_dedup_(isomorphism_dedup) {}

NodeId Hypergraph::add_node(const mol::MolGraph& m, bool is_virtual) {
  HyperNode node;
  node.key = identity_key(m).smiles;
  node.mol = mol::parse_smiles(node.key);
  node.fp = mol::fingerprint(node.mol, fp_);
  node.is_virtual = is_virtual;
  const NodeId id = nodes_.size();
  if (!is_virtual) by_key_.emplace(node.key, id);
  nodes_.push_back(std::move(node));
  node_degree_.push_back(0.0);
  return id;
}

NodeId Hypergraph::intern(const mol::MolGraph& m, std::vector<int>* atom_map) {
  const mol::SerializedSmiles ser = identity_key(m);
  // ser.order[k] is the reactant atom written k-th, i.e. node atom k.
  std::vector<int> to_key(m.atoms.size());
  for (std::size_t k = 0; k < ser.order.size(); ++k) to_key[ser.order[k]] = static_cast<int>(k);

  auto found = by_key_.find(ser.smiles);
  if (found != by_key_.end()) {
    if (atom_map) *atom_map = to_key;
    return found->second;
  }
  if (iso_dedup_) {
    const mol::MolGraph probe = mol::parse_smiles(ser.smiles);
    const mol::Fingerprint fp = mol::fingerprint(probe, fp_);
    for (NodeId v = 0; v < nodes_.size(); ++v) {
      const HyperNode& n = nodes_[v];
      if (n.is_virtual || n.fp != fp) continue;
      std::vector<int> iso;
      if (!mol::isomorphic(probe, n.mol, &iso)) continue;
      if (atom_map) {
        atom_map->resize(m.atoms.size());
        for (std::size_t i = 0; i < to_key.size(); ++i) (*atom_map)[i] = iso[to_key[i]];
      }
      by_key_.emplace(ser.smiles, v);
      return v;
    }
  }
  if (atom_map) *atom_map = to_key;
  return add_node(m, false);
}

EdgeId Hypergraph::add_edge(std::vector<NodeId> nodes, EdgeLabel label, double weight) {
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  if (nodes.empty()) throw EmptyReaction("hyperedge must contain at least one node");
  if (nodes.back() >= nodes_.size()) throw std::out_of_range("add_edge: node id out of range");
  if (!(weight > 0.0)) throw std::invalid_argument("add_edge: weight must be positive");
  for (NodeId v : nodes) node_degree_[v] += weight;
  edges_.push_back({std::move(nodes), label, weight});
  return edges_.size() - 1;
}

Hypergraph::VirtualInsert Hypergraph::add_virtual(const mol::MolGraph& m,
                                                  std::span<const NodeId> others) {
  const NodeId v = add_node(m, true);
  std::vector<NodeId> members(others.begin(), others.end());
  members.push_back(v);
  const EdgeId e = add_edge(std::move(members), EdgeLabel::kNegative);
  return {v, e};
}

std::vector<double> Hypergraph::edge_degrees() const {
  std::vector<double> d;
  d.reserve(edges_.size());
  for (const Hyperedge& e : edges_) d.push_back(static_cast<double>(e.nodes.size()));
  return d;
}

std::vector<num::CsrMatrix::Triplet> Hypergraph::incidence() const {
  std::vector<num::CsrMatrix::Triplet> t;
  for (EdgeId e = 0; e < edges_.size(); ++e) {
    for (NodeId v : edges_[e].nodes) t.push_back({v, e, 1.0});
  }
  return t;
}

num::CsrMatrix Hypergraph::incidence_matrix() const {
  return num::CsrMatrix::from_triplets(nodes_.size(), edges_.size(), incidence());
}

std::vector<EdgeId> Hypergraph::edges_with_label(EdgeLabel label) const {
  std::vector<EdgeId> out;
  for (EdgeId e = 0; e < edges_.size(); ++e) {
    if (edges_[e].label == label) out.push_back(e);
  }
  return out;
}

Hypergraph build(std::span<const mol::Reaction> reactions, const BuildOptions& options,
                 std::vector<std::vector<ReactantLink>>* links) {
  if (reactions.empty()) throw EmptyReaction("build: no reactions");
  Hypergraph h(options.fp, options.isomorphism_dedup);
  if (links) links->clear();
  for (std::size_t r = 0; r < reactions.size(); ++r) {
    const mol::Reaction& rxn = reactions[r];
    if (rxn.reactants.empty()) {
      throw EmptyReaction("reaction " + std::to_string(r) + " has no reactants");
    }
    std::vector<NodeId> members;
    std::vector<ReactantLink> placed;
    for (const mol::MolGraph& m : rxn.reactants) {
      ReactantLink link;
      link.node = h.intern(m, &link.atom_map);
      members.push_back(link.node);
      placed.push_back(std::move(link));
    }
    h.add_edge(std::move(members), EdgeLabel::kPositive);
    if (links) links->push_back(std::move(placed));
  }
  return h;
}

num::CsrMatrix propagation_operator(const Hypergraph& h, std::span<const bool> edge_mask) {
  const std::size_t n = h.num_nodes();
  auto selected = [&](EdgeId e) { return edge_mask.empty() || edge_mask[e]; };
  if (!edge_mask.empty() && edge_mask.size() != h.num_edges()) {
    throw num::ShapeMismatch("propagation_operator: mask length differs from edge count");
  }
  std::vector<double> degree(n, 0.0);
  for (EdgeId e = 0; e < h.num_edges(); ++e) {
    if (!selected(e)) continue;
    for (NodeId v : h.edge(e).nodes) degree[v] += h.edge(e).weight;
  }
  std::vector<double> inv_sqrt(n, 0.0);
  for (NodeId v = 0; v < n; ++v) {
    if (degree[v] > 0.0) inv_sqrt[v] = 1.0 / std::sqrt(degree[v]);
  }
  std::vector<num::CsrMatrix::Triplet> t;
  for (EdgeId e = 0; e < h.num_edges(); ++e) {
    if (!selected(e)) continue;
    const Hyperedge& edge = h.edge(e);
    const double coef = edge.weight / static_cast<double>(edge.nodes.size());
    for (NodeId u : edge.nodes) {
      for (NodeId v : edge.nodes) t.push_back({u, v, coef * inv_sqrt[u] * inv_sqrt[v]});
    }
  }
  return num::CsrMatrix::from_triplets(n, n, std::move(t));
}

bool SimpleGraph::adjacent(NodeId u, NodeId v) const {
  if (u >= adj.size()) return false;
  return std::binary_search(adj[u].begin(), adj[u].end(), v);
}

SimpleGraph clique_expand(const Hypergraph& h, std::optional<EdgeLabel> only) {
  std::set<std::pair<NodeId, NodeId>> pairs;
  for (const Hyperedge& e : h.edges()) {
    if (only && e.label != *only) continue;
    for (std::size_t i = 0; i < e.nodes.size(); ++i) {
      for (std::size_t j = i + 1; j < e.nodes.size(); ++j) pairs.insert({e.nodes[i], e.nodes[j]});
    }
  }
  SimpleGraph g;
  g.num_nodes = h.num_nodes();
  g.edges.assign(pairs.begin(), pairs.end());
  g.adj.assign(g.num_nodes, {});
  for (const auto& [u, v] : g.edges) {
    g.adj[u].push_back(v);
    g.adj[v].push_back(u);
  }
  for (auto& a : g.adj) std::sort(a.begin(), a.end());
  return g;
}

const char* label_name(EdgeLabel label) {
  return label == EdgeLabel::kPositive ? "positive" : "negative";
}

void write_node_table(const Hypergraph& h, std::ostream& out) {
  out << "#id\tsmiles\tvirtual\n";
  for (NodeId v = 0; v < h.num_nodes(); ++v) {
    out << v << '\t' << h.node(v).key << '\t' << (h.node(v).is_virtual ? 1 : 0) << '\n';
  }
}

void write_edge_table(const Hypergraph& h, std::ostream& out) {
  out << "#edge_id\tlabel\tnode_ids\n";
  for (EdgeId e = 0; e < h.num_edges(); ++e) {
    out << e << '\t' << label_name(h.edge(e).label) << '\t';
    const auto& nodes = h.edge(e).nodes;
    for (std::size_t i = 0; i < nodes.size(); ++i) out << (i ? "," : "") << nodes[i];
    out << '\n';
  }
}

}  // namespace chemhg::hg
