//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <memory>
#include <sstream>

#include "doctest.h"

#include "chemhg/hypergraph.hpp"
#include "chemhg/smiles.hpp"

using namespace chemhg;
using hg::EdgeLabel;

namespace {

std::vector<mol::Reaction> toy_reactions() {
  std::vector<mol::Reaction> out;
  for (const char* s : {"CC(=O)O.OC>>CC(=O)OC", "OCC.CC(=O)O>>CC(=O)OCC", "CC(=O)O.OC>>CC(=O)OC",
                        "CN.CC(=O)Cl>>CC(=O)NC", "C=O.CN.CC(C)=O>>CC(=O)CCN(C)"}) {
    out.push_back(mol::parse_reaction(s));
  }
  return out;
}

// Dense oracle: Dv^-1/2 H W De^-1 H^T Dv^-1/2 with zero rows for isolated
// nodes.
num::Tensor dense_operator(const hg::Hypergraph& h) {
  const std::size_t n = h.num_nodes();
  const std::size_t m = h.num_edges();
  num::Tensor H(n, m);
  for (std::size_t e = 0; e < m; ++e) {
    for (auto v : h.edge(e).nodes) H(v, e) = 1.0;
  }
  num::Tensor out(n, n);
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      double du = 0, dv = 0;
      for (std::size_t e = 0; e < m; ++e) {
        du += h.edge(e).weight * H(u, e);
        dv += h.edge(e).weight * H(v, e);
      }
      if (du == 0 || dv == 0) continue;
      double s = 0;
      for (std::size_t e = 0; e < m; ++e) {
        double de = 0;
        for (std::size_t w = 0; w < n; ++w) de += H(w, e);
        s += H(u, e) * h.edge(e).weight / de * H(v, e);
      }
      out(u, v) = s / std::sqrt(du) / std::sqrt(dv);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("identical molecules share a node and duplicates stay as multi-edges") {
  const auto rx = toy_reactions();
  const hg::Hypergraph h = hg::build(rx);
  // acetic acid, methanol, ethanol, methylamine, acetyl chloride,
  // formaldehyde, acetone
  CHECK(h.num_nodes() == 7);
  CHECK(h.num_edges() == 5);
  CHECK(h.edge(0).nodes == h.edge(2).nodes);
  CHECK(h.node_degrees()[0] == doctest::Approx(3.0));
  const auto de = h.edge_degrees();
  CHECK(de[4] == 3.0);
  for (const auto& e : h.edges()) CHECK(e.label == EdgeLabel::kPositive);
}

TEST_CASE("node keys differ from atom order and map numbers") {
  std::vector<mol::Reaction> rx{mol::parse_reaction("[OH:1][CH2:2][CH3:3].C>>C"),
                                mol::parse_reaction("CCO.C>>C")};
  std::vector<std::vector<hg::ReactantLink>> links;
  const hg::Hypergraph h = hg::build(rx, {}, &links);
  CHECK(h.num_nodes() == 2);
  REQUIRE(links.size() == 2);
  const auto& link = links[0][0];
  const auto& node = h.node(link.node);
  for (std::size_t i = 0; i < link.atom_map.size(); ++i) {
    CHECK(node.mol.atoms[link.atom_map[i]].element == rx[0].reactants[0].atoms[i].element);
  }
}

TEST_CASE("isomorphism dedup merges what string keys cannot") {
  std::vector<mol::Reaction> rx{mol::parse_reaction("[CH2:1]([OH:2])C>>C"),
                                mol::parse_reaction("OCC>>C")};
  hg::BuildOptions opt;
  opt.isomorphism_dedup = true;
  CHECK(hg::build(rx, opt).num_nodes() == 1);
}

TEST_CASE("empty reactions are rejected") {
  std::vector<mol::Reaction> none;
  CHECK_THROWS_AS(hg::build(none), hg::EmptyReaction);
  hg::Hypergraph h;
  CHECK_THROWS_AS(h.add_edge({}, EdgeLabel::kPositive), hg::EmptyReaction);
}

TEST_CASE("incidence and degree identities") {
  const hg::Hypergraph h = hg::build(toy_reactions());
  const num::Tensor H = h.incidence_matrix().to_dense();
  for (std::size_t v = 0; v < h.num_nodes(); ++v) {
    double s = 0;
    for (std::size_t e = 0; e < h.num_edges(); ++e) s += H(v, e);
    CHECK(s == h.node_degrees()[v]);
  }
  for (std::size_t e = 0; e < h.num_edges(); ++e) {
    double s = 0;
    for (std::size_t v = 0; v < h.num_nodes(); ++v) s += H(v, e);
    CHECK(s == h.edge_degrees()[e]);
  }
}

TEST_CASE("propagation operator matches dense formula and is symmetric") {
  hg::Hypergraph h = hg::build(toy_reactions());
  h.add_node(mol::parse_smiles("CCCC"), true);  // isolated
  const num::Tensor p = hg::propagation_operator(h).to_dense();
  const num::Tensor want = dense_operator(h);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] == doctest::Approx(want[i]).epsilon(1e-12));
  for (std::size_t u = 0; u < p.rows(); ++u) {
    for (std::size_t v = 0; v < p.cols(); ++v) CHECK(p(u, v) == doctest::Approx(p(v, u)));
  }
  const std::size_t iso = h.num_nodes() - 1;
  for (std::size_t v = 0; v < p.cols(); ++v) CHECK(p(iso, v) == 0.0);
  // With unit weights the constant vector scaled by sqrt(d) is a fixed point.
  for (std::size_t u = 0; u + 1 < p.rows(); ++u) {
    double s = 0;
    for (std::size_t v = 0; v < p.cols(); ++v) s += p(u, v) * std::sqrt(h.node_degrees()[v]);
    CHECK(s == doctest::Approx(std::sqrt(h.node_degrees()[u])));
  }
}

TEST_CASE("edge mask drops edges from the operator") {
  hg::Hypergraph h = hg::build(toy_reactions());
  std::vector<char> keep(h.num_edges(), 1);
  keep[3] = 0;
  std::unique_ptr<bool[]> mask(new bool[keep.size()]);
  for (std::size_t i = 0; i < keep.size(); ++i) mask[i] = keep[i];
  const num::Tensor p =
      hg::propagation_operator(h, std::span<const bool>(mask.get(), keep.size())).to_dense();
  // Acetyl chloride only appears in edge 3.
  const hg::NodeId chloride = h.intern(mol::parse_smiles("ClC(C)=O"));
  CHECK(h.node_degrees()[chloride] == 1.0);
  for (std::size_t v = 0; v < p.cols(); ++v) CHECK(p(chloride, v) == 0.0);
  CHECK_THROWS_AS(hg::propagation_operator(h, std::span<const bool>(mask.get(), 2)),
                  num::ShapeMismatch);
}

TEST_CASE("virtual nodes and clique expansion") {
  hg::Hypergraph h = hg::build(toy_reactions());
  const std::size_t before = h.num_nodes();
  std::vector<hg::NodeId> others{0};
  const auto ins = h.add_virtual(mol::parse_smiles("CC(=O)OC"), others);
  CHECK(ins.node == before);
  CHECK(h.node(ins.node).is_virtual);
  CHECK(h.edge(ins.edge).label == EdgeLabel::kNegative);
  // A virtual node is never reused by intern().
  CHECK(h.intern(mol::parse_smiles("CC(=O)OC")) != ins.node);

  const auto pos = hg::clique_expand(h, EdgeLabel::kPositive);
  CHECK_FALSE(pos.adjacent(0, ins.node));
  const auto all = hg::clique_expand(h);
  CHECK(all.adjacent(0, ins.node));
  CHECK(all.adjacent(ins.node, 0));
  for (const auto& [u, v] : all.edges) CHECK(u < v);
}

TEST_CASE("dump tables") {
  const hg::Hypergraph h = hg::build(toy_reactions());
  std::ostringstream nodes, edges;
  hg::write_node_table(h, nodes);
  hg::write_edge_table(h, edges);
  CHECK(nodes.str().rfind("#id\tsmiles\tvirtual\n0\tOC(=O)C\t0\n", 0) == 0);
  CHECK(edges.str().rfind("#edge_id\tlabel\tnode_ids\n0\tpositive\t0,1\n", 0) == 0);
}
