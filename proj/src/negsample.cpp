//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "chemhg/negsample.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "chemhg/isomorphism.hpp"
#include "chemhg/reaction_center.hpp"
#include "chemhg/smiles.hpp"
#include "chemhg/valence.hpp"

namespace chemhg::neg {

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kSns: return "SNS";
    case Strategy::kMns: return "MNS";
    case Strategy::kCns: return "CNS";
    case Strategy::kRcns: return "RCNS";
    case Strategy::kMixed: return "MIXED";
  }
  return "?";
}

Strategy parse_strategy(std::string_view s) {
  std::string up(s);
  for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (Strategy k : {Strategy::kSns, Strategy::kMns, Strategy::kCns, Strategy::kRcns,
                     Strategy::kMixed}) {
    if (up == strategy_name(k)) return k;
  }
  throw std::invalid_argument("unknown negative sampling strategy '" + std::string(s) + "'");
}

const char* edit_name(BondEdit::Kind k) {
  switch (k) {
    case BondEdit::Kind::kDeleteRingBond: return "delete-ring-bond";
    case BondEdit::Kind::kDemoteToSingle: return "demote-to-single";
    case BondEdit::Kind::kDeleteAcyclicBond: return "delete-acyclic-bond";
  }
  return "?";
}

// ---- bond edits ------------------------------------------------------------

namespace {

// Atoms of the aromatic system (connected through aromatic bonds) that
// contains `start`.
std::vector<int> aromatic_system(const mol::MolGraph& m, const mol::Adjacency& adj, int start) {
  std::vector<int> out;
  std::vector<bool> seen(m.atoms.size(), false);
  std::vector<int> stack{start};
  seen[start] = true;
  while (!stack.empty()) {
    const int a = stack.back();
    stack.pop_back();
    out.push_back(a);
    for (const mol::Neighbor& nb : adj[a]) {
      if (m.bonds[nb.bond].order != mol::BondOrder::kAromatic || seen[nb.atom]) continue;
      seen[nb.atom] = true;
      stack.push_back(nb.atom);
    }
  }
  return out;
}

}  // namespace

std::optional<mol::MolGraph> apply_bond_edit(const mol::MolGraph& m, const BondEdit& edit) {
  if (edit.bond < 0 || edit.bond >= m.num_bonds()) throw std::out_of_range("apply_bond_edit: bond");
  const mol::Adjacency adj = mol::adjacency(m);
  const mol::Bond target = m.bonds[edit.bond];
  mol::MolGraph out = m;
  std::vector<int> touched{target.a, target.b};
  if (target.order == mol::BondOrder::kAromatic) {
    for (int a : aromatic_system(m, adj, target.a)) {
      touched.push_back(a);
      out.atoms[a].aromatic = false;
    }
    for (mol::Bond& b : out.bonds) {
      if (b.order == mol::BondOrder::kAromatic && !out.atoms[b.a].aromatic &&
          !out.atoms[b.b].aromatic) {
        b.order = mol::BondOrder::kSingle;
      }
    }
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  if (edit.kind == BondEdit::Kind::kDemoteToSingle) {
    if (target.order == mol::BondOrder::kSingle) return std::nullopt;
    out.bonds[edit.bond].order = mol::BondOrder::kSingle;
  } else {
    out.bonds.erase(out.bonds.begin() + edit.bond);
  }
  const mol::Adjacency new_adj = mol::adjacency(out);
  for (int a : touched) {
    mol::Atom& atom = out.atoms[a];
    if (!atom.bracket) continue;
    const int before = mol::filled_valence(m, adj, a);
    const int after = mol::filled_valence(out, new_adj, a);
    atom.h_count += before - after;
    if (atom.h_count < 0) return std::nullopt;
  }
  if (!mol::valence_ok(out)) return std::nullopt;
  out.smiles_source.clear();
  // Normalize through the writer and confirm the round trip.
  mol::MolGraph back;
  try {
    back = mol::parse_smiles(mol::serialize_smiles(out));
  } catch (const mol::SmilesError&) {
    return std::nullopt;
  }
  if (!mol::isomorphic(out, back) || !mol::valence_ok(back)) return std::nullopt;
  back.smiles_source = mol::serialize_smiles(back);
  return back;
}

std::vector<BondEdit> candidate_edits(const mol::MolGraph& m, const std::vector<bool>& center) {
  const std::vector<bool> ring = mol::ring_bonds(m);
  std::vector<int> incident;
  for (int b = 0; b < m.num_bonds(); ++b) {
    if (center[m.bonds[b].a] || center[m.bonds[b].b]) incident.push_back(b);
  }
  std::vector<BondEdit> out;
  auto add = [&](BondEdit::Kind k, int b) { out.push_back({k, b, m.bonds[b].a, m.bonds[b].b}); };
  for (int b : incident) {
    if (ring[b]) add(BondEdit::Kind::kDeleteRingBond, b);
  }
  for (int b : incident) {
    const auto o = m.bonds[b].order;
    if (o == mol::BondOrder::kDouble || o == mol::BondOrder::kAromatic) {
      add(BondEdit::Kind::kDemoteToSingle, b);
    }
  }
  for (int b : incident) {
    if (ring[b]) continue;
    const mol::MolGraph cut = mol::without_bond(m, b);
    const std::vector<int> labels = mol::fragment_labels(cut);
    const int la = labels[m.bonds[b].a];
    const int lb = labels[m.bonds[b].b];
    const auto na = std::count(labels.begin(), labels.end(), la);
    const auto nb = std::count(labels.begin(), labels.end(), lb);
    if (na >= 2 && nb >= 2) add(BondEdit::Kind::kDeleteAcyclicBond, b);
  }
  return out;
}

// ---- sampler ---------------------------------------------------------------

Sampler::Sampler(const hg::Hypergraph& h, int max_attempts)
    : h_(h), max_attempts_(max_attempts), g2_(hg::clique_expand(h, hg::EdgeLabel::kPositive)) {
  if (max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
  for (NodeId v = 0; v < h.num_nodes(); ++v) {
    if (!h.node(v).is_virtual) real_nodes_.push_back(v);
  }
  positives_ = h.edges_with_label(hg::EdgeLabel::kPositive);
  for (EdgeId e : positives_) {
    sizes_.push_back(h.edge(e).nodes.size());
    positive_sets_.insert(h.edge(e).nodes);
  }
}

bool Sampler::collides(const std::vector<NodeId>& nodes) const {
  return positive_sets_.count(nodes) > 0 || taken_.count(nodes) > 0;
}

std::size_t Sampler::draw_size(Rng& rng, std::size_t min_size) {
  std::vector<std::size_t> ok;
  for (std::size_t s : sizes_) {
    if (s >= min_size && s <= real_nodes_.size()) ok.push_back(s);
  }
  if (ok.empty()) throw ExhaustedAttempts("no positive edge size is usable");
  return ok[rng.index(ok.size())];
}

NegativeSample Sampler::sns(Rng& rng, std::optional<std::size_t> k) {
  if (k && (*k == 0 || *k > real_nodes_.size())) {
    throw ExhaustedAttempts("SNS: k=" + std::to_string(*k) + " exceeds available nodes");
  }
  std::vector<NodeId> pool = real_nodes_;
  for (int attempt = 0; attempt < max_attempts_; ++attempt) {
    const std::size_t size = k ? *k : draw_size(rng, 1);
    for (std::size_t i = 0; i < size; ++i) std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
    std::vector<NodeId> pick(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(size));
    std::sort(pick.begin(), pick.end());
    if (collides(pick)) continue;
    reserve(pick);
    NegativeSample s;
    s.strategy = Strategy::kSns;
    s.nodes = std::move(pick);
    return s;
  }
  throw ExhaustedAttempts("SNS: no valid sample after " + std::to_string(max_attempts_) +
                          " attempts");
}

NegativeSample Sampler::mns(Rng& rng, std::optional<std::size_t> k) {
  if (k && *k < 2) throw std::invalid_argument("MNS needs k >= 2");
  if (real_nodes_.empty()) throw ExhaustedAttempts("MNS: no nodes");
  for (int attempt = 0; attempt < max_attempts_; ++attempt) {
    const std::size_t size = k ? *k : draw_size(rng, 2);
    std::set<NodeId> chosen{real_nodes_[rng.index(real_nodes_.size())]};
    std::set<NodeId> frontier;
    for (NodeId u : g2_.adj[*chosen.begin()]) frontier.insert(u);
    while (chosen.size() < size && !frontier.empty()) {
      auto it = frontier.begin();
      std::advance(it, static_cast<std::ptrdiff_t>(rng.index(frontier.size())));
      const NodeId v = *it;
      frontier.erase(it);
      chosen.insert(v);
      for (NodeId u : g2_.adj[v]) {
        if (!chosen.count(u)) frontier.insert(u);
      }
    }
    if (chosen.size() < size) continue;
    std::vector<NodeId> pick(chosen.begin(), chosen.end());
    if (collides(pick)) continue;
    reserve(pick);
    NegativeSample s;
    s.strategy = Strategy::kMns;
    s.nodes = std::move(pick);
    return s;
  }
  throw ExhaustedAttempts("MNS: no valid sample after " + std::to_string(max_attempts_) +
                          " attempts");
}

NegativeSample Sampler::cns(Rng& rng) {
  std::vector<EdgeId> usable;
  for (EdgeId e : positives_) {
    if (h_.edge(e).nodes.size() >= 2) usable.push_back(e);
  }
  if (usable.empty()) throw ExhaustedAttempts("CNS: no positive edge with two or more nodes");
  for (int attempt = 0; attempt < max_attempts_; ++attempt) {
    const EdgeId e = usable[rng.index(usable.size())];
    std::vector<NodeId> rest = h_.edge(e).nodes;
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(rng.index(rest.size())));
    // Nodes adjacent to every remaining member, outside the edge.
    std::vector<NodeId> cand = g2_.adj[rest[0]];
    for (std::size_t i = 1; i < rest.size() && !cand.empty(); ++i) {
      std::vector<NodeId> keep;
      std::set_intersection(cand.begin(), cand.end(), g2_.adj[rest[i]].begin(),
                            g2_.adj[rest[i]].end(), std::back_inserter(keep));
      cand = std::move(keep);
    }
    const auto& members = h_.edge(e).nodes;
    std::erase_if(cand, [&](NodeId u) {
      return std::binary_search(members.begin(), members.end(), u) || h_.node(u).is_virtual;
    });
    if (cand.empty()) continue;
    std::vector<NodeId> pick = rest;
    pick.push_back(cand[rng.index(cand.size())]);
    std::sort(pick.begin(), pick.end());
    if (collides(pick)) continue;
    reserve(pick);
    NegativeSample s;
    s.strategy = Strategy::kCns;
    s.nodes = std::move(pick);
    s.source_edge = e;
    return s;
  }
  throw ExhaustedAttempts("CNS: no valid sample after " + std::to_string(max_attempts_) +
                          " attempts");
}

std::optional<NegativeSample> Sampler::rcns(Rng& rng, std::size_t r,
                                            const mol::Reaction& reaction, EdgeId edge,
                                            std::span<const hg::ReactantLink> links,
                                            std::vector<RcnsSkip>& skips) {
  if (!mol::is_mapped(reaction)) {
    skips.push_back({r, "unmapped"});
    return std::nullopt;
  }
  if (links.size() != reaction.reactants.size()) {
    throw std::invalid_argument("rcns: reactant links do not match the reaction");
  }
  const auto flags = mol::reactant_center_flags(reaction);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (std::find(flags[i].begin(), flags[i].end(), true) != flags[i].end()) order.push_back(i);
  }
  if (order.empty()) {
    skips.push_back({r, "no reaction center"});
    return std::nullopt;
  }
  rng.shuffle(order);
  for (std::size_t i : order) {
    const hg::ReactantLink& link = links[i];
    const hg::HyperNode& node = h_.node(link.node);
    std::vector<bool> center(node.mol.atoms.size(), false);
    for (std::size_t a = 0; a < flags[i].size(); ++a) {
      if (flags[i][a]) center[link.atom_map[a]] = true;
    }
    std::vector<std::pair<BondEdit, mol::MolGraph>> valid;
    for (const BondEdit& ed : candidate_edits(node.mol, center)) {
      std::optional<mol::MolGraph> edited = apply_bond_edit(node.mol, ed);
      if (!edited) continue;
      if (hg::identity_key(*edited).smiles == node.key) continue;
      valid.emplace_back(ed, std::move(*edited));
    }
    if (valid.empty()) continue;
    auto& [ed, molecule] = valid[rng.index(valid.size())];
    NegativeSample s;
    s.strategy = Strategy::kRcns;
    s.source_edge = edge;
    s.replaced = link.node;
    for (NodeId v : h_.edge(edge).nodes) {
      if (v != link.node) s.nodes.push_back(v);
    }
    s.edits.push_back(ed);
    s.virtual_mol = std::move(molecule);
    return s;
  }
  skips.push_back({r, "no valid edit"});
  return std::nullopt;
}

// ---- generation ------------------------------------------------------------

SampleResult generate(const hg::Hypergraph& h, std::span<const mol::Reaction> reactions,
                      const std::vector<std::vector<hg::ReactantLink>>& links,
                      const NegSampleConfig& config) {
  if (!(config.ratio > 0.0)) throw std::invalid_argument("negative ratio must be > 0");
  if (reactions.size() != links.size()) {
    throw std::invalid_argument("generate: reactions and links differ in length");
  }
  const std::vector<EdgeId> positives = h.edges_with_label(hg::EdgeLabel::kPositive);
  SampleResult res;
  res.requested = static_cast<std::size_t>(std::llround(config.ratio * positives.size()));
  Sampler sampler(h, config.max_attempts);

  Rng rng_sns(derive_seed(config.seed, "negsample.sns"));
  Rng rng_mns(derive_seed(config.seed, "negsample.mns"));
  Rng rng_cns(derive_seed(config.seed, "negsample.cns"));
  Rng rng_rcns(derive_seed(config.seed, "negsample.rcns"));
  Rng rng_src(derive_seed(config.seed, "negsample.source"));
  std::vector<EdgeId> source_order = positives;
  rng_src.shuffle(source_order);
  std::size_t next_source = 0;
  std::vector<std::size_t> rcns_order(reactions.size());
  for (std::size_t i = 0; i < rcns_order.size(); ++i) rcns_order[i] = i;
  rng_rcns.shuffle(rcns_order);
  std::size_t next_reaction = 0;

  auto attach_source = [&](NegativeSample& s) {
    if (!source_order.empty()) s.source_edge = source_order[next_source++ % source_order.size()];
  };

  // One sample from strategy i, or nullopt once it is exhausted.
  auto produce = [&](int i) -> std::optional<NegativeSample> {
    if (res.exhausted[i]) return std::nullopt;
    try {
      switch (i) {
        case 0: {
          NegativeSample s = sampler.sns(rng_sns);
          attach_source(s);
          return s;
        }
        case 1: {
          NegativeSample s = sampler.mns(rng_mns);
          attach_source(s);
          return s;
        }
        case 2: return sampler.cns(rng_cns);
        default:
          while (next_reaction < rcns_order.size()) {
            const std::size_t r = rcns_order[next_reaction++];
            if (r >= h.num_edges() || h.edge(r).label != hg::EdgeLabel::kPositive) {
              throw std::invalid_argument("generate: reaction index is not a positive edge");
            }
            auto s = sampler.rcns(rng_rcns, r, reactions[r], r, links[r], res.skips);
            if (s) return s;
          }
          throw ExhaustedAttempts("RCNS: every reaction used or skipped");
      }
    } catch (const ExhaustedAttempts& e) {
      res.exhausted[i] = true;
      if (config.strategy != Strategy::kMixed && i != 3) throw;
      return std::nullopt;
    }
  };
  auto take = [&](int i, std::size_t want) {
    std::size_t got = 0;
    while (got < want) {
      auto s = produce(i);
      if (!s) break;
      res.samples.push_back(std::move(*s));
      ++res.per_strategy[i];
      ++got;
    }
    return got;
  };

  if (config.strategy != Strategy::kMixed) {
    take(static_cast<int>(config.strategy), res.requested);
  } else {
    std::size_t deficit = 0;
    for (int i = 0; i < 4; ++i) {
      const std::size_t quota = res.requested / 4 + (static_cast<std::size_t>(i) < res.requested % 4);
      deficit += quota - take(i, quota);
    }
    while (deficit > 0) {
      bool any = false;
      for (int i = 0; i < 4 && deficit > 0; ++i) {
        if (take(i, 1) == 1) {
          --deficit;
          any = true;
        }
      }
      if (!any) {
        throw GlobalExhaustion("all strategies exhausted with " + std::to_string(deficit) +
                               " of " + std::to_string(res.requested) + " negatives missing");
      }
    }
  }
  for (const RcnsSkip& s : res.skips) res.unmapped += s.reason == "unmapped";
  return res;
}

void insert(hg::Hypergraph& h, std::vector<NegativeSample>& samples) {
  for (NegativeSample& s : samples) {
    if (s.edge) continue;
    if (s.virtual_mol) {
      const auto ins = h.add_virtual(*s.virtual_mol, s.nodes);
      s.virtual_nodes = {ins.node};
      s.nodes = h.edge(ins.edge).nodes;
      s.edge = ins.edge;
    } else {
      s.edge = h.add_edge(s.nodes, hg::EdgeLabel::kNegative);
    }
  }
}

void write_samples(const std::vector<NegativeSample>& samples, std::ostream& out) {
  out << "#strategy\tsource_edge_id\tnode_ids\tvirtual_smiles\n";
  for (const NegativeSample& s : samples) {
    out << strategy_name(s.strategy) << '\t';
    if (s.source_edge) {
      out << *s.source_edge;
    } else {
      out << '-';
    }
    out << '\t';
    for (std::size_t i = 0; i < s.nodes.size(); ++i) out << (i ? "," : "") << s.nodes[i];
    out << '\t';
    if (s.virtual_mol) out << hg::identity_key(*s.virtual_mol).smiles;
    out << '\n';
  }
}

std::vector<NegativeSample> read_samples(hg::Hypergraph& h, std::istream& in) {
  std::vector<NegativeSample> out;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    throw DataError("negatives line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string part;
    while (std::getline(ss, part, '\t')) f.push_back(part);
    if (f.size() == 3) f.emplace_back();
    if (f.size() != 4) fail("expected 4 tab-separated fields");
    NegativeSample s;
    try {
      s.strategy = parse_strategy(f[0]);
      if (f[1] != "-") s.source_edge = std::stoull(f[1]);
      std::stringstream ids(f[2]);
      while (std::getline(ids, part, ',')) s.nodes.push_back(std::stoull(part));
    } catch (const std::exception& e) {
      fail(e.what());
    }
    if (s.nodes.empty()) fail("no node ids");
    if (s.source_edge && *s.source_edge >= h.num_edges()) fail("source edge out of range");
    if (!f[3].empty()) {
      const NodeId next = h.num_nodes();
      std::vector<NodeId> others;
      std::size_t fresh = 0;
      for (NodeId v : s.nodes) {
        if (v == next) {
          ++fresh;
        } else if (v < next) {
          others.push_back(v);
        } else {
          fail("node id " + std::to_string(v) + " out of range");
        }
      }
      if (fresh != 1) fail("virtual node id must be " + std::to_string(next));
      try {
        s.virtual_mol = mol::parse_smiles(f[3]);
      } catch (const mol::SmilesError& e) {
        fail(e.what());
      }
      const auto ins = h.add_virtual(*s.virtual_mol, others);
      s.virtual_nodes = {ins.node};
      s.edge = ins.edge;
    } else {
      for (NodeId v : s.nodes) {
        if (v >= h.num_nodes()) fail("node id " + std::to_string(v) + " out of range");
      }
      s.edge = h.add_edge(s.nodes, hg::EdgeLabel::kNegative);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace chemhg::neg
