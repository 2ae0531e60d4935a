//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "chemhg/error.hpp"
#include "chemhg/hypergraph.hpp"
#include "chemhg/tape.hpp"

namespace chemhg::model {

using num::CsrMatrix;
using num::Parameter;
using num::Tape;
using num::Tensor;
using num::Var;

class EmptyEdge : public DataError {
 public:
  using DataError::DataError;
};

// Checkpoint whose header or tensor shapes do not fit together.
class CheckpointError : public DataError {
 public:
  using DataError::DataError;
};

// Element one-hot, charge, aromatic flag, heavy degree, hydrogen count.
int atom_feature_dim();
// Bond order one-hot.
constexpr int kBondFeatureDim = 4;

struct Ablation {
  bool use_wln = true;
  bool use_sum_aggregator = true;
  bool use_mse_loss = true;

  bool operator==(const Ablation&) const = default;
};

struct Dims {
  int in_dim = 2048;     // fingerprint bits
  int hidden = 64;       // HGNN hidden width
  int emb = 64;          // d_emb
  int dk = 64;           // attention width
  int wln_hidden = 64;   // WLN state and perceptron width
  int wln_layers = 3;
  int mlp_hidden = 64;

  bool operator==(const Dims&) const = default;
};

class Model {
 public:
  Model() = default;
  Model(const Dims& dims, const Ablation& ablation, std::uint64_t seed);

  const Dims& dims() const { return dims_; }
  const Ablation& ablation() const { return ablation_; }
  Ablation& ablation() { return ablation_; }
  std::uint64_t seed() const { return seed_; }

  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  Parameter& param(const std::string& name);
  const Parameter& param(const std::string& name) const;
  bool has_param(const std::string& name) const { return index_.count(name) > 0; }

  void zero_grad();
  // Plain gradient step on every parameter.
  void step(double learning_rate);

  // Expected shape of every named tensor for these dims.
  static std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> layout(
      const Dims& dims);

 private:
  friend Model read_checkpoint(std::istream& in);

  Dims dims_;
  Ablation ablation_;
  std::uint64_t seed_ = 0;
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

// Everything the forward pass needs from the hypergraph, computed once.
struct GraphInputs {
  std::size_t num_nodes = 0;
  CsrMatrix features;     // nodes x fingerprint bits, 0/1
  CsrMatrix propagation;  // P
  // Atoms of all node molecules stacked in node order.
  Tensor atom_features;
  std::vector<std::size_t> atom_offset;  // first stacked atom of each node
  std::vector<std::vector<std::size_t>> atoms_of_node;
  // Directed bond list over stacked atoms, both directions per bond.
  std::vector<std::size_t> msg_src;
  std::vector<std::size_t> msg_dst;
  Tensor msg_bond_features;
  std::vector<std::vector<std::size_t>> incoming;  // per stacked atom
};

// Atom feature rows for one molecule.
Tensor atom_features(const mol::MolGraph& m);

// `edge_mask` selects the hyperedges used for propagation (empty = all).
GraphInputs prepare_inputs(const hg::Hypergraph& h, std::span<const bool> edge_mask = {});

// Node-level activations on one tape.
struct NodeStates {
  Var x;            // HGNN output, nodes x emb
  Var x_gnn;        // molecule embeddings, nodes x emb (zeros without WLN)
  Var x_attn;       // nodes x dk
  Var z;            // concat(x, x_attn)
  Var atom_h;       // WLN atom states (invalid without WLN)
  Var atom_scores;  // stacked atoms x 1 center probabilities (invalid without WLN)
};

struct Session {
  std::unique_ptr<Tape> tape = std::make_unique<Tape>();
  std::map<std::string, Var> vars;
  NodeStates nodes;
};

using EdgeGroups = std::vector<std::vector<std::size_t>>;

// Puts every model parameter on the session tape.
void bind(Session& s, Model& m);

// Individual stages, exposed for testing; they expect bind() to have run.
Var hgnn_forward(Session& s, const GraphInputs& in);
struct WlnOutput {
  Var atom_h;
  Var atom_scores;
};
WlnOutput wln_forward(Session& s, const GraphInputs& in, const Model& m);
Var molecule_embeddings(Session& s, const GraphInputs& in, Var atom_h);
Var attention_fuse(Session& s, Var x, Var x_gnn);

// Records the full node-level forward pass on a fresh session.
Session forward(Model& m, const GraphInputs& in);

// Aggregated reaction embedding r_e per edge (sum or mean of z rows).
Var aggregate(const Session& s, const Model& m, const EdgeGroups& edges);
// Sigmoid-MLP score per aggregated row, n x 1.
Var mlp_score(Session& s, Var r);
// Sum of molecule embedding rows per edge, used by the zero-sum loss.
Var bond_change_sum(const Session& s, const EdgeGroups& edges);

struct ScoreBatch {
  Var reaction;  // r_e
  Var score;     // y_hat, n x 1
};
ScoreBatch score_edges(Session& s, const Model& m, const EdgeGroups& edges);

// Mean BCE over the batch plus lambda times the zero-sum penalty over the
// positive rows (lambda forced to 0 when use_mse_loss is off).
Var reaction_loss(Session& s, const Model& m, const ScoreBatch& batch,
                  std::span<const double> labels, const EdgeGroups& edges, double lambda_mse);

// Per-atom center BCE. `atoms` index stacked atoms; `labels` are 0/1.
Var center_loss(Session& s, std::span<const std::size_t> atoms, std::span<const double> labels);

// Versioned binary container; see README for the layout.
void write_checkpoint(const Model& m, std::ostream& out);
Model read_checkpoint(std::istream& in);
void save_checkpoint(const Model& m, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace chemhg::model
