//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "chemhg/error.hpp"
#include "chemhg/hypergraph.hpp"
#include "chemhg/model.hpp"

namespace chemhg::screen {

using num::Tensor;

class EmptySelection : public DataError {
 public:
  using DataError::DataError;
};

struct SAConfig {
  double t0 = 1.0;
  double alpha = 0.995;
  int iters_per_temp = 100;  // L
  long max_total_iters = 10000;
  int max_edge_size = 5;
  std::uint64_t seed = 0;
  int chains = 1;
  // Distinct low-objective selections kept per chain for scoring.
  int pool_size = 20;
};

using Selection = std::vector<std::size_t>;  // sorted row indices

struct SAState {
  Selection current;
  double current_obj = 0.0;
  Selection best;
  double best_obj = 0.0;
  double temperature = 0.0;
  long iterations = 0;
  int levels = 0;  // completed temperature levels
  // Lowest-objective distinct selections seen, best first.
  std::vector<std::pair<double, Selection>> pool;
};

struct TraceStep {
  long iteration = 0;
  double temperature = 0.0;
  double delta = 0.0;
  bool accepted = false;
  double current_obj = 0.0;
  double best_obj = 0.0;
};

// Euclidean norm of the summed embedding rows.
double objective(std::span<const std::size_t> selection, const Tensor& emb);

// 1 for delta <= 0, exp(-delta / t) otherwise.
double acceptance_probability(double delta, double temperature);

// One annealing chain over the rows of `emb`. Starts from one random row;
// moves add, remove or swap a row, chosen uniformly among the legal ones.
// The temperature is t0 * alpha^k after k completed levels of
// iters_per_temp steps; the chain stops at max_total_iters or once the
// temperature drops below 1e-9.
SAState anneal(const Tensor& emb, const SAConfig& config, std::vector<TraceStep>* trace = nullptr);

// `config.chains` independent chains seeded from (seed, "sa", chain), run in
// parallel. Returns the chain with the lowest best objective (lowest chain
// index on ties) with the pools of all chains merged.
SAState anneal_chains(const Tensor& emb, const SAConfig& config);

struct RandomResult {
  Selection best;
  double best_obj = 0.0;
};

// `iters` uniform subsets with size uniform in [2, max_edge_size].
RandomResult random_select(const Tensor& emb, long iters, int max_edge_size, std::uint64_t seed);

struct Candidate {
  std::vector<hg::NodeId> nodes;
  double mlp_score = 0.0;
  double objective = 0.0;
};

// Scores each node set as a hypothetical hyperedge; nothing is inserted.
// Sorted by score, highest first (ties by node list).
std::vector<Candidate> score_candidates(model::Model& m, const model::GraphInputs& in,
                                        const std::vector<std::vector<hg::NodeId>>& sets,
                                        const Tensor& node_emb);

// `rank\tmlp_score\tobjective\tsmiles.smiles...` for the first top_k.
void write_report(const std::vector<Candidate>& cands, const hg::Hypergraph& h,
                  std::size_t top_k, std::ostream& out);

}  // namespace chemhg::screen
