//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chemhg/error.hpp"
#include "chemhg/hypergraph.hpp"
#include "chemhg/model.hpp"
#include "chemhg/negsample.hpp"

namespace chemhg::train {

using hg::EdgeId;

class DivergenceDetected : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct SplitSpec {
  double train = 3.0;
  double val = 1.0;
  double test = 1.0;
  std::uint64_t seed = 0;
};

struct Splits {
  std::vector<EdgeId> train;
  std::vector<EdgeId> val;
  std::vector<EdgeId> test;
};

// Pairing group of every edge: a negative with a source edge joins its
// source, everything else is its own group.
std::vector<EdgeId> edge_groups(const hg::Hypergraph& h,
                                std::span<const neg::NegativeSample> samples);

// Seeded shuffle of the groups, then a contiguous cut at the ratio
// boundaries measured in edges. A group lands where its first edge falls,
// so paired edges never straddle splits. Needs at least five edges.
Splits split(const hg::Hypergraph& h, std::span<const neg::NegativeSample> samples,
             const SplitSpec& spec);

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double specificity = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  bool collapsed = false;
};

// Collapse: predicted-positive fraction at most 2% or at least 98%.
Metrics metrics_from_confusion(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);
Metrics compute_metrics(std::span<const double> scores, std::span<const double> labels,
                        double threshold);

// `accuracy=0.9500 precision=... collapsed=false` on one line.
std::string metrics_line(const Metrics& m);
// Aligned two-column table.
void print_metrics_table(const Metrics& m, std::ostream& out);

enum class Optimizer { kGd, kAdam };
const char* optimizer_name(Optimizer o);
Optimizer parse_optimizer(std::string_view s);

struct TrainConfig {
  int epochs = 500;
  double learning_rate = 0.005;
  double lambda_mse = 0.01;
  double wln_center_weight = 0.1;
  double threshold = 0.5;
  // Rescale the gradient to this global L2 norm when it is larger (0 = off).
  double clip_norm = 0.0;
  Optimizer optimizer = Optimizer::kAdam;
  std::uint64_t seed = 0;
  model::Ablation ablation;
  model::Dims dims;
  // Keep negative edges out of message passing.
  bool leave_out_negatives = false;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_f1 = 0.0;
  double learning_rate = 0.0;
};

// Stacked-atom center labels drawn from mapped positive reactions.
struct CenterLabels {
  std::vector<std::size_t> atoms;
  std::vector<double> labels;
};

// Reactant atoms of the reactions behind `edges` (edge id == reaction index)
// labelled 1 when they belong to the reaction center.
CenterLabels center_labels(std::span<const mol::Reaction> reactions,
                           const std::vector<std::vector<hg::ReactantLink>>& links,
                           const model::GraphInputs& inputs, std::span<const EdgeId> edges);

// Everything training needs besides the config.
struct Problem {
  const hg::Hypergraph* h = nullptr;
  Splits splits;
  CenterLabels centers;  // may be empty
};

struct TrainResult {
  model::Model best;  // parameters with the highest validation F1
  int best_epoch = 0;
  double best_val_f1 = 0.0;
  std::vector<EpochLog> log;
};

// Reactions, the hypergraph built from them and the negatives inserted
// into it. Edge i < reactions.size() is reaction i.
struct Dataset {
  std::vector<mol::Reaction> reactions;
  std::vector<std::vector<hg::ReactantLink>> links;
  hg::Hypergraph h;
  std::vector<neg::NegativeSample> negatives;
};

Dataset build_dataset(std::vector<mol::Reaction> reactions, const hg::BuildOptions& options = {});
// Generates negatives with `config` and inserts them.
neg::SampleResult add_negatives(Dataset& d, const neg::NegSampleConfig& config);

// Splits the dataset and collects center labels over the training split.
// `d` must outlive the problem.
Problem make_problem(const Dataset& d, const SplitSpec& spec, bool leave_out_negatives = false);

// Fresh SNS node sets (not inserted) avoiding every edge of `h`, used to
// evaluate against random negatives.
std::vector<std::vector<hg::NodeId>> fresh_sns(const hg::Hypergraph& h, std::size_t count,
                                               std::uint64_t seed);

model::GraphInputs inputs_for(const hg::Hypergraph& h, bool leave_out_negatives);

// Full-batch training with Adam (default) or plain gradient descent. Each
// epoch scores the validation split with the current parameters, then
// takes one step on the training loss. Ties
// in validation F1 keep the earlier epoch. Throws DivergenceDetected when
// the loss stops being finite.
TrainResult train(const Problem& p, const TrainConfig& config);

model::EdgeGroups groups_of(const hg::Hypergraph& h, std::span<const EdgeId> edges);
std::vector<double> labels_of(const hg::Hypergraph& h, std::span<const EdgeId> edges);

// Scores arbitrary node sets against the hypergraph context; the sets are
// not added to the hypergraph.
std::vector<double> predict(model::Model& m, const model::GraphInputs& in,
                            const model::EdgeGroups& sets);

Metrics evaluate(model::Model& m, const model::GraphInputs& in, const hg::Hypergraph& h,
                 std::span<const EdgeId> edges, double threshold);

// `epoch,train_loss,val_f1,lr` lines.
void write_log(std::span<const EpochLog> log, std::ostream& out);

// Header then `edge_id\tlabel\tr_e` with comma separated components.
void export_embeddings(model::Model& m, const model::GraphInputs& in, const hg::Hypergraph& h,
                       std::span<const EdgeId> edges, std::ostream& out);
void export_embeddings(model::Model& m, const model::GraphInputs& in, const hg::Hypergraph& h,
                       std::span<const EdgeId> edges, const std::string& path);

}  // namespace chemhg::train
