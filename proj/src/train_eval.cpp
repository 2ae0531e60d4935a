//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "chemhg/train_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "chemhg/reaction_center.hpp"
#include "chemhg/rng.hpp"

namespace chemhg::train {

// ---- splitting -------------------------------------------------------------

std::vector<EdgeId> edge_groups(const hg::Hypergraph& h,
                                std::span<const neg::NegativeSample> samples) {
  std::vector<EdgeId> group(h.num_edges());
  for (EdgeId e = 0; e < h.num_edges(); ++e) group[e] = e;
  for (const neg::NegativeSample& s : samples) {
    if (!s.edge || !s.source_edge) continue;
    if (*s.edge >= h.num_edges() || *s.source_edge >= h.num_edges()) {
      throw std::invalid_argument("edge_groups: sample edge out of range");
    }
    group[*s.edge] = *s.source_edge;
  }
  return group;
}

Splits split(const hg::Hypergraph& h, std::span<const neg::NegativeSample> samples,
             const SplitSpec& spec) {
  if (!(spec.train > 0 && spec.val > 0 && spec.test > 0)) {
    throw std::invalid_argument("split ratios must be positive");
  }
  const std::size_t n = h.num_edges();
  if (n < 5) throw std::invalid_argument("split needs at least 5 edges");
  const std::vector<EdgeId> group = edge_groups(h, samples);
  // Members per group in edge order, groups in order of first appearance.
  std::map<EdgeId, std::vector<EdgeId>> members;
  std::vector<EdgeId> order;
  for (EdgeId e = 0; e < n; ++e) {
    auto& m = members[group[e]];
    if (m.empty()) order.push_back(group[e]);
    m.push_back(e);
  }
  Rng rng(derive_seed(spec.seed, "split"));
  rng.shuffle(order);
  const double total = spec.train + spec.val + spec.test;
  const auto b1 = static_cast<std::size_t>(std::llround(n * spec.train / total));
  const auto b2 = static_cast<std::size_t>(std::llround(n * (spec.train + spec.val) / total));
  Splits out;
  std::size_t offset = 0;
  for (EdgeId g : order) {
    const auto& m = members[g];
    auto& dst = offset < b1 ? out.train : offset < b2 ? out.val : out.test;
    dst.insert(dst.end(), m.begin(), m.end());
    offset += m.size();
  }
  return out;
}

// ---- metrics ---------------------------------------------------------------

namespace {

double ratio(std::size_t a, std::size_t b) {
  return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
}

}  // namespace

Metrics metrics_from_confusion(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.tn = tn;
  m.fn = fn;
  const std::size_t n = tp + fp + tn + fn;
  m.accuracy = ratio(tp + tn, n);
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  m.specificity = ratio(tn, tn + fp);
  const double pr = m.precision + m.recall;
  m.f1 = pr == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / pr;
  const double pos_frac = ratio(tp + fp, n);
  m.collapsed = n > 0 && (pos_frac <= 0.02 || pos_frac >= 0.98);
  return m;
}

Metrics compute_metrics(std::span<const double> scores, std::span<const double> labels,
                        double threshold) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("compute_metrics: scores and labels differ in length");
  }
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    const bool pos = labels[i] > 0.5;
    if (pred && pos) ++tp;
    else if (pred) ++fp;
    else if (pos) ++fn;
    else ++tn;
  }
  return metrics_from_confusion(tp, fp, tn, fn);
}

std::string metrics_line(const Metrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "accuracy=%.4f precision=%.4f recall=%.4f f1=%.4f specificity=%.4f "
                "tp=%zu fp=%zu tn=%zu fn=%zu collapsed=%s",
                m.accuracy, m.precision, m.recall, m.f1, m.specificity, m.tp, m.fp, m.tn, m.fn,
                m.collapsed ? "true" : "false");
  return buf;
}

void print_metrics_table(const Metrics& m, std::ostream& out) {
  char buf[64];
  auto row = [&](const char* name, double v) {
    std::snprintf(buf, sizeof buf, "%-12s %.4f\n", name, v);
    out << buf;
  };
  row("accuracy", m.accuracy);
  row("precision", m.precision);
  row("recall", m.recall);
  row("f1", m.f1);
  row("specificity", m.specificity);
  std::snprintf(buf, sizeof buf, "%-12s %s\n", "collapsed", m.collapsed ? "yes" : "no");
  out << buf;
  std::snprintf(buf, sizeof buf, "%-12s TP=%zu FP=%zu TN=%zu FN=%zu\n", "confusion", m.tp, m.fp,
                m.tn, m.fn);
  out << buf;
}

// ---- training --------------------------------------------------------------

CenterLabels center_labels(std::span<const mol::Reaction> reactions,
                           const std::vector<std::vector<hg::ReactantLink>>& links,
                           const model::GraphInputs& inputs, std::span<const EdgeId> edges) {
  CenterLabels out;
  for (EdgeId e : edges) {
    if (e >= reactions.size()) continue;  // negatives carry no reaction
    const mol::Reaction& r = reactions[e];
    if (!mol::is_mapped(r)) continue;
    const auto flags = mol::reactant_center_flags(r);
    for (std::size_t i = 0; i < flags.size(); ++i) {
      const hg::ReactantLink& link = links[e][i];
      for (std::size_t a = 0; a < flags[i].size(); ++a) {
        out.atoms.push_back(inputs.atom_offset[link.node] +
                            static_cast<std::size_t>(link.atom_map[a]));
        out.labels.push_back(flags[i][a] ? 1.0 : 0.0);
      }
    }
  }
  return out;
}

Dataset build_dataset(std::vector<mol::Reaction> reactions, const hg::BuildOptions& options) {
  Dataset d;
  d.reactions = std::move(reactions);
  d.h = hg::build(d.reactions, options, &d.links);
  return d;
}

neg::SampleResult add_negatives(Dataset& d, const neg::NegSampleConfig& config) {
  neg::SampleResult res = neg::generate(d.h, d.reactions, d.links, config);
  neg::insert(d.h, res.samples);
  d.negatives.insert(d.negatives.end(), res.samples.begin(), res.samples.end());
  return res;
}

Problem make_problem(const Dataset& d, const SplitSpec& spec, bool leave_out_negatives) {
  Problem p;
  p.h = &d.h;
  p.splits = split(d.h, d.negatives, spec);
  const model::GraphInputs in = inputs_for(d.h, leave_out_negatives);
  p.centers = center_labels(d.reactions, d.links, in, p.splits.train);
  return p;
}

std::vector<std::vector<hg::NodeId>> fresh_sns(const hg::Hypergraph& h, std::size_t count,
                                               std::uint64_t seed) {
  neg::Sampler sampler(h, 1000);
  for (const auto& e : h.edges()) sampler.reserve(e.nodes);
  Rng rng(derive_seed(seed, "eval.sns"));
  std::vector<std::vector<hg::NodeId>> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(sampler.sns(rng).nodes);
  return out;
}

model::GraphInputs inputs_for(const hg::Hypergraph& h, bool leave_out_negatives) {
  if (!leave_out_negatives) return model::prepare_inputs(h);
  // std::vector<bool> has no contiguous storage to span over.
  const auto mask = std::make_unique<bool[]>(h.num_edges());
  for (EdgeId e = 0; e < h.num_edges(); ++e) {
    mask[e] = h.edge(e).label == hg::EdgeLabel::kPositive;
  }
  return model::prepare_inputs(h, std::span<const bool>(mask.get(), h.num_edges()));
}

model::EdgeGroups groups_of(const hg::Hypergraph& h, std::span<const EdgeId> edges) {
  model::EdgeGroups out;
  out.reserve(edges.size());
  for (EdgeId e : edges) out.emplace_back(h.edge(e).nodes.begin(), h.edge(e).nodes.end());
  return out;
}

std::vector<double> labels_of(const hg::Hypergraph& h, std::span<const EdgeId> edges) {
  std::vector<double> out;
  out.reserve(edges.size());
  for (EdgeId e : edges) out.push_back(h.edge(e).label == hg::EdgeLabel::kPositive ? 1.0 : 0.0);
  return out;
}

namespace {

std::vector<double> column(const num::Tensor& t) {
  std::vector<double> out(t.rows());
  for (std::size_t i = 0; i < t.rows(); ++i) out[i] = t(i, 0);
  return out;
}

// Adam with the usual defaults (beta1 0.9, beta2 0.999, eps 1e-8).
class Adam {
 public:
  void step(model::Model& m, double lr) {
    auto& params = m.parameters();
    if (first_.empty()) {
      for (const auto& p : params) {
        first_.emplace_back(p.value.rows(), p.value.cols());
        second_.emplace_back(p.value.rows(), p.value.cols());
      }
    }
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    for (std::size_t k = 0; k < params.size(); ++k) {
      auto v = params[k].value.data();
      auto g = params[k].grad.data();
      auto m1 = first_[k].data();
      auto m2 = second_[k].data();
      for (std::size_t i = 0; i < v.size(); ++i) {
        m1[i] = kBeta1 * m1[i] + (1 - kBeta1) * g[i];
        m2[i] = kBeta2 * m2[i] + (1 - kBeta2) * g[i] * g[i];
        v[i] -= lr * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + 1e-8);
      }
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  std::vector<num::Tensor> first_;
  std::vector<num::Tensor> second_;
  int t_ = 0;
};

}  // namespace

const char* optimizer_name(Optimizer o) { return o == Optimizer::kAdam ? "adam" : "gd"; }

Optimizer parse_optimizer(std::string_view s) {
  if (s == "gd") return Optimizer::kGd;
  if (s == "adam") return Optimizer::kAdam;
  throw std::invalid_argument("unknown optimizer '" + std::string(s) + "'");
}

TrainResult train(const Problem& p, const TrainConfig& config) {
  if (p.h == nullptr) throw std::invalid_argument("train: no hypergraph");
  if (!(config.learning_rate > 0)) throw std::invalid_argument("learning rate must be > 0");
  if (!(config.threshold > 0 && config.threshold < 1)) {
    throw std::invalid_argument("threshold must lie in (0, 1)");
  }
  const hg::Hypergraph& h = *p.h;
  const std::vector<double> train_labels = labels_of(h, p.splits.train);
  const bool has_pos = std::count(train_labels.begin(), train_labels.end(), 1.0) > 0;
  const bool has_neg = std::count(train_labels.begin(), train_labels.end(), 0.0) > 0;
  if (!has_pos || !has_neg) throw DataError("training split needs both positive and negative edges");

  model::Dims dims = config.dims;
  dims.in_dim = h.fingerprint_params().bits;
  model::Model m(dims, config.ablation, config.seed);
  const model::GraphInputs in = inputs_for(h, config.leave_out_negatives);
  const model::EdgeGroups train_edges = groups_of(h, p.splits.train);
  const model::EdgeGroups val_edges = groups_of(h, p.splits.val);
  const std::vector<double> val_labels = labels_of(h, p.splits.val);
  const bool use_centers = config.ablation.use_wln && config.wln_center_weight > 0 &&
                           !p.centers.atoms.empty();

  Adam adam;
  TrainResult res;
  res.best = m;
  res.best_val_f1 = -1.0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    m.zero_grad();
    double loss_value = 0.0;
    try {
      model::Session s = model::forward(m, in);
      const model::ScoreBatch b = model::score_edges(s, m, train_edges);
      num::Var loss = model::reaction_loss(s, m, b, train_labels, train_edges, config.lambda_mse);
      if (use_centers) {
        loss = num::add(loss, num::scale(model::center_loss(s, p.centers.atoms, p.centers.labels),
                                         config.wln_center_weight));
      }
      loss_value = loss.value()[0];
      if (!std::isfinite(loss_value)) throw num::NonFiniteValue("loss");
      double val_f1 = 0.0;
      if (!val_edges.empty()) {
        const model::ScoreBatch vb = model::score_edges(s, m, val_edges);
        val_f1 = compute_metrics(column(vb.score.value()), val_labels, config.threshold).f1;
      }
      res.log.push_back({epoch, loss_value, val_f1, config.learning_rate});
      if (val_f1 > res.best_val_f1) {
        res.best_val_f1 = val_f1;
        res.best_epoch = epoch;
        res.best = m;
      }
      s.tape->backward(loss);
    } catch (const NumericalError& e) {
      throw DivergenceDetected("training diverged at epoch " + std::to_string(epoch) + ": " +
                               e.what());
    }
    if (config.clip_norm > 0) {
      double sq = 0.0;
      for (const auto& prm : m.parameters()) {
        for (std::size_t i = 0; i < prm.grad.size(); ++i) sq += prm.grad[i] * prm.grad[i];
      }
      const double norm = std::sqrt(sq);
      if (norm > config.clip_norm) {
        const double f = config.clip_norm / norm;
        for (auto& prm : m.parameters()) {
          for (std::size_t i = 0; i < prm.grad.size(); ++i) prm.grad[i] *= f;
        }
      }
    }
    if (config.optimizer == Optimizer::kAdam) {
      adam.step(m, config.learning_rate);
    } else {
      m.step(config.learning_rate);
    }
    for (const auto& prm : m.parameters()) {
      for (std::size_t i = 0; i < prm.value.size(); ++i) {
        if (!std::isfinite(prm.value[i])) {
          throw DivergenceDetected("training diverged at epoch " + std::to_string(epoch) +
                                   ": non-finite parameter " + prm.name);
        }
      }
    }
  }
  return res;
}

std::vector<double> predict(model::Model& m, const model::GraphInputs& in,
                            const model::EdgeGroups& sets) {
  if (sets.empty()) return {};
  model::Session s = model::forward(m, in);
  const model::ScoreBatch b = model::score_edges(s, m, sets);
  return column(b.score.value());
}

Metrics evaluate(model::Model& m, const model::GraphInputs& in, const hg::Hypergraph& h,
                 std::span<const EdgeId> edges, double threshold) {
  const std::vector<double> scores = predict(m, in, groups_of(h, edges));
  return compute_metrics(scores, labels_of(h, edges), threshold);
}

void write_log(std::span<const EpochLog> log, std::ostream& out) {
  char buf[128];
  out << "epoch,train_loss,val_f1,lr\n";
  for (const EpochLog& e : log) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", e.epoch, e.train_loss, e.val_f1,
                  e.learning_rate);
    out << buf;
  }
}

void export_embeddings(model::Model& m, const model::GraphInputs& in, const hg::Hypergraph& h,
                       std::span<const EdgeId> edges, std::ostream& out) {
  out << "#edge_id\tlabel\tr_e\n";
  if (edges.empty()) return;
  model::Session s = model::forward(m, in);
  const num::Var r = model::aggregate(s, m, groups_of(h, edges));
  const num::Tensor& t = r.value();
  char buf[32];
  for (std::size_t i = 0; i < edges.size(); ++i) {
    out << edges[i] << '\t' << hg::label_name(h.edge(edges[i]).label) << '\t';
    for (std::size_t j = 0; j < t.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", t(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

void export_embeddings(model::Model& m, const model::GraphInputs& in, const hg::Hypergraph& h,
                       std::span<const EdgeId> edges, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  export_embeddings(m, in, h, edges, out);
  if (!out) throw DataError("write to " + path + " failed");
}

}  // namespace chemhg::train
