//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

// Command-line driver: synth, ingest, negsample, train, eval, screen and
// export-embeddings. Options come from an INI-style config file
// (`[section]` headers, `key = value` lines) and are overridden by flags
// of the same dotted name, e.g. `[training] epochs = 50` or
// `--training.epochs 50`.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chemhg/error.hpp"
#include "chemhg/hypergraph.hpp"
#include "chemhg/model.hpp"
#include "chemhg/negsample.hpp"
#include "chemhg/reaction_center.hpp"
#include "chemhg/screen.hpp"
#include "chemhg/smiles.hpp"
#include "chemhg/synthetic.hpp"
#include "chemhg/train_eval.hpp"

namespace fs = std::filesystem;
using namespace chemhg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDivergence = 3;

class UsageError : public Error {
 public:
  using Error::Error;
};

// INI reader that maps `[a] b = 1` to the flat option name `a.b`, so every
// config key is also a plain command-line flag.
class FlatIni : public CLI::ConfigINI {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    std::vector<CLI::ConfigItem> out;
    for (CLI::ConfigItem item : CLI::ConfigINI::from_config(in)) {
      if (item.name == "++" || item.name == "--") continue;
      std::string full;
      for (const std::string& p : item.parents) full += p + ".";
      item.name = full + item.name;
      item.parents.clear();
      out.push_back(std::move(item));
    }
    return out;
  }
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string dataset;
  std::string out_dir = "out";
  std::string checkpoint;  // empty: <out_dir>/model.ckpt
  mol::FingerprintParams fp;
  bool isomorphism_dedup = false;
  train::SplitSpec split;
  std::string strategy = "MIXED";
  neg::NegSampleConfig neg;
  std::string optimizer = "adam";
  train::TrainConfig train;
  screen::SAConfig sa;
  std::size_t top_k = 10;
  std::string eval_split = "test";
  std::string against = "mixed";
  std::string export_split = "all";
  bool strict = false;
  bool small_corpus = false;
  std::string synth_out;
};

std::string out_path(const RunConfig& c, const char* name) {
  return (fs::path(c.out_dir) / name).string();
}

std::string checkpoint_path(const RunConfig& c) {
  return c.checkpoint.empty() ? out_path(c, "model.ckpt") : c.checkpoint;
}

void ensure_out_dir(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec) throw DataError("cannot create output directory " + c.out_dir + ": " + ec.message());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string(what) + " path is not set");
  if (!fs::is_regular_file(path)) throw UsageError(std::string(what) + " not found: " + path);
}

hg::BuildOptions build_options(const RunConfig& c) {
  hg::BuildOptions o;
  o.fp = c.fp;
  o.isomorphism_dedup = c.isomorphism_dedup;
  return o;
}

// Parses the dataset; failures are listed on stderr and only stop the run
// under --strict.
std::vector<mol::Reaction> read_dataset(const RunConfig& c, std::size_t* failures = nullptr) {
  require_file(c.dataset, "dataset");
  mol::ReactionFile file = mol::read_reactions_file(c.dataset);
  for (const auto& f : file.failures) {
    std::fprintf(stderr, "%s:%zu: %s\n", c.dataset.c_str(), f.line_no, f.message.c_str());
  }
  if (c.strict && !file.failures.empty()) {
    throw DataError("line " + std::to_string(file.failures.front().line_no) +
                    ": unparseable reaction (--strict)");
  }
  if (failures) *failures = file.failures.size();
  std::vector<mol::Reaction> out;
  out.reserve(file.reactions.size());
  for (auto& line : file.reactions) out.push_back(std::move(line.reaction));
  if (out.empty()) throw DataError("dataset " + c.dataset + " holds no reactions");
  return out;
}

// Dataset plus the negatives recorded by `negsample`.
train::Dataset load_dataset_with_negatives(const RunConfig& c) {
  train::Dataset d = train::build_dataset(read_dataset(c), build_options(c));
  const std::string path = out_path(c, "negatives.tsv");
  require_file(path, "negatives file (run negsample first)");
  std::ifstream in(path, std::ios::binary);
  d.negatives = neg::read_samples(d.h, in);
  return d;
}

model::Model load_model(const RunConfig& c, const hg::Hypergraph& h) {
  const std::string path = checkpoint_path(c);
  require_file(path, "checkpoint (run train first)");
  model::Model m = model::load_checkpoint(path);
  if (m.dims().in_dim != h.fingerprint_params().bits) {
    throw DataError("checkpoint expects " + std::to_string(m.dims().in_dim) +
                    "-bit fingerprints but fingerprint.bits is " +
                    std::to_string(h.fingerprint_params().bits));
  }
  return m;
}

const std::vector<hg::EdgeId>& pick_split(const train::Splits& s, const std::string& name) {
  if (name == "train") return s.train;
  if (name == "val") return s.val;
  if (name == "test") return s.test;
  throw UsageError("unknown split '" + name + "' (train, val, test)");
}

int cmd_synth(const RunConfig& c) {
  const synth::CorpusConfig cc = c.small_corpus ? synth::small_corpus() : synth::default_corpus();
  const std::vector<synth::CorpusLine> lines = synth::make_corpus(cc);
  if (c.synth_out.empty() || c.synth_out == "-") {
    synth::write_corpus(lines, std::cout);
  } else {
    std::ofstream out = open_out(c.synth_out);
    synth::write_corpus(lines, out);
  }
  std::fprintf(stderr, "wrote %zu reactions\n", lines.size());
  return kExitOk;
}

int cmd_ingest(const RunConfig& c) {
  std::size_t failures = 0;
  std::vector<mol::Reaction> reactions = read_dataset(c, &failures);
  const train::Dataset d = train::build_dataset(std::move(reactions), build_options(c));
  ensure_out_dir(c);
  {
    std::ofstream out = open_out(out_path(c, "nodes.tsv"));
    hg::write_node_table(d.h, out);
  }
  {
    std::ofstream out = open_out(out_path(c, "edges.tsv"));
    hg::write_edge_table(d.h, out);
  }
  std::map<std::size_t, std::size_t> sizes;
  for (const auto& e : d.h.edges()) ++sizes[e.nodes.size()];
  std::size_t mapped = 0;
  for (const auto& r : d.reactions) mapped += mol::is_mapped(r);
  std::printf("reactions\t%zu\n", d.reactions.size());
  std::printf("failures\t%zu\n", failures);
  std::printf("nodes\t%zu\n", d.h.num_nodes());
  std::printf("edges\t%zu\n", d.h.num_edges());
  std::printf("mapped_fraction\t%.4f\n",
              static_cast<double>(mapped) / static_cast<double>(d.reactions.size()));
  for (const auto& [size, count] : sizes) std::printf("edge_size_%zu\t%zu\n", size, count);
  return kExitOk;
}

int cmd_negsample(const RunConfig& c) {
  train::Dataset d = train::build_dataset(read_dataset(c), build_options(c));
  neg::NegSampleConfig nc = c.neg;
  nc.strategy = neg::parse_strategy(c.strategy);
  nc.seed = c.seed;
  const neg::SampleResult r = train::add_negatives(d, nc);
  ensure_out_dir(c);
  std::ofstream out = open_out(out_path(c, "negatives.tsv"));
  neg::write_samples(d.negatives, out);
  std::printf("requested\t%zu\n", r.requested);
  std::printf("generated\t%zu\n", r.samples.size());
  for (int s = 0; s < 4; ++s) {
    std::printf("%s\t%zu%s\n", neg::strategy_name(static_cast<neg::Strategy>(s)),
                r.per_strategy[static_cast<std::size_t>(s)],
                r.exhausted[static_cast<std::size_t>(s)] ? "\texhausted" : "");
  }
  std::printf("rcns_skipped\t%zu\n", r.skips.size());
  std::printf("unmapped\t%zu\n", r.unmapped);
  return kExitOk;
}

train::TrainConfig train_config(const RunConfig& c) {
  train::TrainConfig tc = c.train;
  tc.optimizer = train::parse_optimizer(c.optimizer);
  tc.seed = c.seed;
  tc.dims.in_dim = c.fp.bits;
  return tc;
}

int cmd_train(const RunConfig& c) {
  const train::Dataset d = load_dataset_with_negatives(c);
  train::SplitSpec sp = c.split;
  sp.seed = c.seed;
  const train::TrainConfig tc = train_config(c);
  const train::Problem p = train::make_problem(d, sp, tc.leave_out_negatives);
  const train::TrainResult r = train::train(p, tc);
  ensure_out_dir(c);
  model::save_checkpoint(r.best, checkpoint_path(c));
  std::ofstream log = open_out(out_path(c, "train_log.csv"));
  train::write_log(r.log, log);
  std::printf("best_epoch\t%d\n", r.best_epoch);
  std::printf("best_val_f1\t%.4f\n", r.best_val_f1);
  std::printf("checkpoint\t%s\n", checkpoint_path(c).c_str());
  return kExitOk;
}

int cmd_eval(const RunConfig& c) {
  const train::Dataset d = load_dataset_with_negatives(c);
  train::SplitSpec sp = c.split;
  sp.seed = c.seed;
  model::Model m = load_model(c, d.h);
  const train::Problem p = train::make_problem(d, sp, c.train.leave_out_negatives);
  const model::GraphInputs in = train::inputs_for(d.h, c.train.leave_out_negatives);
  const std::vector<hg::EdgeId>& edges = pick_split(p.splits, c.eval_split);
  train::Metrics mt;
  if (c.against == "mixed") {
    mt = train::evaluate(m, in, d.h, edges, c.train.threshold);
  } else if (c.against == "sns") {
    // Positives of the split against as many fresh random reactant sets.
    std::vector<hg::EdgeId> pos;
    for (hg::EdgeId e : edges) {
      if (d.h.edge(e).label == hg::EdgeLabel::kPositive) pos.push_back(e);
    }
    model::EdgeGroups sets = train::groups_of(d.h, pos);
    std::vector<double> labels(pos.size(), 1.0);
    for (auto& s : train::fresh_sns(d.h, pos.size(), c.seed)) {
      sets.emplace_back(s.begin(), s.end());
      labels.push_back(0.0);
    }
    const std::vector<double> scores = train::predict(m, in, sets);
    mt = train::compute_metrics(scores, labels, c.train.threshold);
  } else {
    throw UsageError("unknown --eval.against '" + c.against + "' (mixed, sns)");
  }
  train::print_metrics_table(mt, std::cout);
  const std::string line = train::metrics_line(mt);
  std::printf("%s\n", line.c_str());
  ensure_out_dir(c);
  std::ofstream out = open_out(out_path(c, "metrics.txt"));
  out << line << '\n';
  return kExitOk;
}

int cmd_screen(const RunConfig& c) {
  const train::Dataset d = load_dataset_with_negatives(c);
  model::Model m = load_model(c, d.h);
  const model::GraphInputs in = train::inputs_for(d.h, c.train.leave_out_negatives);
  const model::Session s = model::forward(m, in);
  const num::Tensor& x = s.nodes.x_gnn.value();
  // Search over real molecules only; virtual nodes exist for training.
  std::vector<hg::NodeId> real;
  for (hg::NodeId v = 0; v < d.h.num_nodes(); ++v) {
    if (!d.h.node(v).is_virtual) real.push_back(v);
  }
  num::Tensor emb(real.size(), x.cols());
  for (std::size_t i = 0; i < real.size(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) emb(i, j) = x(real[i], j);
  }
  screen::SAConfig sa = c.sa;
  sa.seed = c.seed;
  sa.pool_size = std::max<int>(sa.pool_size, 2 * static_cast<int>(c.top_k));
  const screen::SAState st = screen::anneal_chains(emb, sa);
  std::vector<std::vector<hg::NodeId>> sets;
  for (const auto& item : st.pool) {
    // A reaction needs at least two reactants.
    if (item.second.size() < 2) continue;
    std::vector<hg::NodeId> nodes;
    for (std::size_t i : item.second) nodes.push_back(real[i]);
    sets.push_back(std::move(nodes));
  }
  std::vector<screen::Candidate> cands;
  if (!sets.empty()) cands = screen::score_candidates(m, in, sets, x);
  ensure_out_dir(c);
  std::ofstream out = open_out(out_path(c, "candidates.tsv"));
  screen::write_report(cands, d.h, c.top_k, out);
  screen::write_report(cands, d.h, c.top_k, std::cout);
  std::fprintf(stderr, "iterations %ld, best objective %.6f\n", st.iterations, st.best_obj);
  return kExitOk;
}

int cmd_export(const RunConfig& c) {
  const train::Dataset d = load_dataset_with_negatives(c);
  model::Model m = load_model(c, d.h);
  const model::GraphInputs in = train::inputs_for(d.h, c.train.leave_out_negatives);
  std::vector<hg::EdgeId> edges;
  if (c.export_split == "all") {
    for (hg::EdgeId e = 0; e < d.h.num_edges(); ++e) edges.push_back(e);
  } else {
    train::SplitSpec sp = c.split;
    sp.seed = c.seed;
    edges = pick_split(train::make_problem(d, sp).splits, c.export_split);
  }
  ensure_out_dir(c);
  train::export_embeddings(m, in, d.h, edges, out_path(c, "embeddings.tsv"));
  std::printf("embeddings\t%zu\t%s\n", edges.size(), out_path(c, "embeddings.tsv").c_str());
  return kExitOk;
}

void add_global_options(CLI::App& app, RunConfig& c) {
  app.add_option("--seed", c.seed, "Root seed for every random stream")->capture_default_str();
  app.add_option("--paths.dataset,--dataset", c.dataset, "Reaction file (default: none, required)")->capture_default_str();
  app.add_option("--paths.out_dir,--out-dir", c.out_dir, "Artifact directory")
      ->capture_default_str();
  app.add_option("--paths.checkpoint", c.checkpoint,
                 "Checkpoint path (default: <out_dir>/model.ckpt)")
      ->capture_default_str();
  app.add_option("--fingerprint.radius", c.fp.radius)->capture_default_str();
  app.add_option("--fingerprint.bits", c.fp.bits)->capture_default_str();
  app.add_flag("--build.isomorphism_dedup", c.isomorphism_dedup,
               "Merge reactants by graph isomorphism (default: off)")
      ->capture_default_str();
  app.add_option("--split.train", c.split.train)->capture_default_str();
  app.add_option("--split.val", c.split.val)->capture_default_str();
  app.add_option("--split.test", c.split.test)->capture_default_str();
  app.add_option("--negsample.strategy", c.strategy, "SNS, MNS, CNS, RCNS or MIXED")
      ->capture_default_str();
  app.add_option("--negsample.ratio", c.neg.ratio, "Negatives per positive")
      ->capture_default_str();
  app.add_option("--negsample.max_attempts", c.neg.max_attempts)->capture_default_str();
  app.add_option("--training.epochs", c.train.epochs)->capture_default_str();
  app.add_option("--training.learning_rate", c.train.learning_rate)->capture_default_str();
  app.add_option("--training.optimizer", c.optimizer, "adam or gd")->capture_default_str();
  app.add_option("--training.clip_norm", c.train.clip_norm, "Global gradient norm cap, 0 = off")
      ->capture_default_str();
  app.add_option("--training.lambda_mse", c.train.lambda_mse)->capture_default_str();
  app.add_option("--training.center_weight", c.train.wln_center_weight)->capture_default_str();
  app.add_option("--training.threshold", c.train.threshold)->capture_default_str();
  app.add_option("--training.leave_out_negatives", c.train.leave_out_negatives,
                 "Keep negative edges out of propagation")
      ->capture_default_str();
  app.add_option("--training.use_wln", c.train.ablation.use_wln)->capture_default_str();
  app.add_option("--training.use_sum", c.train.ablation.use_sum_aggregator)
      ->capture_default_str();
  app.add_option("--training.use_mse", c.train.ablation.use_mse_loss)->capture_default_str();
  app.add_option("--model.hidden", c.train.dims.hidden)->capture_default_str();
  app.add_option("--model.emb", c.train.dims.emb)->capture_default_str();
  app.add_option("--model.dk", c.train.dims.dk)->capture_default_str();
  app.add_option("--model.wln_hidden", c.train.dims.wln_hidden)->capture_default_str();
  app.add_option("--model.wln_layers", c.train.dims.wln_layers)->capture_default_str();
  app.add_option("--model.mlp_hidden", c.train.dims.mlp_hidden)->capture_default_str();
  app.add_option("--sa.t0", c.sa.t0)->capture_default_str();
  app.add_option("--sa.alpha", c.sa.alpha)->capture_default_str();
  app.add_option("--sa.iters_per_temp", c.sa.iters_per_temp)->capture_default_str();
  app.add_option("--sa.max_iters,--iters", c.sa.max_total_iters)->capture_default_str();
  app.add_option("--sa.max_edge_size", c.sa.max_edge_size)->capture_default_str();
  app.add_option("--sa.chains", c.sa.chains)->capture_default_str();
  app.add_option("--sa.pool_size", c.sa.pool_size)->capture_default_str();
  app.add_option("--sa.top_k,--top-k", c.top_k)->capture_default_str();
  app.add_option("--eval.split", c.eval_split, "train, val or test")->capture_default_str();
  app.add_option("--eval.against", c.against, "mixed (stored negatives) or sns (fresh random)")
      ->capture_default_str();
  app.add_option("--export.split", c.export_split, "all, train, val or test")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig c;
  CLI::App app("chemhg: reaction hypergraph link prediction and screening");
  app.config_formatter(std::make_shared<FlatIni>());
  app.set_config("--config", "", "INI config file; flags override its values (default: none)");
  app.option_defaults()->always_capture_default();
  add_global_options(app, c);
  app.fallthrough();
  app.require_subcommand(1, 1);

  auto* synth = app.add_subcommand("synth", "Write the synthetic three-template corpus");
  synth->add_option("-o,--output", c.synth_out, "Output file (default: -, stdout)")
      ->capture_default_str();
  synth->add_flag("--small", c.small_corpus, "50-reaction corpus instead of 300 (default: off)");
  auto* ingest = app.add_subcommand("ingest", "Parse reactions and dump the hypergraph");
  ingest->add_flag("--strict", c.strict, "Fail on any unparseable line (default: off)");
  app.add_subcommand("negsample", "Generate negatives into <out_dir>/negatives.tsv");
  app.add_subcommand("train", "Train and write the best-validation checkpoint");
  app.add_subcommand("eval", "Score a split and print metrics");
  app.add_subcommand("screen", "Anneal over molecule embeddings and rank candidates");
  app.add_subcommand("export-embeddings", "Write per-edge embeddings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "synth") return cmd_synth(c);
    if (cmd == "ingest") return cmd_ingest(c);
    if (cmd == "negsample") return cmd_negsample(c);
    if (cmd == "train") return cmd_train(c);
    if (cmd == "eval") return cmd_eval(c);
    if (cmd == "screen") return cmd_screen(c);
    return cmd_export(c);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const train::DivergenceDetected& e) {
    std::fprintf(stderr, "diverged: %s\n", e.what());
    return kExitDivergence;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "diverged: %s\n", e.what());
    return kExitDivergence;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
}
