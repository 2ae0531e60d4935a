//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"

#include "chemhg/screen.hpp"
#include "chemhg/smiles.hpp"
#include "support/planted.hpp"

using namespace chemhg;
using screen::SAConfig;
using screen::Tensor;

TEST_CASE("objective is the norm of the summed rows") {
  const Tensor emb(3, 2, {3.0, 0.0, 0.0, 4.0, -3.0, 0.0});
  CHECK(screen::objective(std::vector<std::size_t>{0, 1}, emb) == doctest::Approx(5.0));
  CHECK(screen::objective(std::vector<std::size_t>{0, 2}, emb) == 0.0);
  CHECK(screen::objective(std::vector<std::size_t>{1}, emb) == doctest::Approx(4.0));
  CHECK_THROWS_AS(screen::objective(std::vector<std::size_t>{}, emb), screen::EmptySelection);
}

TEST_CASE("acceptance probability") {
  CHECK(screen::acceptance_probability(0.0, 0.7) == 1.0);
  CHECK(screen::acceptance_probability(-1.0, 0.7) == 1.0);
  CHECK(screen::acceptance_probability(0.3 * std::log(2.0), 0.3) == doctest::Approx(0.5));
  CHECK(screen::acceptance_probability(1.0, 1e-15) == 0.0);
}

TEST_CASE("annealing trace invariants") {
  const Tensor emb = testing::planted_instance(3);
  SAConfig cfg;
  cfg.seed = 12;
  cfg.max_total_iters = 5000;
  cfg.iters_per_temp = 50;
  cfg.alpha = 0.9;
  std::vector<screen::TraceStep> trace;
  const screen::SAState st = screen::anneal(emb, cfg, &trace);
  REQUIRE(trace.size() == 5000);
  CHECK(st.iterations == 5000);
  CHECK(st.levels == 100);
  CHECK(std::abs(st.temperature - cfg.t0 * std::pow(cfg.alpha, 100)) < 1e-12);
  double best = trace[0].best_obj;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& t = trace[i];
    // Best never worsens; improving moves are always taken.
    CHECK(t.best_obj <= best);
    best = t.best_obj;
    if (t.delta <= 0) CHECK(t.accepted);
    CHECK(t.best_obj <= t.current_obj);
    const long level = (t.iteration - 1) / cfg.iters_per_temp;
    CHECK(std::abs(t.temperature - cfg.t0 * std::pow(cfg.alpha, static_cast<double>(level))) < 1e-12);
  }
  CHECK(st.best_obj == doctest::Approx(screen::objective(st.best, emb)));
  CHECK(st.best.size() <= static_cast<std::size_t>(cfg.max_edge_size));
  // Pool is sorted and holds the best selection first.
  REQUIRE_FALSE(st.pool.empty());
  CHECK(st.pool.front().second == st.best);
  for (std::size_t i = 1; i < st.pool.size(); ++i) CHECK(st.pool[i - 1].first <= st.pool[i].first);
}

TEST_CASE("worsening moves get rarer as the temperature falls") {
  const Tensor emb = testing::planted_instance(5);
  SAConfig cfg;
  cfg.seed = 3;
  cfg.t0 = 2.0;
  cfg.alpha = 0.985;
  cfg.iters_per_temp = 100;
  cfg.max_total_iters = 20000;
  std::vector<screen::TraceStep> trace;
  screen::anneal(emb, cfg, &trace);
  auto rate = [&](std::size_t lo, std::size_t hi) {
    double tried = 0, taken = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      if (trace[i].delta <= 0) continue;
      ++tried;
      taken += trace[i].accepted;
    }
    return tried > 0 ? taken / tried : 0.0;
  };
  const double early = rate(0, 2000);
  const double middle = rate(9000, 11000);
  const double late = rate(18000, 20000);
  CHECK(early > middle);
  CHECK(middle > late);
}

TEST_CASE("near-zero temperature is greedy descent") {
  const Tensor emb = testing::planted_instance(7);
  SAConfig cfg;
  cfg.t0 = 1e-15;
  cfg.alpha = 0.999999;
  cfg.max_total_iters = 3000;
  // Below the 1e-9 floor the chain would stop at once; keep it running.
  std::vector<screen::TraceStep> trace;
  const screen::SAState st = screen::anneal(emb, cfg, &trace);
  CHECK(st.iterations == 0);
  cfg.t0 = 2e-9;
  cfg.alpha = 0.9999999;
  screen::anneal(emb, cfg, &trace);
  REQUIRE(trace.size() == 3000);
  for (const auto& t : trace) {
    if (t.delta > 1e-6) CHECK_FALSE(t.accepted);
  }
}

TEST_CASE("annealing stops once the temperature floor is reached") {
  const Tensor emb = testing::planted_instance(1);
  SAConfig cfg;
  cfg.t0 = 1.0;
  cfg.alpha = 0.5;
  cfg.iters_per_temp = 10;
  cfg.max_total_iters = 1000000;
  const screen::SAState st = screen::anneal(emb, cfg);
  // 0.5^30 < 1e-9 <= 0.5^29.
  CHECK(st.levels == 30);
  CHECK(st.iterations == 300);
}

TEST_CASE("annealing is seeded") {
  const Tensor emb = testing::planted_instance(2);
  SAConfig cfg;
  cfg.seed = 99;
  const auto a = screen::anneal(emb, cfg);
  const auto b = screen::anneal(emb, cfg);
  CHECK(a.best == b.best);
  CHECK(a.current == b.current);
  CHECK(a.pool == b.pool);
}

TEST_CASE("planted triple is found") {
  const Tensor emb = testing::planted_instance(4);
  const auto oracle = testing::brute_force_min(emb, 3);
  CHECK(oracle.first < 1e-12);
  SAConfig cfg;
  cfg.seed = 5;
  const auto st = screen::anneal(emb, cfg);
  CHECK(st.best_obj == doctest::Approx(oracle.first).epsilon(1e-9));
  CHECK(st.best == oracle.second);
}

TEST_CASE("multi-chain annealing picks the best chain") {
  const Tensor emb = testing::planted_instance(8);
  SAConfig cfg;
  cfg.seed = 21;
  cfg.chains = 4;
  cfg.max_total_iters = 200;
  const auto all = screen::anneal_chains(emb, cfg);
  const auto again = screen::anneal_chains(emb, cfg);
  CHECK(all.best == again.best);
  CHECK(all.pool == again.pool);
  SAConfig one = cfg;
  one.chains = 1;
  CHECK(all.best_obj <= screen::anneal_chains(emb, one).best_obj);
  // Chain 0 of the multi-chain run is the single-chain run.
  CHECK(screen::anneal_chains(emb, one).best == screen::anneal(emb, one).best);
}

TEST_CASE("random selection") {
  const Tensor emb = testing::planted_instance(6);
  const auto one = screen::random_select(emb, 1, 5, 10);
  CHECK(one.best.size() >= 2);
  CHECK(one.best.size() <= 5);
  CHECK(one.best_obj == doctest::Approx(screen::objective(one.best, emb)));
  double prev = one.best_obj;
  for (long iters : {2L, 5L, 20L, 100L, 1000L}) {
    const auto r = screen::random_select(emb, iters, 5, 10);
    CHECK(r.best_obj <= prev);
    prev = r.best_obj;
  }
}

TEST_CASE("score_candidates ranks by score") {
  hg::Hypergraph h(mol::FingerprintParams{2, 64});
  for (const char* s : {"CC(=O)O", "OC", "CN", "C=O"}) h.intern(mol::parse_smiles(s));
  h.add_edge({0, 1}, hg::EdgeLabel::kPositive);
  h.add_edge({2, 3}, hg::EdgeLabel::kPositive);
  model::Dims d;
  d.in_dim = 64;
  d.hidden = d.emb = d.dk = d.wln_hidden = d.mlp_hidden = 8;
  d.wln_layers = 2;
  model::Model m(d, {}, 3);
  const model::GraphInputs in = model::prepare_inputs(h);
  const model::Session s = model::forward(m, in);
  const std::vector<std::vector<hg::NodeId>> sets{{0, 1}, {1, 2, 3}, {0, 3}};
  const auto c = screen::score_candidates(m, in, sets, s.nodes.x_gnn.value());
  REQUIRE(c.size() == 3);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(c[i].mlp_score > 0.0);
    CHECK(c[i].mlp_score < 1.0);
    if (i) CHECK(c[i - 1].mlp_score >= c[i].mlp_score);
  }
  // Existing edge {0,1} scores as in a regular batch.
  model::Session s2 = model::forward(m, in);
  const auto batch = model::score_edges(s2, m, {{0, 1}});
  for (const auto& x : c) {
    if (x.nodes == std::vector<hg::NodeId>{0, 1}) CHECK(x.mlp_score == batch.score.value()[0]);
  }
  CHECK_THROWS_AS(screen::score_candidates(m, in, {{}}, s.nodes.x_gnn.value()),
                  screen::EmptySelection);
  std::ostringstream out;
  screen::write_report(c, h, 2, out);
  const std::string rep = out.str();
  CHECK(std::count(rep.begin(), rep.end(), '\n') == 2);
  CHECK(rep.rfind("1\t", 0) == 0);
}
