//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "chemhg/screen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "chemhg/rng.hpp"
#include "chemhg/train_eval.hpp"

namespace chemhg::screen {

double objective(std::span<const std::size_t> selection, const Tensor& emb) {
  if (selection.empty()) throw EmptySelection("objective of an empty selection");
  double sq = 0.0;
  for (std::size_t j = 0; j < emb.cols(); ++j) {
    double s = 0.0;
    for (std::size_t r : selection) s += emb(r, j);
    sq += s * s;
  }
  return std::sqrt(sq);
}

double acceptance_probability(double delta, double temperature) {
  if (delta <= 0.0) return 1.0;
  return std::exp(-delta / temperature);
}

namespace {

void check_config(const Tensor& emb, const SAConfig& c) {
  if (emb.rows() < 2) throw std::invalid_argument("annealing needs at least two molecules");
  if (!(c.t0 > 0)) throw std::invalid_argument("t0 must be > 0");
  if (!(c.alpha > 0 && c.alpha < 1)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (c.iters_per_temp < 1) throw std::invalid_argument("iters_per_temp must be >= 1");
  if (c.max_edge_size < 2) throw std::invalid_argument("max_edge_size must be >= 2");
  if (c.chains < 1) throw std::invalid_argument("chains must be >= 1");
}

void remember(std::vector<std::pair<double, Selection>>& pool, std::size_t cap, double obj,
              const Selection& s) {
  if (cap == 0) return;
  for (const auto& item : pool) {
    if (item.second == s) return;
  }
  std::pair<double, Selection> item{obj, s};
  auto pos = std::lower_bound(pool.begin(), pool.end(), item);
  if (pool.size() == cap && pos == pool.end()) return;
  pool.insert(pos, std::move(item));
  if (pool.size() > cap) pool.pop_back();
}

SAState run_chain(const Tensor& emb, const SAConfig& c, std::uint64_t seed,
                  std::vector<TraceStep>* trace) {
  Rng rng(seed);
  const std::size_t n = emb.rows();
  const std::size_t max_size = std::min<std::size_t>(static_cast<std::size_t>(c.max_edge_size), n);
  SAState st;
  st.current = {rng.index(n)};
  st.current_obj = objective(st.current, emb);
  st.best = st.current;
  st.best_obj = st.current_obj;
  st.temperature = c.t0;
  const auto cap = static_cast<std::size_t>(std::max(c.pool_size, 0));
  remember(st.pool, cap, st.current_obj, st.current);

  std::vector<char> inside(n, 0);
  inside[st.current[0]] = 1;
  int in_level = 0;
  while (st.iterations < c.max_total_iters && st.temperature >= 1e-9) {
    const std::size_t size = st.current.size();
    const bool can_add = size < max_size;
    const bool can_remove = size > 1;
    const bool can_swap = size < n;
    int moves[3];
    int legal = 0;
    if (can_add) moves[legal++] = 0;
    if (can_remove) moves[legal++] = 1;
    if (can_swap) moves[legal++] = 2;
    const int move = moves[rng.index(static_cast<std::size_t>(legal))];

    auto pick_outsider = [&]() {
      std::size_t k = rng.index(n - size);
      for (std::size_t v = 0; v < n; ++v) {
        if (inside[v]) continue;
        if (k-- == 0) return v;
      }
      return n;  // unreachable
    };
    Selection next = st.current;
    if (move == 0) {
      next.push_back(pick_outsider());
    } else if (move == 1) {
      next.erase(next.begin() + static_cast<std::ptrdiff_t>(rng.index(size)));
    } else {
      const std::size_t out = rng.index(size);
      next[out] = pick_outsider();
    }
    std::sort(next.begin(), next.end());
    const double obj = objective(next, emb);
    const double delta = obj - st.current_obj;
    bool accept = delta <= 0.0;
    if (!accept) accept = rng.uniform() < acceptance_probability(delta, st.temperature);
    if (accept) {
      for (std::size_t v : st.current) inside[v] = 0;
      for (std::size_t v : next) inside[v] = 1;
      st.current = std::move(next);
      st.current_obj = obj;
      if (obj < st.best_obj) {
        st.best_obj = obj;
        st.best = st.current;
      }
      remember(st.pool, cap, obj, st.current);
    }
    ++st.iterations;
    if (trace) {
      trace->push_back({st.iterations, st.temperature, delta, accept, st.current_obj, st.best_obj});
    }
    if (++in_level == c.iters_per_temp) {
      in_level = 0;
      ++st.levels;
      st.temperature = c.t0 * std::pow(c.alpha, st.levels);
    }
  }
  return st;
}

}  // namespace

SAState anneal(const Tensor& emb, const SAConfig& config, std::vector<TraceStep>* trace) {
  check_config(emb, config);
  return run_chain(emb, config, derive_seed(config.seed, "sa", 0), trace);
}

SAState anneal_chains(const Tensor& emb, const SAConfig& config) {
  check_config(emb, config);
  std::vector<SAState> states(static_cast<std::size_t>(config.chains));
#pragma omp parallel for schedule(dynamic)
  for (int c = 0; c < config.chains; ++c) {
    states[static_cast<std::size_t>(c)] =
        run_chain(emb, config, derive_seed(config.seed, "sa", static_cast<std::uint64_t>(c)),
                  nullptr);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < states.size(); ++c) {
    if (states[c].best_obj < states[best].best_obj) best = c;
  }
  SAState out = states[best];
  const auto cap = static_cast<std::size_t>(std::max(config.pool_size, 0));
  for (std::size_t c = 0; c < states.size(); ++c) {
    if (c == best) continue;
    for (const auto& [obj, sel] : states[c].pool) remember(out.pool, cap, obj, sel);
  }
  return out;
}

RandomResult random_select(const Tensor& emb, long iters, int max_edge_size, std::uint64_t seed) {
  if (emb.rows() < 2) throw std::invalid_argument("random selection needs at least two molecules");
  if (iters < 1) throw std::invalid_argument("random selection needs iters >= 1");
  if (max_edge_size < 2) throw std::invalid_argument("max_edge_size must be >= 2");
  Rng rng(derive_seed(seed, "random"));
  const std::size_t n = emb.rows();
  const std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(max_edge_size), n);
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  RandomResult out;
  for (long it = 0; it < iters; ++it) {
    const std::size_t k = 2 + rng.index(hi - 1);
    for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + rng.index(n - i)]);
    Selection s(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(s.begin(), s.end());
    const double obj = objective(s, emb);
    if (it == 0 || obj < out.best_obj) {
      out.best_obj = obj;
      out.best = std::move(s);
    }
  }
  return out;
}

std::vector<Candidate> score_candidates(model::Model& m, const model::GraphInputs& in,
                                        const std::vector<std::vector<hg::NodeId>>& sets,
                                        const Tensor& node_emb) {
  model::EdgeGroups groups;
  for (const auto& s : sets) {
    if (s.empty()) throw EmptySelection("cannot score an empty selection");
    groups.emplace_back(s.begin(), s.end());
  }
  const std::vector<double> scores = train::predict(m, in, groups);
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    out.push_back({sets[i], scores[i], objective(groups[i], node_emb)});
  }
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.mlp_score != b.mlp_score) return a.mlp_score > b.mlp_score;
    return a.nodes < b.nodes;
  });
  return out;
}

void write_report(const std::vector<Candidate>& cands, const hg::Hypergraph& h,
                  std::size_t top_k, std::ostream& out) {
  char buf[64];
  for (std::size_t i = 0; i < cands.size() && i < top_k; ++i) {
    std::snprintf(buf, sizeof buf, "%zu\t%.6f\t%.6f\t", i + 1, cands[i].mlp_score,
                  cands[i].objective);
    out << buf;
    for (std::size_t k = 0; k < cands[i].nodes.size(); ++k) {
      out << (k ? "." : "") << h.node(cands[i].nodes[k]).key;
    }
    out << '\n';
  }
}

}  // namespace chemhg::screen
