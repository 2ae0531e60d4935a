//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"

#include "chemhg/kernels.hpp"
#include "chemhg/model.hpp"
#include "chemhg/rng.hpp"
#include "chemhg/smiles.hpp"
#include "support/toy.hpp"

using namespace chemhg;
using namespace chemhg::model;
using chemhg::testing::toy_dims;
using chemhg::testing::toy_problem;

namespace {

Tensor dense(const Var& v) { return v.value(); }

void set_value(Model& m, const std::string& name, const Tensor& t) { m.param(name).value = t; }

}  // namespace

TEST_CASE("full model gradients match finite differences") {
  const auto t = toy_problem();
  const GraphInputs in = prepare_inputs(t.h);
  Model m(toy_dims(), {}, 3);
  const auto r = chemhg::testing::check_model_gradients(m, in, t);
  CHECK(r.checked > 500);
  CHECK(r.failures == 0);
  CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("attention block gradients on a random 4x4 input") {
  Rng rng(17);
  Model m(toy_dims(), {}, 4);
  Tensor xa(4, 5), xb(4, 5);
  for (double& v : xa.data()) v = rng.uniform(-1, 1);
  for (double& v : xb.data()) v = rng.uniform(-1, 1);
  Parameter px("x", xa), pg("g", xb);
  Tensor w(4, 1);
  for (double& v : w.data()) v = rng.uniform(-1, 1);
  auto run = [&](bool back) {
    Session s;
    bind(s, m);
    Var x = s.tape->param(px);
    Var g = s.tape->param(pg);
    Var out = num::sum_all(num::matmul(attention_fuse(s, x, g), s.tape->constant(w)));
    if (back) s.tape->backward(out);
    return out.value()[0];
  };
  px.zero_grad();
  pg.zero_grad();
  m.zero_grad();
  run(true);
  const double eps = 1e-5;
  for (Parameter* p : {&px, &pg, &m.param("attn.wq"), &m.param("attn.wk"), &m.param("attn.wv")}) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double keep = p->value[i];
      p->value[i] = keep + eps;
      const double up = run(false);
      p->value[i] = keep - eps;
      const double down = run(false);
      p->value[i] = keep;
      const double fd = (up - down) / (2 * eps);
      CAPTURE(p->name);
      CHECK(std::abs(fd - p->grad[i]) <= 1e-4 * std::max(std::abs(fd), 1e-4));
    }
  }
}

TEST_CASE("hgnn with identity weights is two propagation steps") {
  const auto t = toy_problem();
  const GraphInputs in = prepare_inputs(t.h);
  Dims d = toy_dims();
  d.hidden = d.emb = d.in_dim;
  Model m(d, {}, 1);
  set_value(m, "hgnn.theta0", Tensor::identity(64));
  set_value(m, "hgnn.theta1", Tensor::identity(64));
  Session s;
  bind(s, m);
  const Tensor x = dense(hgnn_forward(s, in));
  // Features and P are non-negative, so the ReLU is inactive.
  const Tensor want = num::kernels::spmm(in.propagation, num::kernels::spmm(in.propagation, in.features.to_dense()));
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("hgnn is permutation equivariant and isolated nodes stay zero") {
  const char* smiles[] = {"CC(=O)O", "OC", "CN", "C=O", "CCO"};
  const std::vector<std::vector<int>> edges{{0, 1}, {2, 3, 4}, {0, 2}};
  const std::vector<int> perm{3, 0, 4, 1, 2};  // new position of molecule i
  auto build = [&](bool permuted) {
    hg::Hypergraph h(mol::FingerprintParams{2, 64});
    std::vector<int> order(5);
    for (int i = 0; i < 5; ++i) order[permuted ? perm[i] : i] = i;
    for (int i : order) h.intern(mol::parse_smiles(smiles[i]));
    for (const auto& e : edges) {
      std::vector<hg::NodeId> nodes;
      for (int v : e) nodes.push_back(permuted ? perm[v] : v);
      h.add_edge(nodes, hg::EdgeLabel::kPositive);
    }
    h.add_node(mol::parse_smiles("CCCC"), true);
    return h;
  };
  const hg::Hypergraph a = build(false);
  const hg::Hypergraph b = build(true);
  Model m(toy_dims(), {}, 2);
  Session sa = forward(m, prepare_inputs(a));
  Session sb = forward(m, prepare_inputs(b));
  const Tensor xa = sa.nodes.x.value();
  const Tensor xb = sb.nodes.x.value();
  for (int i = 0; i < 5; ++i) {
    for (std::size_t c = 0; c < xa.cols(); ++c) CHECK(xa(i, c) == doctest::Approx(xb(perm[i], c)));
  }
  for (std::size_t c = 0; c < xa.cols(); ++c) CHECK(xa(5, c) == 0.0);
  // Edge scores do not depend on node numbering either.
  EdgeGroups ea{{0, 1}, {2, 3, 4}};
  EdgeGroups eb{{std::size_t(perm[0]), std::size_t(perm[1])},
                {std::size_t(perm[2]), std::size_t(perm[3]), std::size_t(perm[4])}};
  const Tensor ya = score_edges(sa, m, ea).score.value();
  const Tensor yb = score_edges(sb, m, eb).score.value();
  CHECK(ya[0] == doctest::Approx(yb[0]).epsilon(1e-12));
  CHECK(ya[1] == doctest::Approx(yb[1]).epsilon(1e-12));
}

TEST_CASE("wln on a single atom sees no messages") {
  hg::Hypergraph h(mol::FingerprintParams{2, 64});
  h.intern(mol::parse_smiles("C"));
  h.add_edge({0}, hg::EdgeLabel::kPositive);
  const GraphInputs in = prepare_inputs(h);
  Model m(toy_dims(), {}, 5);
  Session s;
  bind(s, m);
  const WlnOutput w = wln_forward(s, in, m);
  // Oracle: h <- psi(h, 0) three times.
  Tensor hv = in.atom_features;
  for (int l = 0; l < 3; ++l) {
    const std::string p = "wln.l" + std::to_string(l) + ".";
    Tensor pre = num::kernels::matmul(hv, m.param(p + "psi_self").value);
    for (std::size_t c = 0; c < pre.cols(); ++c) {
      pre[c] = std::max(0.0, pre[c] + m.param(p + "psi_b1").value[c]);
    }
    hv = num::kernels::matmul(pre, m.param(p + "psi_w2").value);
    for (std::size_t c = 0; c < hv.cols(); ++c) hv[c] += m.param(p + "psi_b2").value[c];
  }
  for (std::size_t c = 0; c < hv.cols(); ++c) CHECK(w.atom_h.value()[c] == doctest::Approx(hv[c]));
  // Mean of one row is that row.
  const Tensor emb = molecule_embeddings(s, in, w.atom_h).value();
  const Tensor want = num::kernels::matmul(hv, m.param("wln.proj").value);
  for (std::size_t c = 0; c < emb.cols(); ++c) CHECK(emb[c] == doctest::Approx(want[c]));
}

TEST_CASE("wln treats equivalent atoms alike and scores lie in (0,1)") {
  hg::Hypergraph h(mol::FingerprintParams{2, 64});
  h.intern(mol::parse_smiles("CC"));
  h.intern(mol::parse_smiles("OC(=O)CC(=O)O"));
  h.add_edge({0, 1}, hg::EdgeLabel::kPositive);
  const GraphInputs in = prepare_inputs(h);
  Model m(toy_dims(), {}, 6);
  Session s = forward(m, in);
  const Tensor ah = s.nodes.atom_h.value();
  for (std::size_t c = 0; c < ah.cols(); ++c) CHECK(ah(0, c) == ah(1, c));
  for (double y : s.nodes.atom_scores.value().data()) {
    CHECK(y > 0.0);
    CHECK(y < 1.0);
  }
  // Mean pool matches an independent reduction.
  const Tensor xg = s.nodes.x_gnn.value();
  const Tensor proj = m.param("wln.proj").value;
  const auto& atoms = in.atoms_of_node[1];
  for (std::size_t c = 0; c < xg.cols(); ++c) {
    double want = 0;
    for (std::size_t k = 0; k < proj.rows(); ++k) {
      double mean = 0;
      for (std::size_t a : atoms) mean += ah(a, k);
      want += mean / atoms.size() * proj(k, c);
    }
    CHECK(xg(1, c) == doctest::Approx(want));
  }
}

TEST_CASE("attention corner cases") {
  const auto t = toy_problem();
  const GraphInputs in = prepare_inputs(t.h);
  Model m(toy_dims(), {}, 8);
  SUBCASE("zero key and value weights give zero output") {
    set_value(m, "attn.wk", Tensor(5, 4));
    set_value(m, "attn.wv", Tensor(5, 4));
    Session s = forward(m, in);
    for (double v : s.nodes.x_attn.value().data()) CHECK(v == 0.0);
  }
  SUBCASE("outputs are convex combinations of value rows") {
    Session s = forward(m, in);
    const Tensor q = num::kernels::matmul(s.nodes.x.value(), m.param("attn.wq").value);
    const Tensor k = num::kernels::matmul(s.nodes.x_gnn.value(), m.param("attn.wk").value);
    const Tensor v = num::kernels::matmul(s.nodes.x_gnn.value(), m.param("attn.wv").value);
    const Tensor out = s.nodes.x_attn.value();
    for (std::size_t i = 0; i < q.rows(); ++i) {
      std::vector<double> w(k.rows());
      double mx = -1e300;
      for (std::size_t j = 0; j < k.rows(); ++j) {
        double d = 0;
        for (std::size_t c = 0; c < q.cols(); ++c) d += q(i, c) * k(j, c);
        w[j] = d / 2.0;  // sqrt(dk = 4)
        mx = std::max(mx, w[j]);
      }
      double z = 0;
      for (double& x : w) z += (x = std::exp(x - mx));
      for (double& x : w) {
        x /= z;
        CHECK(x >= 0.0);
      }
      for (std::size_t c = 0; c < v.cols(); ++c) {
        double want = 0;
        for (std::size_t j = 0; j < v.rows(); ++j) want += w[j] * v(j, c);
        CHECK(out(i, c) == doctest::Approx(want).epsilon(1e-10));
      }
    }
  }
  SUBCASE("one node attends to itself") {
    hg::Hypergraph h(mol::FingerprintParams{2, 64});
    h.intern(mol::parse_smiles("CCO"));
    h.add_edge({0}, hg::EdgeLabel::kPositive);
    Session s = forward(m, prepare_inputs(h));
    const Tensor v = num::kernels::matmul(s.nodes.x_gnn.value(), m.param("attn.wv").value);
    for (std::size_t c = 0; c < v.cols(); ++c) CHECK(s.nodes.x_attn.value()[c] == doctest::Approx(v[c]));
    // A single-node edge aggregates to its own z row.
    const Tensor r = aggregate(s, m, {{0}}).value();
    CHECK(r == s.nodes.z.value());
  }
}

TEST_CASE("sum and mean aggregation differ by the edge size") {
  const auto t = toy_problem();
  const GraphInputs in = prepare_inputs(t.h);
  Model m(toy_dims(), {}, 9);
  Session s = forward(m, in);
  const Tensor sum = aggregate(s, m, t.edges).value();
  m.ablation().use_sum_aggregator = false;
  const Tensor mean = aggregate(s, m, t.edges).value();
  for (std::size_t e = 0; e < t.edges.size(); ++e) {
    for (std::size_t c = 0; c < sum.cols(); ++c) {
      CHECK(sum(e, c) == doctest::Approx(mean(e, c) * t.edges[e].size()));
    }
  }
  const Tensor y = score_edges(s, m, t.edges).score.value();
  for (double v : y.data()) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  CHECK_THROWS_AS(aggregate(s, m, {{}}), EmptyEdge);
  CHECK_THROWS_AS(aggregate(s, m, {{0, 99}}), DataError);
}

TEST_CASE("loss arithmetic") {
  Model m(toy_dims(), {}, 1);
  Session s;
  bind(s, m);
  ScoreBatch b;
  b.score = s.tape->constant(Tensor(2, 1, std::vector<double>{0.5, 0.5}));
  const std::vector<double> labels{1.0, 0.0};
  // x_gnn rows sum to (3, 4) over the positive edge.
  Tensor xg(3, 2, std::vector<double>{1, 1, 2, 3, 100, 100});
  s.nodes.x_gnn = s.tape->constant(xg);
  const EdgeGroups edges{{0, 1}, {2}};
  const double bce_only = reaction_loss(s, m, b, labels, edges, 0.0).value()[0];
  CHECK(bce_only == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  const double with_mse = reaction_loss(s, m, b, labels, edges, 0.1).value()[0];
  CHECK(with_mse == doctest::Approx(std::log(2.0) + 0.1 * 25.0).epsilon(1e-12));
  m.ablation().use_mse_loss = false;
  CHECK(reaction_loss(s, m, b, labels, edges, 0.1).value()[0] == bce_only);
  Var exact = s.tape->constant(Tensor(2, 1, std::vector<double>{1.0, 0.0}));
  CHECK(num::binary_cross_entropy(exact, labels).value()[0] < 1e-11);
}

TEST_CASE("without wln the scores ignore wln weights") {
  const auto t = toy_problem();
  const GraphInputs in = prepare_inputs(t.h);
  Ablation off;
  off.use_wln = false;
  Model a(toy_dims(), off, 1);
  Model b = a;
  for (auto& p : b.parameters()) {
    if (p.name.rfind("wln.", 0) == 0) {
      for (double& v : p.value.data()) v += 0.37;
    }
  }
  Session sa = forward(a, in);
  Session sb = forward(b, in);
  for (double v : sa.nodes.x_attn.value().data()) CHECK(v == 0.0);
  CHECK(score_edges(sa, a, t.edges).score.value() == score_edges(sb, b, t.edges).score.value());
}

TEST_CASE("a small gradient step never increases the toy loss") {
  const auto t = toy_problem();
  const GraphInputs in = prepare_inputs(t.h);
  int failures = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Model m(toy_dims(), {}, seed);
    m.zero_grad();
    const double before = chemhg::testing::toy_loss(m, in, t, true);
    m.step(1e-3);
    const double after = chemhg::testing::toy_loss(m, in, t, false);
    failures += after > before;
  }
  CHECK(failures == 0);
}

TEST_CASE("forward passes are deterministic") {
  const auto t = toy_problem();
  const GraphInputs in = prepare_inputs(t.h);
  Model a(toy_dims(), {}, 42);
  Model b(toy_dims(), {}, 42);
  CHECK(chemhg::testing::toy_loss(a, in, t, false) == chemhg::testing::toy_loss(b, in, t, false));
  Model c(toy_dims(), {}, 43);
  CHECK(chemhg::testing::toy_loss(a, in, t, false) != chemhg::testing::toy_loss(c, in, t, false));
}

TEST_CASE("checkpoint round trip and validation") {
  Ablation ab;
  ab.use_mse_loss = false;
  const Model m(toy_dims(), ab, 77);
  std::stringstream buf;
  write_checkpoint(m, buf);
  const std::string bytes = buf.str();
  std::istringstream in(bytes);
  const Model back = read_checkpoint(in);
  CHECK(back.dims() == m.dims());
  CHECK(back.ablation() == m.ablation());
  CHECK(back.seed() == 77);
  REQUIRE(back.parameters().size() == m.parameters().size());
  for (std::size_t i = 0; i < m.parameters().size(); ++i) {
    CHECK(back.parameters()[i].name == m.parameters()[i].name);
    CHECK(back.parameters()[i].value == m.parameters()[i].value);
  }
  std::stringstream again;
  write_checkpoint(back, again);
  CHECK(again.str() == bytes);

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::istringstream in1(bad_magic);
  CHECK_THROWS_AS(read_checkpoint(in1), CheckpointError);

  // Changing the declared hidden width breaks the dimension chain.
  std::string bad_dims = bytes;
  const std::size_t hidden_at = 8 + 4 + 8 + 3 + 4 + 4;
  bad_dims[hidden_at] = 7;
  std::istringstream in2(bad_dims);
  CHECK_THROWS_AS(read_checkpoint(in2), CheckpointError);

  std::istringstream in3(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(read_checkpoint(in3), CheckpointError);
}
