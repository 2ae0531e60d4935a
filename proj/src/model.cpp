//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "chemhg/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "chemhg/rng.hpp"
#include "chemhg/valence.hpp"

namespace chemhg::model {

namespace {

struct ParamSpec {
  std::string name;
  std::size_t rows;
  std::size_t cols;
  std::size_t fan_in;  // 0 marks a bias (zero init)
};

std::vector<ParamSpec> specs(const Dims& d) {
  const auto wh = static_cast<std::size_t>(d.wln_hidden);
  std::vector<ParamSpec> out{
      {"hgnn.theta0", std::size_t(d.in_dim), std::size_t(d.hidden), std::size_t(d.in_dim)},
      {"hgnn.theta1", std::size_t(d.hidden), std::size_t(d.emb), std::size_t(d.hidden)},
  };
  for (int l = 0; l < d.wln_layers; ++l) {
    const std::size_t in = l == 0 ? atom_feature_dim() : wh;
    const std::string p = "wln.l" + std::to_string(l) + ".";
    const std::size_t phi_fan = 2 * in + kBondFeatureDim;
    out.push_back({p + "phi_self", in, wh, phi_fan});
    out.push_back({p + "phi_nbr", in, wh, phi_fan});
    out.push_back({p + "phi_bond", kBondFeatureDim, wh, phi_fan});
    out.push_back({p + "phi_b1", 1, wh, 0});
    out.push_back({p + "phi_w2", wh, wh, wh});
    out.push_back({p + "phi_b2", 1, wh, 0});
    out.push_back({p + "psi_self", in, wh, in + wh});
    out.push_back({p + "psi_msg", wh, wh, in + wh});
    out.push_back({p + "psi_b1", 1, wh, 0});
    out.push_back({p + "psi_w2", wh, wh, wh});
    out.push_back({p + "psi_b2", 1, wh, 0});
  }
  const auto emb = static_cast<std::size_t>(d.emb);
  const auto dk = static_cast<std::size_t>(d.dk);
  const auto mh = static_cast<std::size_t>(d.mlp_hidden);
  out.push_back({"wln.out_w", wh, 1, wh});
  out.push_back({"wln.out_b", 1, 1, 0});
  out.push_back({"wln.proj", wh, emb, wh});
  out.push_back({"attn.wq", emb, dk, emb});
  out.push_back({"attn.wk", emb, dk, emb});
  out.push_back({"attn.wv", emb, dk, emb});
  out.push_back({"mlp.w1", emb + dk, mh, emb + dk});
  out.push_back({"mlp.b1", 1, mh, 0});
  out.push_back({"mlp.w2", mh, 1, mh});
  out.push_back({"mlp.b2", 1, 1, 0});
  return out;
}

void check_dims(const Dims& d) {
  if (d.in_dim <= 0 || d.hidden <= 0 || d.emb <= 0 || d.dk <= 0 || d.wln_hidden <= 0 ||
      d.wln_layers < 1 || d.mlp_hidden <= 0) {
    throw std::invalid_argument("model dims must be positive and wln_layers >= 1");
  }
}

}  // namespace

int atom_feature_dim() { return static_cast<int>(mol::elements().size()) + 4; }

Model::Model(const Dims& dims, const Ablation& ablation, std::uint64_t seed)
    : dims_(dims), ablation_(ablation), seed_(seed) {
  check_dims(dims);
  Rng rng(derive_seed(seed, "init"));
  for (const ParamSpec& s : specs(dims)) {
    Tensor t(s.rows, s.cols);
    if (s.fan_in > 0) {
      const double a = std::sqrt(6.0 / static_cast<double>(s.fan_in + s.cols));
      for (double& x : t.data()) x = rng.uniform(-a, a);
    }
    index_[s.name] = params_.size();
    params_.emplace_back(s.name, std::move(t));
  }
}

std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> Model::layout(
    const Dims& dims) {
  check_dims(dims);
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> out;
  for (const ParamSpec& s : specs(dims)) out.push_back({s.name, {s.rows, s.cols}});
  return out;
}

Parameter& Model::param(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named " + name);
  return params_[it->second];
}

const Parameter& Model::param(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named " + name);
  return params_[it->second];
}

void Model::zero_grad() {
  for (Parameter& p : params_) p.zero_grad();
}

void Model::step(double learning_rate) {
  for (Parameter& p : params_) {
    auto v = p.value.data();
    auto g = p.grad.data();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= learning_rate * g[i];
  }
}

// ---- inputs ----------------------------------------------------------------

Tensor atom_features(const mol::MolGraph& m) {
  const int ne = static_cast<int>(mol::elements().size());
  Tensor t(m.atoms.size(), atom_feature_dim());
  const mol::Adjacency adj = mol::adjacency(m);
  const std::vector<int> hs = mol::total_hydrogens(m);
  for (int i = 0; i < m.num_atoms(); ++i) {
    const mol::Atom& a = m.atoms[i];
    t(i, a.element) = 1.0;
    t(i, ne) = a.charge;
    t(i, ne + 1) = a.aromatic ? 1.0 : 0.0;
    t(i, ne + 2) = static_cast<double>(adj[i].size());
    t(i, ne + 3) = hs[i];
  }
  return t;
}

GraphInputs prepare_inputs(const hg::Hypergraph& h, std::span<const bool> edge_mask) {
  GraphInputs in;
  in.num_nodes = h.num_nodes();
  const int bits = h.fingerprint_params().bits;
  std::vector<CsrMatrix::Triplet> fp;
  for (hg::NodeId v = 0; v < h.num_nodes(); ++v) {
    for (int b : h.node(v).fp.on_bits()) fp.push_back({v, static_cast<std::size_t>(b), 1.0});
  }
  in.features = CsrMatrix::from_triplets(h.num_nodes(), bits, std::move(fp));
  in.propagation = hg::propagation_operator(h, edge_mask);

  std::size_t total = 0;
  std::size_t directed = 0;
  for (const hg::HyperNode& n : h.nodes()) {
    total += n.mol.atoms.size();
    directed += 2 * n.mol.bonds.size();
  }
  in.atom_features = Tensor(total, atom_feature_dim());
  in.msg_bond_features = Tensor(directed, kBondFeatureDim);
  in.incoming.assign(total, {});
  std::size_t base = 0;
  for (const hg::HyperNode& n : h.nodes()) {
    in.atom_offset.push_back(base);
    std::vector<std::size_t> atoms;
    const Tensor f = atom_features(n.mol);
    for (std::size_t i = 0; i < n.mol.atoms.size(); ++i) {
      atoms.push_back(base + i);
      std::copy(f.row(i).begin(), f.row(i).end(), in.atom_features.row(base + i).begin());
    }
    for (const mol::Bond& b : n.mol.bonds) {
      for (int dir = 0; dir < 2; ++dir) {
        const std::size_t src = base + (dir ? b.b : b.a);
        const std::size_t dst = base + (dir ? b.a : b.b);
        const std::size_t k = in.msg_src.size();
        in.msg_src.push_back(src);
        in.msg_dst.push_back(dst);
        in.msg_bond_features(k, static_cast<int>(b.order)) = 1.0;
        in.incoming[dst].push_back(k);
      }
    }
    in.atoms_of_node.push_back(std::move(atoms));
    base += n.mol.atoms.size();
  }
  return in;
}

// ---- forward ---------------------------------------------------------------

namespace {

Var get(const Session& s, const std::string& name) {
  auto it = s.vars.find(name);
  if (it == s.vars.end()) throw std::logic_error("parameter not bound: " + name);
  return it->second;
}

// relu(a Wa + b Wb [+ c Wc] + b1) W2 + b2 over already-projected terms.
Var perceptron(const Session& s, const std::string& p, Var pre) {
  Var hidden = num::relu(num::add_bias(pre, get(s, p + "_b1")));
  return num::add_bias(num::matmul(hidden, get(s, p + "_w2")), get(s, p + "_b2"));
}

}  // namespace

void bind(Session& s, Model& m) {
  for (Parameter& p : m.parameters()) s.vars[p.name] = s.tape->param(p);
}

Var hgnn_forward(Session& s, const GraphInputs& in) {
  Var first = num::spmm(in.features, get(s, "hgnn.theta0"));
  Var h1 = num::relu(num::spmm(in.propagation, first));
  return num::spmm(in.propagation, num::matmul(h1, get(s, "hgnn.theta1")));
}

WlnOutput wln_forward(Session& s, const GraphInputs& in, const Model& m) {
  Tape& tape = *s.tape;
  Var h = tape.constant(in.atom_features);
  Var bonds = tape.constant(in.msg_bond_features);
  for (int l = 0; l < m.dims().wln_layers; ++l) {
    const std::string p = "wln.l" + std::to_string(l) + ".";
    Var self = num::matmul(h, get(s, p + "phi_self"));
    Var nbr = num::matmul(h, get(s, p + "phi_nbr"));
    Var pre = num::add(num::add(num::gather_rows(self, in.msg_dst), num::gather_rows(nbr, in.msg_src)),
                       num::matmul(bonds, get(s, p + "phi_bond")));
    Var msg = num::segment_sum(perceptron(s, p + "phi", pre), in.incoming);
    Var upd = num::add(num::matmul(h, get(s, p + "psi_self")), num::matmul(msg, get(s, p + "psi_msg")));
    h = perceptron(s, p + "psi", upd);
  }
  Var scores = num::sigmoid(num::add_bias(num::matmul(h, get(s, "wln.out_w")), get(s, "wln.out_b")));
  return {h, scores};
}

Var molecule_embeddings(Session& s, const GraphInputs& in, Var atom_h) {
  return num::matmul(num::segment_mean(atom_h, in.atoms_of_node), get(s, "wln.proj"));
}

Var attention_fuse(Session& s, Var x, Var x_gnn) {
  Var q = num::matmul(x, get(s, "attn.wq"));
  Var k = num::matmul(x_gnn, get(s, "attn.wk"));
  Var v = num::matmul(x_gnn, get(s, "attn.wv"));
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  Var weights = num::softmax_rows(num::scale(num::matmul(q, num::transpose(k)), scale));
  return num::matmul(weights, v);
}

Session forward(Model& m, const GraphInputs& in) {
  Session s;
  bind(s, m);
  NodeStates& n = s.nodes;
  n.x = hgnn_forward(s, in);
  if (m.ablation().use_wln) {
    const WlnOutput w = wln_forward(s, in, m);
    n.atom_h = w.atom_h;
    n.atom_scores = w.atom_scores;
    n.x_gnn = molecule_embeddings(s, in, w.atom_h);
  } else {
    n.x_gnn = s.tape->constant(Tensor(in.num_nodes, m.dims().emb));
  }
  n.x_attn = attention_fuse(s, n.x, n.x_gnn);
  n.z = num::concat_cols(n.x, n.x_attn);
  return s;
}

namespace {

void check_edges(const EdgeGroups& edges, std::size_t num_nodes) {
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].empty()) throw EmptyEdge("edge " + std::to_string(e) + " has no nodes");
    for (std::size_t v : edges[e]) {
      if (v >= num_nodes) {
        throw DataError("edge " + std::to_string(e) + " references node " + std::to_string(v) +
                        " of " + std::to_string(num_nodes));
      }
    }
  }
}

}  // namespace

Var aggregate(const Session& s, const Model& m, const EdgeGroups& edges) {
  check_edges(edges, s.nodes.z.rows());
  return m.ablation().use_sum_aggregator ? num::segment_sum(s.nodes.z, edges)
                                         : num::segment_mean(s.nodes.z, edges);
}

Var mlp_score(Session& s, Var r) {
  Var hidden = num::relu(num::add_bias(num::matmul(r, get(s, "mlp.w1")), get(s, "mlp.b1")));
  return num::sigmoid(num::add_bias(num::matmul(hidden, get(s, "mlp.w2")), get(s, "mlp.b2")));
}

Var bond_change_sum(const Session& s, const EdgeGroups& edges) {
  check_edges(edges, s.nodes.x_gnn.rows());
  return num::segment_sum(s.nodes.x_gnn, edges);
}

ScoreBatch score_edges(Session& s, const Model& m, const EdgeGroups& edges) {
  ScoreBatch b;
  b.reaction = aggregate(s, m, edges);
  b.score = mlp_score(s, b.reaction);
  return b;
}

Var reaction_loss(Session& s, const Model& m, const ScoreBatch& batch,
                  std::span<const double> labels, const EdgeGroups& edges, double lambda_mse) {
  Var loss = num::binary_cross_entropy(batch.score, labels);
  if (!m.ablation().use_mse_loss || lambda_mse == 0.0) return loss;
  EdgeGroups positives;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (labels[i] == 1.0) positives.push_back(edges[i]);
  }
  if (positives.empty()) return loss;
  Var mse = num::mean_sq_row_norm(bond_change_sum(s, positives));
  return num::add(loss, num::scale(mse, lambda_mse));
}

Var center_loss(Session& s, std::span<const std::size_t> atoms, std::span<const double> labels) {
  if (!s.nodes.atom_scores.valid()) throw std::logic_error("center_loss needs WLN activations");
  return num::binary_cross_entropy(num::gather_rows(s.nodes.atom_scores, atoms), labels);
}

// ---- checkpoint ------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'C', 'H', 'E', 'M', 'H', 'G', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw CheckpointError("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw CheckpointError("checkpoint truncated");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::vector<int> dims_vector(const Dims& d) {
  return {d.in_dim, d.hidden, d.emb, d.dk, d.wln_hidden, d.wln_layers, d.mlp_hidden};
}

}  // namespace

void write_checkpoint(const Model& m, std::ostream& out) {
  out.write(kMagic, sizeof kMagic);
  put_u32(out, kVersion);
  put_u64(out, m.seed());
  const Ablation& a = m.ablation();
  out.put(a.use_wln ? 1 : 0);
  out.put(a.use_sum_aggregator ? 1 : 0);
  out.put(a.use_mse_loss ? 1 : 0);
  const std::vector<int> dims = dims_vector(m.dims());
  put_u32(out, static_cast<std::uint32_t>(dims.size()));
  for (int d : dims) put_u32(out, static_cast<std::uint32_t>(d));
  put_u32(out, static_cast<std::uint32_t>(m.parameters().size()));
  for (const Parameter& p : m.parameters()) {
    put_u32(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put_u64(out, p.value.rows());
    put_u64(out, p.value.cols());
    for (double x : p.value.data()) {
      std::uint64_t bits;
      std::memcpy(&bits, &x, sizeof bits);
      put_u64(out, bits);
    }
  }
  if (!out) throw Error("checkpoint write failed");
}

Model read_checkpoint(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw CheckpointError("not a chemhg checkpoint (bad magic)");
  }
  const std::uint32_t version = get_u32(in);
  if (version != kVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  Model m;
  m.seed_ = get_u64(in);
  char flags[3];
  if (!in.read(flags, 3)) throw CheckpointError("checkpoint truncated");
  m.ablation_ = {flags[0] != 0, flags[1] != 0, flags[2] != 0};
  const std::uint32_t nd = get_u32(in);
  if (nd != 7) throw CheckpointError("checkpoint dims block has " + std::to_string(nd) + " entries");
  int d[7];
  for (int& x : d) x = static_cast<int>(get_u32(in));
  m.dims_ = {d[0], d[1], d[2], d[3], d[4], d[5], d[6]};
  std::vector<ParamSpec> expected;
  try {
    expected = specs(m.dims_);
    check_dims(m.dims_);
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("checkpoint dims invalid: ") + e.what());
  }
  const std::uint32_t count = get_u32(in);
  if (count != expected.size()) {
    throw CheckpointError("checkpoint has " + std::to_string(count) + " tensors, dims imply " +
                          std::to_string(expected.size()));
  }
  for (const ParamSpec& s : expected) {
    const std::uint32_t len = get_u32(in);
    if (len > 4096) throw CheckpointError("checkpoint tensor name too long");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw CheckpointError("checkpoint truncated");
    const std::uint64_t rows = get_u64(in);
    const std::uint64_t cols = get_u64(in);
    if (name != s.name || rows != s.rows || cols != s.cols) {
      throw CheckpointError("tensor " + name + " is " + std::to_string(rows) + "x" +
                            std::to_string(cols) + ", expected " + s.name + " " +
                            std::to_string(s.rows) + "x" + std::to_string(s.cols));
    }
    Tensor t(rows, cols);
    for (double& x : t.data()) {
      const std::uint64_t bits = get_u64(in);
      std::memcpy(&x, &bits, sizeof x);
    }
    if (!t.all_finite()) throw CheckpointError("tensor " + name + " has non-finite entries");
    m.index_[name] = m.params_.size();
    m.params_.emplace_back(name, std::move(t));
  }
  return m;
}

void save_checkpoint(const Model& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_checkpoint(m, out);
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  try {
    return read_checkpoint(in);
  } catch (const CheckpointError& e) {
    throw CheckpointError(path + ": " + e.what());
  }
}

}  // namespace chemhg::model
