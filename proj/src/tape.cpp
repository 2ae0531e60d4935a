//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "chemhg/tape.hpp"

#include <algorithm>
#include <cmath>

#include "chemhg/kernels.hpp"

namespace chemhg::num {

const Tensor& Var::value() const { return tape_->node(id_).value; }

Var Tape::constant(Tensor value) {
  return push("constant", std::move(value), {}, nullptr);
}

Var Tape::param(Parameter& p) {
  Var v = push("param", p.value, {}, nullptr);
  nodes_[v.id()].param = &p;
  nodes_[v.id()].needs_grad = true;
  return v;
}

Var Tape::push(const char* op, Tensor value, std::vector<std::size_t> parents,
               BackwardFn backward) {
  const std::size_t id = nodes_.size();
  bool needs = false;
  for (std::size_t p : parents) {
    if (p >= id) {
      throw CycleDetected(std::string(op) + ": parent " + std::to_string(p) +
                          " is not older than node " + std::to_string(id));
    }
    needs = needs || nodes_[p].needs_grad;
  }
  if (!value.all_finite()) {
    throw NonFiniteValue(std::string("non-finite value produced by ") + op);
  }
  Node n;
  n.op = op;
  n.value = std::move(value);
  n.parents = std::move(parents);
  n.needs_grad = needs;
  if (needs) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, id);
}

void Tape::accumulate(std::size_t id, const Tensor& g) {
  Node& n = nodes_[id];
  if (!n.needs_grad) return;
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
    return;
  }
  auto dst = n.grad.data();
  auto src = g.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_[v.id()];
  return n.has_grad ? n.grad : Tensor(n.value.rows(), n.value.cols());
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw std::invalid_argument("backward: foreign Var");
  const Node& l = nodes_[loss.id()];
  if (l.value.rows() != 1 || l.value.cols() != 1) {
    throw ShapeMismatch("backward: loss must be 1x1, got " + l.value.shape_str());
  }
  accumulate(loss.id(), Tensor(1, 1, 1.0));
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.has_grad) continue;
    if (n.param) {
      auto dst = n.param->grad.data();
      auto src = n.grad.data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    if (n.backward) n.backward(*this, id);
  }
}

namespace {

void same_tape(Var a, Var b, const char* op) {
  if (a.tape() != b.tape()) throw std::invalid_argument(std::string(op) + ": Vars on different tapes");
}

void same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeMismatch(std::string(op) + ": " + a.shape_str() + " vs " + b.shape_str());
  }
}

template <class F>
Tensor map(const Tensor& a, F f) {
  Tensor out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

}  // namespace

Var matmul(Var a, Var b) {
  same_tape(a, b, "matmul");
  Tape& t = *a.tape();
  Tensor v = kernels::matmul(a.value(), b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return t.push("matmul", std::move(v), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.node(self).grad;
    if (t.needs_grad(ia)) t.accumulate(ia, kernels::matmul_nt(g, t.node(ib).value));
    if (t.needs_grad(ib)) t.accumulate(ib, kernels::matmul_tn(t.node(ia).value, g));
  });
}

Var spmm(const CsrMatrix& p, Var x) {
  Tape& t = *x.tape();
  Tensor v = kernels::spmm(p, x.value());
  const std::size_t ix = x.id();
  const CsrMatrix* pp = &p;
  return t.push("spmm", std::move(v), {ix}, [ix, pp](Tape& t, std::size_t self) {
    t.accumulate(ix, kernels::spmm(pp->transposed(), t.node(self).grad));
  });
}

Var add(Var a, Var b) {
  same_tape(a, b, "add");
  same_shape(a.value(), b.value(), "add");
  Tensor v = a.value();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->push("add", std::move(v), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor g = t.node(self).grad;
    t.accumulate(ia, g);
    t.accumulate(ib, g);
  });
}

Var sub(Var a, Var b) {
  same_tape(a, b, "sub");
  same_shape(a.value(), b.value(), "sub");
  Tensor v = a.value();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->push("sub", std::move(v), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor g = t.node(self).grad;
    t.accumulate(ia, g);
    t.accumulate(ib, map(g, [](double x) { return -x; }));
  });
}

Var mul(Var a, Var b) {
  same_tape(a, b, "mul");
  same_shape(a.value(), b.value(), "mul");
  Tensor v = a.value();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->push("mul", std::move(v), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.node(self).grad;
    if (t.needs_grad(ia)) {
      Tensor ga = g;
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= t.node(ib).value[i];
      t.accumulate(ia, ga);
    }
    if (t.needs_grad(ib)) {
      Tensor gb = g;
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] *= t.node(ia).value[i];
      t.accumulate(ib, gb);
    }
  });
}

Var scale(Var a, double s) {
  const std::size_t ia = a.id();
  return a.tape()->push("scale", map(a.value(), [s](double x) { return s * x; }), {ia},
                        [ia, s](Tape& t, std::size_t self) {
                          t.accumulate(ia, map(t.node(self).grad, [s](double x) { return s * x; }));
                        });
}

Var add_bias(Var a, Var bias) {
  same_tape(a, bias, "add_bias");
  if (bias.rows() != 1 || bias.cols() != a.cols()) {
    throw ShapeMismatch("add_bias: " + a.value().shape_str() + " + " + bias.value().shape_str());
  }
  Tensor v = a.value();
  for (std::size_t r = 0; r < v.rows(); ++r) {
    for (std::size_t c = 0; c < v.cols(); ++c) v(r, c) += bias.value()(0, c);
  }
  const std::size_t ia = a.id(), ib = bias.id();
  return a.tape()->push("add_bias", std::move(v), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor g = t.node(self).grad;
    t.accumulate(ia, g);
    if (t.needs_grad(ib)) {
      Tensor gb(1, g.cols());
      for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < g.cols(); ++c) gb(0, c) += g(r, c);
      }
      t.accumulate(ib, gb);
    }
  });
}

Var sigmoid(Var a) {
  const std::size_t ia = a.id();
  Tensor v = map(a.value(), [](double x) {
    // Split by sign so exp never overflows.
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  return a.tape()->push("sigmoid", std::move(v), {ia}, [ia](Tape& t, std::size_t self) {
    const Tensor& y = t.node(self).value;
    Tensor g = t.node(self).grad;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= y[i] * (1.0 - y[i]);
    t.accumulate(ia, g);
  });
}

Var relu(Var a) {
  const std::size_t ia = a.id();
  return a.tape()->push("relu", map(a.value(), [](double x) { return x > 0 ? x : 0.0; }), {ia},
                        [ia](Tape& t, std::size_t self) {
                          const Tensor& x = t.node(ia).value;
                          Tensor g = t.node(self).grad;
                          for (std::size_t i = 0; i < g.size(); ++i) {
                            if (!(x[i] > 0)) g[i] = 0.0;
                          }
                          t.accumulate(ia, g);
                        });
}

Var softmax_rows(Var a) {
  const std::size_t ia = a.id();
  Tensor v;
  kernels::softmax_rows(a.value(), v);
  return a.tape()->push("softmax_rows", std::move(v), {ia}, [ia](Tape& t, std::size_t self) {
    const Tensor& y = t.node(self).value;
    const Tensor& g = t.node(self).grad;
    Tensor gx(y.rows(), y.cols());
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) gx(r, c) = y(r, c) * (g(r, c) - dot);
    }
    t.accumulate(ia, gx);
  });
}

Var concat_cols(Var a, Var b) {
  same_tape(a, b, "concat_cols");
  if (a.rows() != b.rows()) {
    throw ShapeMismatch("concat_cols: " + a.value().shape_str() + " | " + b.value().shape_str());
  }
  const std::size_t ca = a.cols(), cb = b.cols();
  Tensor v(a.rows(), ca + cb);
  for (std::size_t r = 0; r < v.rows(); ++r) {
    std::copy_n(a.value().row(r).begin(), ca, v.row(r).begin());
    std::copy_n(b.value().row(r).begin(), cb, v.row(r).begin() + static_cast<std::ptrdiff_t>(ca));
  }
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->push("concat_cols", std::move(v), {ia, ib},
                        [ia, ib, ca, cb](Tape& t, std::size_t self) {
                          const Tensor& g = t.node(self).grad;
                          Tensor ga(g.rows(), ca), gb(g.rows(), cb);
                          for (std::size_t r = 0; r < g.rows(); ++r) {
                            for (std::size_t c = 0; c < ca; ++c) ga(r, c) = g(r, c);
                            for (std::size_t c = 0; c < cb; ++c) gb(r, c) = g(r, ca + c);
                          }
                          t.accumulate(ia, ga);
                          t.accumulate(ib, gb);
                        });
}

Var transpose(Var a) {
  const Tensor& x = a.value();
  Tensor v(x.cols(), x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) v(c, r) = x(r, c);
  }
  const std::size_t ia = a.id();
  return a.tape()->push("transpose", std::move(v), {ia}, [ia](Tape& t, std::size_t self) {
    const Tensor& g = t.node(self).grad;
    Tensor gx(g.cols(), g.rows());
    for (std::size_t r = 0; r < g.rows(); ++r) {
      for (std::size_t c = 0; c < g.cols(); ++c) gx(c, r) = g(r, c);
    }
    t.accumulate(ia, gx);
  });
}

Var gather_rows(Var a, std::span<const std::size_t> rows) {
  const Tensor& x = a.value();
  Tensor v(rows.size(), x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= x.rows()) throw ShapeMismatch("gather_rows: row index out of range");
    std::copy_n(x.row(rows[k]).begin(), x.cols(), v.row(k).begin());
  }
  const std::size_t ia = a.id();
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  const std::size_t n_in = x.rows();
  return a.tape()->push("gather_rows", std::move(v), {ia},
                        [ia, idx = std::move(idx), n_in](Tape& t, std::size_t self) {
                          const Tensor& g = t.node(self).grad;
                          Tensor gx(n_in, g.cols());
                          for (std::size_t k = 0; k < idx.size(); ++k) {
                            auto dst = gx.row(idx[k]);
                            auto src = g.row(k);
                            for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
                          }
                          t.accumulate(ia, gx);
                        });
}

namespace {

Var segment_impl(Var a, const std::vector<std::vector<std::size_t>>& groups, bool mean,
                 const char* op) {
  const Tensor& x = a.value();
  Tensor v(groups.size(), x.cols());
  std::vector<double> w(groups.size(), 1.0);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (mean && !groups[g].empty()) w[g] = 1.0 / static_cast<double>(groups[g].size());
    auto dst = v.row(g);
    for (std::size_t r : groups[g]) {
      if (r >= x.rows()) throw ShapeMismatch(std::string(op) + ": row index out of range");
      auto src = x.row(r);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
    }
    if (mean) {
      for (double& d : dst) d *= w[g];
    }
  }
  const std::size_t ia = a.id();
  const std::size_t n_in = x.rows();
  return a.tape()->push(op, std::move(v), {ia},
                        [ia, groups, w = std::move(w), n_in](Tape& t, std::size_t self) {
                          const Tensor& g = t.node(self).grad;
                          Tensor gx(n_in, g.cols());
                          for (std::size_t k = 0; k < groups.size(); ++k) {
                            auto src = g.row(k);
                            for (std::size_t r : groups[k]) {
                              auto dst = gx.row(r);
                              for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w[k] * src[c];
                            }
                          }
                          t.accumulate(ia, gx);
                        });
}

}  // namespace

Var segment_sum(Var a, const std::vector<std::vector<std::size_t>>& groups) {
  return segment_impl(a, groups, false, "segment_sum");
}

Var segment_mean(Var a, const std::vector<std::vector<std::size_t>>& groups) {
  return segment_impl(a, groups, true, "segment_mean");
}

Var row_sum(Var a) {
  const Tensor& x = a.value();
  Tensor v(x.rows(), 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (double d : x.row(r)) v(r, 0) += d;
  }
  const std::size_t ia = a.id(), cols = x.cols();
  return a.tape()->push("row_sum", std::move(v), {ia}, [ia, cols](Tape& t, std::size_t self) {
    const Tensor& g = t.node(self).grad;
    Tensor gx(g.rows(), cols);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      for (std::size_t c = 0; c < cols; ++c) gx(r, c) = g(r, 0);
    }
    t.accumulate(ia, gx);
  });
}

Var row_mean(Var a) {
  const double n = static_cast<double>(a.cols());
  return scale(row_sum(a), n > 0 ? 1.0 / n : 0.0);
}

Var sum_all(Var a) {
  double s = 0.0;
  for (double d : a.value().data()) s += d;
  const std::size_t ia = a.id();
  const std::size_t rows = a.rows(), cols = a.cols();
  return a.tape()->push("sum_all", Tensor(1, 1, s), {ia},
                        [ia, rows, cols](Tape& t, std::size_t self) {
                          t.accumulate(ia, Tensor(rows, cols, t.node(self).grad[0]));
                        });
}

Var mean_sq_row_norm(Var a) {
  const Tensor& x = a.value();
  const double inv_n = x.rows() ? 1.0 / static_cast<double>(x.rows()) : 0.0;
  double s = 0.0;
  for (double d : x.data()) s += d * d;
  const std::size_t ia = a.id();
  return a.tape()->push("mean_sq_row_norm", Tensor(1, 1, s * inv_n), {ia},
                        [ia, inv_n](Tape& t, std::size_t self) {
                          const double g = t.node(self).grad[0];
                          const Tensor& x = t.node(ia).value;
                          t.accumulate(ia, map(x, [g, inv_n](double v) { return 2.0 * inv_n * g * v; }));
                        });
}

Var binary_cross_entropy(Var pred, std::span<const double> labels, double eps) {
  const Tensor& p = pred.value();
  if (p.cols() != 1 || p.rows() != labels.size()) {
    throw ShapeMismatch("binary_cross_entropy: predictions " + p.shape_str() + " vs " +
                        std::to_string(labels.size()) + " labels");
  }
  const double inv_n = p.rows() ? 1.0 / static_cast<double>(p.rows()) : 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    const double q = std::clamp(p[i], eps, 1.0 - eps);
    s -= labels[i] * std::log(q) + (1.0 - labels[i]) * std::log(1.0 - q);
  }
  const std::size_t ip = pred.id();
  std::vector<double> y(labels.begin(), labels.end());
  return pred.tape()->push("binary_cross_entropy", Tensor(1, 1, s * inv_n), {ip},
                           [ip, y = std::move(y), inv_n, eps](Tape& t, std::size_t self) {
                             const double g = t.node(self).grad[0];
                             const Tensor& p = t.node(ip).value;
                             Tensor gp(p.rows(), 1);
                             for (std::size_t i = 0; i < p.rows(); ++i) {
                               const double q = p[i];
                               if (q < eps || q > 1.0 - eps) continue;
                               gp[i] = -g * inv_n * (y[i] / q - (1.0 - y[i]) / (1.0 - q));
                             }
                             t.accumulate(ip, gp);
                           });
}

}  // namespace chemhg::num
