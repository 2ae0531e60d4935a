//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chemhg/tensor.hpp"

namespace chemhg::num {

// Programming error: a node referenced a parent recorded after it.
class CycleDetected : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Trainable tensor with its gradient accumulator.
struct Parameter {
  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

  void zero_grad() { grad = Tensor(value.rows(), value.cols()); }

  std::string name;
  Tensor value;
  Tensor grad;
};

class Tape;

// Handle to a node on a tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Define-by-run reverse-mode tape. Nodes are appended in evaluation order,
// so reverse index order is a reverse topological order and backward visits
// each node once. Single-threaded; build one tape per forward pass.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  struct Node {
    const char* op = "";
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    bool needs_grad = false;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    Parameter* param = nullptr;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // The parameter must outlive the tape; backward() adds into param.grad.
  Var param(Parameter& p);

  // Records an op. Throws NonFiniteValue if `value` has NaN/Inf and
  // CycleDetected if a parent id is not older than the new node.
  Var push(const char* op, Tensor value, std::vector<std::size_t> parents,
           BackwardFn backward);

  // Seeds d(loss)/d(loss) = 1 and propagates to every parameter.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  Node& node(std::size_t id) { return nodes_[id]; }
  const Node& node(std::size_t id) const { return nodes_[id]; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }

  // Adds g into the gradient of node `id` (no-op if it needs no gradient).
  void accumulate(std::size_t id, const Tensor& g);
  // Gradient of a node after backward(); zeros if none reached it.
  Tensor grad(Var v) const;

 private:
  std::vector<Node> nodes_;
};

// ---- ops -------------------------------------------------------------------

Var matmul(Var a, Var b);
// Sparse constant times variable. `p` must outlive the tape.
Var spmm(const CsrMatrix& p, Var x);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double s);
// Adds a 1 x cols row vector to every row (the only broadcast supported).
Var add_bias(Var a, Var bias);
Var sigmoid(Var a);
Var relu(Var a);
Var softmax_rows(Var a);
Var concat_cols(Var a, Var b);
Var transpose(Var a);
Var gather_rows(Var a, std::span<const std::size_t> rows);
// Output row g is the sum (or mean) of input rows groups[g]. Empty groups
// give zero rows.
Var segment_sum(Var a, const std::vector<std::vector<std::size_t>>& groups);
Var segment_mean(Var a, const std::vector<std::vector<std::size_t>>& groups);
Var row_sum(Var a);   // rows x 1
Var row_mean(Var a);  // rows x 1
Var sum_all(Var a);   // 1 x 1
// (1/rows) * sum of squared row norms; 0 for an empty input.
Var mean_sq_row_norm(Var a);
// Mean binary cross entropy of an n x 1 prediction column against labels in
// {0,1}. Predictions are clamped to [eps, 1-eps] before the logs; clamped
// entries pass no gradient.
Var binary_cross_entropy(Var pred, std::span<const double> labels, double eps = 1e-12);

}  // namespace chemhg::num
