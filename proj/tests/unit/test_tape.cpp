//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <functional>

#include "doctest.h"

#include "chemhg/rng.hpp"
#include "chemhg/tape.hpp"

using namespace chemhg;
using namespace chemhg::num;

namespace {

using Builder = std::function<Var(Tape&, std::vector<Var>&)>;

Parameter random_param(const char* name, std::size_t r, std::size_t c, Rng& rng,
                       double lo = -1.0, double hi = 1.0) {
  Tensor t(r, c);
  for (auto& x : t.data()) x = rng.uniform(lo, hi);
  return Parameter(name, std::move(t));
}

double evaluate(std::vector<Parameter>& ps, const Builder& f) {
  Tape tape;
  std::vector<Var> vars;
  for (auto& p : ps) vars.push_back(tape.param(p));
  return f(tape, vars).value()[0];
}

// Central differences against the tape gradient for every parameter entry.
void check_gradients(std::vector<Parameter> ps, const Builder& f, double tol = 1e-6) {
  for (auto& p : ps) p.zero_grad();
  {
    Tape tape;
    std::vector<Var> vars;
    for (auto& p : ps) vars.push_back(tape.param(p));
    Var loss = f(tape, vars);
    REQUIRE(loss.rows() == 1);
    REQUIRE(loss.cols() == 1);
    tape.backward(loss);
  }
  const double h = 1e-6;
  for (auto& p : ps) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double keep = p.value[i];
      p.value[i] = keep + h;
      const double up = evaluate(ps, f);
      p.value[i] = keep - h;
      const double down = evaluate(ps, f);
      p.value[i] = keep;
      const double fd = (up - down) / (2 * h);
      CAPTURE(p.name);
      CAPTURE(i);
      CHECK(p.grad[i] == doctest::Approx(fd).epsilon(tol).scale(1.0));
    }
  }
}

}  // namespace

TEST_CASE("square at three has slope six") {
  Parameter x("x", Tensor(1, 1, 3.0));
  Tape tape;
  Var v = tape.param(x);
  tape.backward(mul(v, v));
  CHECK(x.grad[0] == 6.0);
}

TEST_CASE("gradients accumulate across uses") {
  Parameter x("x", Tensor(1, 1, 2.0));
  Tape tape;
  Var v = tape.param(x);
  tape.backward(add(scale(v, 3.0), mul(v, v)));
  CHECK(x.grad[0] == 7.0);
}

TEST_CASE("finite-difference checks for every op") {
  Rng rng(5);
  std::vector<Parameter> ps{random_param("a", 4, 3, rng), random_param("b", 3, 5, rng),
                            random_param("c", 4, 3, rng), random_param("bias", 1, 3, rng)};
  SUBCASE("matmul") {
    check_gradients(ps, [](Tape&, auto& v) { return sum_all(mul(matmul(v[0], v[1]), matmul(v[0], v[1]))); });
  }
  SUBCASE("add sub mul scale") {
    check_gradients(ps, [](Tape&, auto& v) {
      return sum_all(mul(sub(add(v[0], scale(v[2], 0.5)), v[2]), v[0]));
    });
  }
  SUBCASE("bias sigmoid") {
    check_gradients(ps, [](Tape&, auto& v) { return sum_all(sigmoid(add_bias(v[0], v[3]))); });
  }
  SUBCASE("relu away from the kink") {
    check_gradients(ps, [](Tape&, auto& v) { return sum_all(mul(relu(v[0]), v[2])); });
  }
  SUBCASE("softmax") {
    check_gradients(ps, [](Tape&, auto& v) { return sum_all(mul(softmax_rows(v[0]), v[2])); });
  }
  SUBCASE("concat transpose gather") {
    check_gradients(ps, [](Tape&, auto& v) {
      const std::vector<std::size_t> rows{2, 0, 2};
      Var g = gather_rows(concat_cols(v[0], v[2]), rows);
      return sum_all(mul(matmul(transpose(g), g), matmul(transpose(g), g)));
    });
  }
  SUBCASE("segments and row reductions") {
    check_gradients(ps, [](Tape&, auto& v) {
      const std::vector<std::vector<std::size_t>> groups{{0, 1}, {}, {3, 2, 0}};
      Var s = segment_sum(v[0], groups);
      Var m = segment_mean(v[2], groups);
      return add(sum_all(mul(row_sum(s), row_mean(m))), mean_sq_row_norm(add(s, m)));
    });
  }
  SUBCASE("binary cross entropy") {
    check_gradients(ps, [](Tape&, auto& v) {
      const std::vector<double> labels{1, 0, 1, 0};
      return binary_cross_entropy(sigmoid(row_sum(v[0])), labels);
    });
  }
}

TEST_CASE("sparse product gradient") {
  Rng rng(9);
  const CsrMatrix p = CsrMatrix::from_triplets(3, 4, {{0, 1, 0.5}, {2, 3, -1.0}, {1, 0, 2.0}, {2, 1, 0.25}});
  std::vector<Parameter> ps{random_param("x", 4, 2, rng)};
  check_gradients(ps, [&](Tape&, auto& v) { Var y = spmm(p, v[0]); return sum_all(mul(y, y)); });
}

TEST_CASE("sigmoid and softmax properties") {
  Tape tape;
  Var x = tape.constant(Tensor(1, 4, std::vector<double>{-800.0, -1.0, 0.0, 800.0}));
  const Tensor s = sigmoid(x).value();
  CHECK(s[0] >= 0.0);
  CHECK(s[1] == doctest::Approx(1.0 / (1.0 + std::exp(1.0))));
  CHECK(s[2] == 0.5);
  CHECK(s[3] == 1.0);
  const Tensor sm = softmax_rows(x).value();
  CHECK(sm.all_finite());
  CHECK(sm[3] == doctest::Approx(1.0));
}

TEST_CASE("binary cross entropy clamps extreme predictions") {
  Tape tape;
  Var p = tape.constant(Tensor(2, 1, std::vector<double>{0.0, 1.0}));
  const std::vector<double> labels{1.0, 0.0};
  const double loss = binary_cross_entropy(p, labels).value()[0];
  CHECK(std::isfinite(loss));
  CHECK(loss == doctest::Approx(-std::log(1e-12)));
}

TEST_CASE("non-finite values are rejected") {
  Tape tape;
  CHECK_THROWS_AS(tape.constant(Tensor(1, 1, NAN)), NonFiniteValue);
  Var a = tape.constant(Tensor(1, 1, 1e308));
  CHECK_THROWS_AS(scale(a, 10.0), NonFiniteValue);
}

TEST_CASE("parents must precede their children") {
  Tape tape;
  Var a = tape.constant(Tensor(1, 1, 1.0));
  CHECK_THROWS_AS(tape.push("bad", Tensor(1, 1), {a.id() + 1}, nullptr), CycleDetected);
  CHECK_THROWS_AS(tape.push("bad", Tensor(1, 1), {a.id() + 5}, nullptr), CycleDetected);
}

TEST_CASE("shape mismatches throw") {
  Tape tape;
  Var a = tape.constant(Tensor(2, 3));
  Var b = tape.constant(Tensor(2, 2));
  CHECK_THROWS_AS(add(a, b), ShapeMismatch);
  CHECK_THROWS_AS(matmul(a, b), ShapeMismatch);
}
