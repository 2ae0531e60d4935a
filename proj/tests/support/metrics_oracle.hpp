//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "chemhg/train_eval.hpp"

namespace chemhg::testing {

// Written from the definitions, independent of the library arithmetic.
inline train::Metrics oracle_metrics(std::size_t tp, std::size_t fp, std::size_t tn,
                                     std::size_t fn) {
  train::Metrics m;
  const double TP = static_cast<double>(tp), FP = static_cast<double>(fp);
  const double TN = static_cast<double>(tn), FN = static_cast<double>(fn);
  const double n = TP + FP + TN + FN;
  m.accuracy = n > 0 ? (TP + TN) / n : 0.0;
  m.precision = TP + FP > 0 ? TP / (TP + FP) : 0.0;
  m.recall = TP + FN > 0 ? TP / (TP + FN) : 0.0;
  m.specificity = TN + FP > 0 ? TN / (TN + FP) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  const double predicted_positive = n > 0 ? (TP + FP) / n : 0.0;
  m.collapsed = n > 0 && (predicted_positive <= 0.02 || predicted_positive >= 0.98);
  m.tp = tp;
  m.fp = fp;
  m.tn = tn;
  m.fn = fn;
  return m;
}

}  // namespace chemhg::testing
