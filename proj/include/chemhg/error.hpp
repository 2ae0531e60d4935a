//
// chemhg - Copyright 2026 The chemhg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <stdexcept>
#include <string>

namespace chemhg {

// Root of every exception thrown by the library. Subsystems derive their own
// kinds so callers (the CLI in particular) can map them to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data problems: malformed files, bad molecules, inconsistent
// checkpoints.
class DataError : public Error {
 public:
  using Error::Error;
};

// Numerical failure: non-finite values, diverging losses.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace chemhg
