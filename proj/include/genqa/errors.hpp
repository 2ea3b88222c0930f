// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace genqa {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape disagreement between operands.
struct DimensionError : Error {
  using Error::Error;
};

// A forward value became NaN or infinite.
struct NumericError : Error {
  using Error::Error;
};

// Malformed input file, config or checkpoint.
struct FormatError : Error {
  using Error::Error;
};

// Caller violated a documented precondition.
struct InvalidArgument : Error {
  using Error::Error;
};

}  // namespace genqa
