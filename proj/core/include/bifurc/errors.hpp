#pragma once

#include <stdexcept>

namespace bifurc {

/// Non-finite coefficient or diverged numerics; paths abort instead of clamping.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A model/parameter declaration that fails its probe-grid validation.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Inconsistent or unusable input data (missing nodes, schema mismatch, ...).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bifurc
