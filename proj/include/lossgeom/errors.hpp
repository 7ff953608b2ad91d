#pragma once

#include <stdexcept>

namespace lossgeom {

// Bad user input: unknown loss spec, malformed config, missing file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numeric contract was violated while running: derivative failure,
// eta above the mixability constant, invariant broken mid-experiment.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lossgeom
