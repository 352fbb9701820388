#pragma once

#include <stdexcept>
#include <string>

namespace mmc {

// Thrown when an equilibrium condition fails for the requested parameters.
struct ConditionViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown by efficiency() when certification fails at the requested point.
struct NotAnEquilibrium : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when an LP instance would exceed the configured market cap.
struct DimensionCap : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown on file output failures.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mmc
