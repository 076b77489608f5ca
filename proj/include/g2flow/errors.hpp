#pragma once

#include <stdexcept>
#include <string>

namespace g2 {

struct RankError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NotPositive : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotClosed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularMatrix : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct JacobiViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientSamples : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace g2
