#pragma once

#include <stdexcept>
#include <string>

namespace radloc {

// Invalid configuration, shape mismatch, or unsatisfiable setup request.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke an operation's precondition (e.g. submitted a masked action).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Training diverged: non-finite gradients or losses.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or truncated checkpoint / dataset file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Library invariant broken; indicates a bug rather than bad input.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace radloc
