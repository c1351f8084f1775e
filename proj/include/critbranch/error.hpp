#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace critbranch {

/// Model text or structure is invalid (parse failure, bad probabilities,
/// dimension mismatch, reducible mean matrix).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation that is only defined at criticality was handed a model whose
/// Perron eigenvalue is not 1.
class CriticalityError : public ModelError {
 public:
  using ModelError::ModelError;
};

/// A simulation hit its population or node guard.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejection sampling ran out of attempts.
class AttemptsExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative method did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exact enumeration would exceed its state-space guard.
class EnumerationTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Monte Carlo replicate threw; carries the replicate index.
class ReplicateError : public std::runtime_error {
 public:
  ReplicateError(std::size_t replicate, const std::string& what)
      : std::runtime_error("replicate " + std::to_string(replicate) + ": " + what),
        replicate_(replicate) {}
  std::size_t replicate() const { return replicate_; }

 private:
  std::size_t replicate_;
};

}  // namespace critbranch
