#pragma once

#include <stdexcept>
#include <string>

namespace naff {

/// Precondition or domain violation (bad argument, malformed input).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A window that does not support the requested operation.
class UnsupportedWindow : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a signal (or residual) has nothing left to analyze.
class EmptyResidual : public std::runtime_error {
 public:
  EmptyResidual() : std::runtime_error("empty residual") {}
};

/// Peak refinement found no interior maximum in its bracket.
class RefinementEdge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Too few usable points for a least-squares fit.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two aliased measurements that cannot come from one tone.
class InconsistentMeasurement : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace naff
