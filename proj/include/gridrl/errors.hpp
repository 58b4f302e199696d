#pragma once

#include <stdexcept>
#include <string>

namespace gridrl {

/// AC power flow failed to reach the mismatch tolerance. Carries the final
/// iteration count and mismatch so callers can decide what to do; the solver
/// itself never returns voltages from a diverged iteration.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(int iterations_, double max_mismatch_)
      : std::runtime_error("power flow did not converge after " +
                           std::to_string(iterations_) +
                           " iterations (max mismatch " +
                           std::to_string(max_mismatch_) + " p.u.)"),
        iterations(iterations_),
        max_mismatch(max_mismatch_) {}

  int iterations;
  double max_mismatch;
};

class UnknownBus : public std::out_of_range {
 public:
  explicit UnknownBus(int bus)
      : std::out_of_range("unknown bus id " + std::to_string(bus)) {}
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed row or unreadable file while parsing a profile CSV.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Profile CSV is readable but missing a required column.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Profile values violate their physical range (negative demand, irradiance
/// outside [0,1]).
class UnitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyLog : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A PPO update produced a non-finite loss; the update is aborted and the
/// previous parameters are kept.
class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gridrl
