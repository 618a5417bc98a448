#pragma once

#include <stdexcept>
#include <string>

namespace qnsp {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Mean-compatibility violation in a Poisson solve; carries the measured defect.
class CompatibilityError : public Error {
 public:
  CompatibilityError(const std::string& what, double measured_mean)
      : Error(what), measured_mean_(measured_mean) {}
  double measured_mean() const { return measured_mean_; }

 private:
  double measured_mean_;
};

/// Density fell below the evaluation floor where 1/rho or log(rho) is needed.
class FloorViolationError : public Error {
 public:
  using Error::Error;
};

/// Derivative order outside the supported range.
class UnsupportedOrderError : public Error {
 public:
  using Error::Error;
};

/// Sampling too coarse for the requested mollification / window.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class WindowError : public Error {
 public:
  using Error::Error;
};

/// Mass matrix lost positive definiteness (vacuum in Galerkin mode).
class IndefiniteMassError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared during time stepping; message names the term.
class BlowUpError : public Error {
 public:
  using Error::Error;
};

/// Positivity guard tripped (min rho under half the floor).
class GuardError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qnsp
