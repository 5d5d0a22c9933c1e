#pragma once

#include <stdexcept>
#include <string>

namespace koopbrs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Simplex exceeded its pivot budget or hit an unusable pivot.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class EmptyPolytope : public Error {
 public:
  using Error::Error;
};

class UnboundedPolytope : public Error {
 public:
  using Error::Error;
};

class RankDeficientData : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

class EmptyRestriction : public Error {
 public:
  using Error::Error;
};

class TooFewTuples : public Error {
 public:
  using Error::Error;
};

class GridTooLarge : public Error {
 public:
  using Error::Error;
};

/// Goodness-of-fit rejected the extreme value model for one component.
class KsRejected : public Error {
 public:
  KsRejected(int component, double statistic, double p_value)
      : Error("KS test rejected the reverse-Weibull fit for component " +
              std::to_string(component) + " (D=" + std::to_string(statistic) +
              ", p=" + std::to_string(p_value) + ")"),
        component_(component) {}
  int component() const noexcept { return component_; }

 private:
  int component_;
};

class FitDiverged : public Error {
 public:
  using Error::Error;
};

class NotInBrs : public Error {
 public:
  using Error::Error;
};

class EmptyAdmissible : public Error {
 public:
  using Error::Error;
};

/// A closed-loop step left the backward reachable set it was promised to stay in.
class GuaranteeViolation : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace koopbrs
