#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace tvinfer {

/// Broad failure class; the CLI maps it onto its exit code.
enum class ErrorKind {
  config = 2,     // invalid parameters or configuration
  data = 3,       // malformed or inconsistent input data
  numerical = 4,  // solver / factorization failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// Requested time point lies outside [b_n, 1 - b_n].
class BoundaryError : public ConfigError {
 public:
  explicit BoundaryError(const std::string& what) : ConfigError(what) {}
};

/// Kernel neighborhood is empty for the requested bandwidth.
class DegenerateBandwidthError : public ConfigError {
 public:
  explicit DegenerateBandwidthError(const std::string& what) : ConfigError(what) {}
};

/// A diagonal entry of the ridge covariance is not strictly positive.
class DegenerateVarianceError : public NumericalError {
 public:
  DegenerateVarianceError(const std::string& what, Eigen::Index coordinate)
      : NumericalError(what), coordinate_(coordinate) {}
  Eigen::Index coordinate() const noexcept { return coordinate_; }

 private:
  Eigen::Index coordinate_;
};

/// Iterative solver ran out of iterations; carries the last iterate.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, Eigen::VectorXd last_iterate, double residual,
                   std::vector<double> trace = {})
      : NumericalError(what),
        last_iterate_(std::move(last_iterate)),
        residual_(residual),
        trace_(std::move(trace)) {}

  const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }
  double residual() const noexcept { return residual_; }
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  Eigen::VectorXd last_iterate_;
  double residual_;
  std::vector<double> trace_;
};

/// Wraps an error raised inside a pipeline stage with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& inner)
      : Error(inner.kind(), stage + ": " + inner.what()), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace tvinfer
