#pragma once

#include <Eigen/Dense>

#include "tvinfer/error.hpp"

namespace tvinfer {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Observations of a time-varying coefficient model on the even grid
/// t_i = i/n, i = 1..n. Row i (0-based) of X is observed at (i + 1) / n.
class Dataset {
 public:
  Dataset(Matrix X, Vector y);

  const Matrix& X() const noexcept { return X_; }
  const Vector& y() const noexcept { return y_; }
  Index n() const noexcept { return X_.rows(); }
  Index p() const noexcept { return X_.cols(); }

  /// Normalized observation time of 0-based row `i`.
  double time(Index i) const noexcept { return static_cast<double>(i + 1) / static_cast<double>(n()); }

 private:
  Matrix X_;
  Vector y_;
};

}  // namespace tvinfer
