#pragma once

#include "tvinfer/local_design.hpp"

namespace tvinfer {

/// Estimates at one time point. beta_hat = theta_tilde - bias and
/// bias = (P_R - I) beta_tilde.
struct PointEstimate {
  double t = 0.0;
  Vector beta_tilde;   // tv-lasso
  Vector theta_tilde;  // tv-ridge
  Vector beta_hat;     // bias-corrected
  Vector bias;         // estimated projection bias
};

inline double default_lambda2(Index n) { return 1.0 / static_cast<double>(n); }

/// (Xt'Xt + l2 I)^-1 Xt'Yt through the SVD: Q diag(d / (d^2 + l2)) P' Yt.
Vector tv_ridge(const LocalDesign& design, double lambda2);

/// Dense solve of the ridge normal equations. Reference route for tests.
Vector tv_ridge_dense(const LocalDesign& design, double lambda2);

PointEstimate bias_correct(const Vector& theta_tilde, const Vector& beta_tilde, const LocalDesign& design);

}  // namespace tvinfer
