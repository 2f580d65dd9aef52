#include "tvinfer/estimator.hpp"

namespace tvinfer {

Vector tv_ridge(const LocalDesign& design, double lambda2) {
  if (!(lambda2 > 0.0)) throw ConfigError("lambda2 must be positive");
  const auto& s = design.spectral();
  const Vector shrink = s.d.array() / (s.d.array().square() + lambda2);
  return s.Q * (shrink.asDiagonal() * (s.P.transpose() * design.Yt()));
}

Vector tv_ridge_dense(const LocalDesign& design, double lambda2) {
  if (!(lambda2 > 0.0)) throw ConfigError("lambda2 must be positive");
  const Index p = design.p();
  const Matrix A = design.Xt().transpose() * design.Xt() + lambda2 * Matrix::Identity(p, p);
  return A.ldlt().solve(design.Xt().transpose() * design.Yt());
}

PointEstimate bias_correct(const Vector& theta_tilde, const Vector& beta_tilde, const LocalDesign& design) {
  if (theta_tilde.size() != design.p() || beta_tilde.size() != design.p())
    throw DimensionError("bias correction: estimate lengths do not match the design");
  PointEstimate est;
  est.t = design.t();
  est.beta_tilde = beta_tilde;
  est.theta_tilde = theta_tilde;
  est.bias = design.project(beta_tilde) - beta_tilde;
  est.beta_hat = theta_tilde - est.bias;
  return est;
}

}  // namespace tvinfer
