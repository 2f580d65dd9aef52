#pragma once

#include <optional>
#include <vector>

#include "tvinfer/local_design.hpp"

namespace tvinfer {

struct LassoConfig {
  int max_iter = 100000;   // coordinate sweeps
  double conv_tol = 1e-8;  // KKT residual on the gradient scale
  int cv_folds = 5;

  void validate() const;
};

struct LassoFit {
  Vector beta;
  double lambda1 = 0.0;
  double kkt_residual = 0.0;
  int sweeps = 0;
};

/// Solves min_b |Yt - Xt b|_2^2 + lambda1 |b|_1 by cyclic coordinate descent
/// with covariance updates. On return the KKT residual is <= cfg.conv_tol;
/// otherwise ConvergenceError carries the last iterate.
LassoFit weighted_lasso(const LocalDesign& design, double lambda1, const LassoConfig& cfg = {},
                        const Vector* warm_start = nullptr);

/// Same solver on explicit sufficient statistics gram = X'X, xty = X'Y.
LassoFit lasso_gram(const Matrix& gram, const Vector& xty, double lambda1, const LassoConfig& cfg = {},
                    const Vector* warm_start = nullptr);

/// max_j |2 X'(Y - X b)_j - lambda1 sign(b_j)| over active j, and the
/// excess of |2 X'(Y - X b)_j| over lambda1 over inactive j.
double kkt_residual(const Matrix& gram, const Vector& xty, const Vector& beta, double lambda1);

/// |Y - X b|^2 + lambda1 |b|_1.
double lasso_objective(const LocalDesign& design, const Vector& beta, double lambda1);

/// Smallest penalty with an all-zero solution, 2 |Xt' Yt|_inf.
double lambda_max(const LocalDesign& design);

/// Descending log-spaced grid from `top` to `top * ratio`.
std::vector<double> log_grid(double top, double ratio, int count);

/// Default grid for cross-validation: 2|Xt'Yt|_inf maximized over `centres`
/// down to 1e-3 of that.
std::vector<double> default_lambda_grid(const Dataset& data, const KernelSpec& spec,
                                        const std::vector<double>& centres, int count = 30);

/// K-fold cross-validation of lambda1. Within each neighborhood N_t (t in
/// `centres`) every K-th index forms a fold; training weights are
/// renormalized and the held-out loss is the kernel-weighted squared error.
/// Losses are summed over all centres. Ties resolve to the smallest lambda1.
double cross_validate_lambda1(const Dataset& data, const KernelSpec& spec, std::vector<double> grid,
                              const LassoConfig& cfg, const std::vector<double>& centres);

/// Up to `count` evenly spread points of the interior grid.
std::vector<double> cv_centres(const KernelSpec& spec, Index n, int count = 9);

struct ScaledLassoResult {
  double sigma = 0.0;
  Vector beta;
  std::vector<double> trace;
};

/// Joint estimate of the noise level and coefficients: alternate a lasso at
/// penalty 2 sigma sqrt(2 log p / |N_t|) with
/// sigma^2 = |Yt - Xt b|^2 |N_t| / max(|N_t| - |supp b|, 1), until sigma moves
/// by < 1e-6. Monotone stretches are accelerated by Aitken extrapolation. If
/// the iteration revisits an earlier sigma, the largest value on the cycle is
/// returned.
ScaledLassoResult scaled_lasso_sigma(const LocalDesign& design, const LassoConfig& cfg = {});

/// Penalty regimes, each with its theoretical lambda0.
struct PenaltyRegime {
  enum class Kind { iid_gaussian, srd, lrd, heavy_tail };
  Kind kind = Kind::iid_gaussian;
  double a_l1 = 1.0;    // srd: |a|_1 of the MA coefficients
  double rho = 0.75;    // lrd: decay exponent in (1/2, 1)
  double c_lrd = 4.0;   // lrd: constant C
  double q = 3.0;       // heavy_tail: moment order > 2
  double c_q = 2.0;     // heavy_tail: constant C_q
  Index n = 0;          // lrd: total sample size

  static PenaltyRegime iid() { return {}; }
  static PenaltyRegime short_range(double a_l1) {
    PenaltyRegime r;
    r.kind = Kind::srd;
    r.a_l1 = a_l1;
    return r;
  }
  static PenaltyRegime long_range(double rho, double c, Index n) {
    PenaltyRegime r;
    r.kind = Kind::lrd;
    r.rho = rho;
    r.c_lrd = c;
    r.n = n;
    return r;
  }
  static PenaltyRegime heavy(double q, double c_q = 2.0) {
    PenaltyRegime r;
    r.kind = Kind::heavy_tail;
    r.q = q;
    r.c_q = c_q;
    return r;
  }

  void validate() const;
};

struct PenaltyRecommendation {
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double L1 = 0.0;  // max_j [sum_i w X_ij^2]^1/2
  double L2 = 0.0;  // max_j [sum_i w^2 X_ij^2]^1/2
};

inline constexpr double kLambdaFloor = 1e-12;

/// lambda0 by regime (floored at 1e-12) and lambda1 = multiplier * lambda0.
PenaltyRecommendation recommend_lambda(const PenaltyRegime& regime, const LocalDesign& design, double sigma,
                                       double multiplier = 2.0);

}  // namespace tvinfer
