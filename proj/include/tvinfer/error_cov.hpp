#pragma once

#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "tvinfer/lasso.hpp"
#include "tvinfer/local_design.hpp"

namespace tvinfer {

/// iid errors with known standard deviation.
struct IidKnown {
  double sigma = 1.0;
};

/// iid errors; sigma estimated by the scaled lasso at each time point.
struct IidEstimated {};

/// Known n x n error covariance.
struct KnownMatrix {
  Matrix sigma_e;
};

/// Known stationary autocovariance gamma(0), gamma(1), ...; lags past the
/// end are zero.
struct KnownStationary {
  Vector autocov;
};

/// Banded Toeplitz estimate from pooled lasso residuals. The band is either
/// fixed or chosen as h*(|N_t|, rho).
struct BandedEstimate {
  std::optional<Index> h;
  double rho = 1.0;
  double constant = 1.0;
};

using ErrorCovModel = std::variant<IidKnown, IidEstimated, KnownMatrix, KnownStationary, BandedEstimate>;

std::string_view error_model_name(const ErrorCovModel& model) noexcept;
void validate(const ErrorCovModel& model);

/// Whether the model needs pooled residuals.
inline bool needs_residuals(const ErrorCovModel& model) noexcept {
  return std::holds_alternative<BandedEstimate>(model);
}

/// sigma_k = n^-1 sum_{i=1}^{n-k} r_i r_{i+k}, k = 0..h.
Vector residual_autocovariance(const Eigen::Ref<const Vector>& residuals, Index h);

struct BandedCovariance {
  Matrix matrix;
  double diagonal_shift = 0.0;  // > 0 when a PSD repair was applied
};

/// m x m symmetric Toeplitz matrix with entry coeffs(|j-k|) for |j-k| <= h
/// and zero beyond. An indefinite result is repaired by raising the
/// diagonal by |most negative eigenvalue| + 1e-8.
BandedCovariance band_covariance(const Eigen::Ref<const Vector>& coeffs, Index h, Index m);

/// (n / log n)^(1 / (2 rho)) before rounding.
double band_width_formula(double n_local, double rho, double constant = 1.0);

/// h* = max(1, round(constant * (n' / log n')^(1 / (2 rho)))).
Index select_band_width(Index n_local, double rho, double constant = 1.0);

/// Extra inputs some models need.
struct ErrorCovInputs {
  const Vector* residuals = nullptr;   // pooled residuals, length n
  std::optional<double> sigma_hat;     // for IidEstimated; computed when absent
  LassoConfig lasso;
};

/// Sigma_{e,t}: the |N_t| x |N_t| covariance of (e_i)_{i in N_t}.
Matrix build_sigma_et(const ErrorCovModel& model, const LocalDesign& design, const ErrorCovInputs& inputs = {});

/// Residuals y_i - x_i' beta(t_j(i)) where t_j(i) is the grid point closest
/// to t_i; `betas` holds one coefficient vector per grid point.
Vector pooled_residuals(const Dataset& data, const std::vector<double>& grid, const std::vector<Vector>& betas);

/// Autocovariance gamma(0..max_lag) of an AR(1) process with unit innovations.
Vector ar1_autocov(double phi, Index max_lag);

/// Autocovariance gamma(0..max_lag) of e_i = sum_{m=0}^{M} (m+1)^-rho xi_{i-m}.
Vector truncated_ma_autocov(double rho, Index truncation, Index max_lag);

}  // namespace tvinfer
