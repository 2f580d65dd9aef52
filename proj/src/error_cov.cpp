#include "tvinfer/error_cov.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "tvinfer/log.hpp"

namespace tvinfer {

std::string_view error_model_name(const ErrorCovModel& model) noexcept {
  struct Visitor {
    std::string_view operator()(const IidKnown&) const { return "iid_known"; }
    std::string_view operator()(const IidEstimated&) const { return "iid_estimated"; }
    std::string_view operator()(const KnownMatrix&) const { return "known_matrix"; }
    std::string_view operator()(const KnownStationary&) const { return "known_stationary"; }
    std::string_view operator()(const BandedEstimate&) const { return "banded"; }
  };
  return std::visit(Visitor{}, model);
}

void validate(const ErrorCovModel& model) {
  if (const auto* m = std::get_if<IidKnown>(&model)) {
    if (!(m->sigma > 0.0)) throw ConfigError("iid error sigma must be positive");
  } else if (const auto* m = std::get_if<KnownMatrix>(&model)) {
    const Matrix& s = m->sigma_e;
    if (s.rows() != s.cols()) throw ConfigError("known error covariance must be square");
    if (!s.isApprox(s.transpose(), 1e-12)) throw ConfigError("known error covariance must be symmetric");
    if ((s.diagonal().array() < 0.0).any()) throw ConfigError("known error covariance has a negative diagonal entry");
  } else if (const auto* m = std::get_if<KnownStationary>(&model)) {
    if (m->autocov.size() < 1 || !(m->autocov(0) >= 0.0))
      throw ConfigError("stationary autocovariance needs gamma(0) >= 0");
  } else if (const auto* m = std::get_if<BandedEstimate>(&model)) {
    if (m->h && *m->h < 0) throw ConfigError("band width must be nonnegative");
    if (!m->h && !(m->rho > 0.5)) throw ConfigError("automatic band width needs rho > 1/2");
    if (!(m->constant > 0.0)) throw ConfigError("band width constant must be positive");
  }
}

Vector residual_autocovariance(const Eigen::Ref<const Vector>& residuals, Index h) {
  const Index n = residuals.size();
  if (h < 0 || h >= n)
    throw ConfigError("autocovariance lag " + std::to_string(h) + " must be in [0, " + std::to_string(n) + ")");
  Vector out(h + 1);
  for (Index k = 0; k <= h; ++k)
    out(k) = residuals.head(n - k).dot(residuals.tail(n - k)) / static_cast<double>(n);
  return out;
}

BandedCovariance band_covariance(const Eigen::Ref<const Vector>& coeffs, Index h, Index m) {
  if (h < 0) throw ConfigError("band width must be nonnegative");
  if (coeffs.size() < std::min(h, m - 1) + 1) throw DimensionError("too few autocovariance coefficients for the band");
  BandedCovariance out;
  out.matrix = Matrix::Zero(m, m);
  const Index reach = std::min(h, m - 1);
  for (Index k = 0; k <= reach; ++k) {
    out.matrix.diagonal(k).setConstant(coeffs(k));
    if (k > 0) out.matrix.diagonal(-k).setConstant(coeffs(k));
  }
  if (reach == 0) {
    // Diagonal: PSD iff the variance is nonnegative.
    if (coeffs(0) < 0.0) {
      out.diagonal_shift = -coeffs(0) + 1e-8;
      out.matrix.diagonal().array() += out.diagonal_shift;
      log_warning("banded covariance repaired: negative variance estimate");
    }
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(out.matrix, Eigen::EigenvaluesOnly);
  const double lowest = eig.eigenvalues()(0);
  if (lowest < 0.0) {
    out.diagonal_shift = -lowest + 1e-8;
    out.matrix.diagonal().array() += out.diagonal_shift;
    log_warning("banded covariance repaired: diagonal raised by " + std::to_string(out.diagonal_shift));
  }
  return out;
}

double band_width_formula(double n_local, double rho, double constant) {
  return constant * std::pow(n_local / std::log(n_local), 1.0 / (2.0 * rho));
}

Index select_band_width(Index n_local, double rho, double constant) {
  if (n_local < 3) throw ConfigError("band width selection needs at least 3 local observations");
  if (!(rho > 0.5)) throw ConfigError("band width selection needs rho > 1/2");
  const double h = band_width_formula(static_cast<double>(n_local), rho, constant);
  return std::max<Index>(1, static_cast<Index>(std::llround(h)));
}

Matrix build_sigma_et(const ErrorCovModel& model, const LocalDesign& design, const ErrorCovInputs& inputs) {
  const Index m = design.local_size();
  const auto& idx = design.neighborhood().indices;

  if (const auto* iid = std::get_if<IidKnown>(&model)) {
    return (iid->sigma * iid->sigma) * Matrix::Identity(m, m);
  }
  if (std::holds_alternative<IidEstimated>(model)) {
    const double sigma = inputs.sigma_hat ? *inputs.sigma_hat : scaled_lasso_sigma(design, inputs.lasso).sigma;
    return (sigma * sigma) * Matrix::Identity(m, m);
  }
  if (const auto* known = std::get_if<KnownMatrix>(&model)) {
    Matrix out(m, m);
    for (Index a = 0; a < m; ++a)
      for (Index b = 0; b < m; ++b) {
        const Index i = idx[static_cast<std::size_t>(a)], j = idx[static_cast<std::size_t>(b)];
        if (i >= known->sigma_e.rows() || j >= known->sigma_e.cols())
          throw DimensionError("known error covariance smaller than the data");
        out(a, b) = known->sigma_e(i, j);
      }
    return out;
  }
  if (const auto* stat = std::get_if<KnownStationary>(&model)) {
    Matrix out(m, m);
    for (Index a = 0; a < m; ++a)
      for (Index b = 0; b < m; ++b) {
        const Index lag = std::abs(idx[static_cast<std::size_t>(a)] - idx[static_cast<std::size_t>(b)]);
        out(a, b) = lag < stat->autocov.size() ? stat->autocov(lag) : 0.0;
      }
    return out;
  }
  const auto& band = std::get<BandedEstimate>(model);
  if (!inputs.residuals) throw ConfigError("banded error covariance needs pooled residuals");
  const Index h = band.h ? *band.h : select_band_width(m, band.rho, band.constant);
  const Index lag = std::min({h, m - 1, inputs.residuals->size() - 1});
  const Vector coeffs = residual_autocovariance(*inputs.residuals, lag);
  // Observations in N_t are consecutive, so the restriction of the n x n
  // banded Toeplitz estimate is the m x m banded Toeplitz matrix.
  return band_covariance(coeffs, lag, m).matrix;
}

Vector pooled_residuals(const Dataset& data, const std::vector<double>& grid, const std::vector<Vector>& betas) {
  if (grid.empty() || grid.size() != betas.size()) throw DimensionError("pooled residuals: grid/betas mismatch");
  Vector out(data.n());
  std::size_t g = 0;
  for (Index i = 0; i < data.n(); ++i) {
    const double t = data.time(i);
    while (g + 1 < grid.size() && std::abs(grid[g + 1] - t) <= std::abs(grid[g] - t)) ++g;
    out(i) = data.y()(i) - data.X().row(i).dot(betas[g]);
  }
  return out;
}

Vector ar1_autocov(double phi, Index max_lag) {
  if (!(std::abs(phi) < 1.0)) throw ConfigError("AR(1) coefficient must lie in (-1, 1)");
  Vector out(max_lag + 1);
  const double var = 1.0 / (1.0 - phi * phi);
  double power = 1.0;
  for (Index k = 0; k <= max_lag; ++k) {
    out(k) = var * power;
    power *= phi;
  }
  return out;
}

Vector truncated_ma_autocov(double rho, Index truncation, Index max_lag) {
  Vector a(truncation + 1);
  for (Index m = 0; m <= truncation; ++m) a(m) = std::pow(static_cast<double>(m + 1), -rho);
  Vector out = Vector::Zero(max_lag + 1);
  for (Index k = 0; k <= std::min(max_lag, truncation); ++k)
    out(k) = a.head(truncation + 1 - k).dot(a.tail(truncation + 1 - k));
  return out;
}

}  // namespace tvinfer
