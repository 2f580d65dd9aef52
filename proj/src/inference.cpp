#include "tvinfer/inference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tvinfer/log.hpp"

namespace tvinfer {

namespace {

constexpr std::uint64_t kNullDomain = 0x6e756c6c;  // "null"
constexpr Index kDrawBlock = 1024;

bool theory_needs_sigma(const PipelineConfig& cfg) {
  return cfg.lambda1.kind == LambdaRule::Kind::theory && !cfg.lambda1.sigma &&
         !std::holds_alternative<IidKnown>(cfg.error_model);
}

double theory_lambda(const PipelineConfig& cfg, const LocalDesign& design, const std::optional<double>& sigma_hat) {
  double sigma = 0.0;
  if (cfg.lambda1.sigma) sigma = *cfg.lambda1.sigma;
  else if (const auto* known = std::get_if<IidKnown>(&cfg.error_model)) sigma = known->sigma;
  else sigma = sigma_hat.value();
  return recommend_lambda(cfg.lambda1.regime, design, std::max(sigma, kLambdaFloor), cfg.lambda1.multiplier).lambda1;
}

template <class F>
auto run_stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

// Rows of the covariance factor scaled to unit variance.
Matrix standardized_factor(const RidgeCovariance& cov, const NormalBank& bank) {
  const Index r = cov.factor.cols();
  if (bank.rows() < r)
    throw ConfigError("normal bank has " + std::to_string(bank.rows()) + " rows, need " + std::to_string(r));
  for (Index j = 0; j < cov.diag.size(); ++j)
    if (!(cov.diag(j) > 0.0))
      throw DegenerateVarianceError("Omega_jj is not positive for coordinate " + std::to_string(j), j);
  return cov.diag.cwiseSqrt().cwiseInverse().asDiagonal() * cov.factor;
}

void fill_block(const Matrix& scaled, const NormalBank& bank, Index start, Index count, std::vector<double>& out) {
  const Index r = scaled.cols();
  Matrix v;
  v.noalias() = scaled * bank.matrix().block(0, start, r, count);
  for (Index c = 0; c < count; ++c) {
    const double peak = r > 0 ? v.col(c).cwiseAbs().maxCoeff() : 0.0;
    out[static_cast<std::size_t>(start + c)] = two_sided_p(peak);
  }
}

}  // namespace

void InferenceConfig::validate() const {
  if (!(xi >= 0.0 && xi < 1.0)) throw ConfigError("xi must lie in [0, 1)");
  if (!(zeta >= 0.0)) throw ConfigError("zeta must be nonnegative");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (n_mc < 1000) throw ConfigError("n_mc must be at least 1000");
  if (n_mc < 10000) log_warning("n_mc = " + std::to_string(n_mc) + " is below 10,000; adjusted p-values are noisy");
}

NullDistribution::NullDistribution(std::vector<double> sample) : sample_(std::move(sample)) {
  std::sort(sample_.begin(), sample_.end());
}

double NullDistribution::cdf(double z) const noexcept {
  if (sample_.empty()) return 1.0;
  const auto it = std::upper_bound(sample_.begin(), sample_.end(), z);
  return static_cast<double>(it - sample_.begin()) / static_cast<double>(sample_.size());
}

NullDistribution estimate_null_distribution(const RidgeCovariance& cov, const NormalBank& bank) {
  const Matrix scaled = standardized_factor(cov, bank);
  const Index draws = bank.draws();
  std::vector<double> sample(static_cast<std::size_t>(draws));
  const Index blocks = (draws + kDrawBlock - 1) / kDrawBlock;
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < blocks; ++b) {
    const Index start = b * kDrawBlock;
    fill_block(scaled, bank, start, std::min(kDrawBlock, draws - start), sample);
  }
  return NullDistribution(std::move(sample));
}

NullDistribution estimate_null_distribution_serial(const RidgeCovariance& cov, const NormalBank& bank) {
  const Matrix scaled = standardized_factor(cov, bank);
  const Index draws = bank.draws();
  std::vector<double> sample(static_cast<std::size_t>(draws));
  for (Index start = 0; start < draws; start += kDrawBlock)
    fill_block(scaled, bank, start, std::min(kDrawBlock, draws - start), sample);
  return NullDistribution(std::move(sample));
}

NormalBank make_null_bank(const InferenceConfig& cfg, Index rows) {
  return NormalBank(stream_seed(cfg.seed, 0, kNullDomain), rows, cfg.n_mc);
}

NullDistribution estimate_null_distribution(const LocalDesign& design, const Matrix& sigma_et, double lambda2,
                                            const InferenceConfig& cfg) {
  cfg.validate();
  const RidgeCovariance cov = ridge_covariance(design, sigma_et, lambda2);
  return estimate_null_distribution(cov, make_null_bank(cfg, cov.factor.cols()));
}

RawPValues raw_pvalues(const PointEstimate& estimate, const LocalDesign& design, const Vector& omega_diag,
                       double lambda1, double xi) {
  if (!(lambda1 > 0.0)) throw ConfigError("lambda1 must be positive");
  if (!(xi >= 0.0 && xi < 1.0)) throw ConfigError("xi must lie in [0, 1)");
  const Index p = design.p();
  if (omega_diag.size() != p || estimate.beta_hat.size() != p) throw DimensionError("raw p-values: length mismatch");
  for (Index j = 0; j < p; ++j)
    if (!(omega_diag(j) > 0.0))
      throw DegenerateVarianceError("Omega_jj is not positive for coordinate " + std::to_string(j), j);

  RawPValues out;
  out.correction = std::pow(lambda1, 1.0 - xi) * design.max_offdiag_projection();
  out.raw_p.resize(p);
  for (Index j = 0; j < p; ++j) {
    const double stat = std::max(0.0, (std::abs(estimate.beta_hat(j)) - out.correction(j)) / std::sqrt(omega_diag(j)));
    out.raw_p(j) = two_sided_p(stat);
  }
  return out;
}

Vector adjust_pvalues(const Vector& raw_p, const NullDistribution& null, double zeta) {
  Vector out(raw_p.size());
  for (Index j = 0; j < raw_p.size(); ++j) out(j) = null.cdf(std::min(1.0, raw_p(j) + zeta));
  return out;
}

void PipelineConfig::validate(Index n) const {
  kernel.validate(n);
  lasso.validate();
  inference.validate();
  tvinfer::validate(error_model);
  if (lambda1.kind == LambdaRule::Kind::fixed && !(lambda1.value > 0.0))
    throw ConfigError("fixed lambda1 must be positive");
  if (lambda1.kind == LambdaRule::Kind::theory) {
    lambda1.regime.validate();
    if (lambda1.sigma && !(*lambda1.sigma > 0.0)) throw ConfigError("theory-rule sigma must be positive");
  }
  if (lambda1.kind == LambdaRule::Kind::cv && (lambda1.cv_grid_size < 1 || lambda1.cv_centre_count < 1))
    throw ConfigError("cross-validation grid and centre counts must be positive");
  if (!(rank_tol > 0.0)) throw ConfigError("rank tolerance must be positive");
}

PointwiseFit test_pointwise(const Dataset& data, double t, const PipelineConfig& cfg, const PointwiseContext& ctx) {
  const Neighborhood nb = run_stage("kernel_weights", [&] { return kernel_weights(cfg.kernel, t, data.n()); });
  const LocalDesign design = run_stage("local_design", [&] {
    return svd_projection(build_local_design(data, nb), cfg.rank_tol);
  });
  return test_design(design, data, cfg, ctx);
}

PointwiseFit test_design(const LocalDesign& design, const Dataset& data, const PipelineConfig& cfg,
                         const PointwiseContext& ctx) {
  const double lambda2 = cfg.resolved_lambda2(data.n());
  const double t = design.t();
  PointwiseFit fit;
  fit.local_size = design.local_size();
  fit.rank = design.rank();

  const bool wants_sigma = std::holds_alternative<IidEstimated>(cfg.error_model) ||
                           (!ctx.lambda1 && theory_needs_sigma(cfg));
  if (wants_sigma)
    fit.sigma_hat = run_stage("scaled_lasso", [&] { return scaled_lasso_sigma(design, cfg.lasso).sigma; });

  fit.lambda1 = run_stage("lambda1", [&] {
    if (ctx.lambda1) return *ctx.lambda1;
    switch (cfg.lambda1.kind) {
      case LambdaRule::Kind::fixed: return cfg.lambda1.value;
      case LambdaRule::Kind::theory: return theory_lambda(cfg, design, fit.sigma_hat);
      case LambdaRule::Kind::cv: break;
    }
    const std::vector<double> centres{t};
    return cross_validate_lambda1(data, cfg.kernel,
                                  default_lambda_grid(data, cfg.kernel, centres, cfg.lambda1.cv_grid_size), cfg.lasso,
                                  centres);
  });

  const Vector beta_tilde = run_stage("lasso", [&] {
    if (ctx.beta_tilde) return *ctx.beta_tilde;
    return weighted_lasso(design, fit.lambda1, cfg.lasso, ctx.warm_start).beta;
  });
  fit.estimate = run_stage("estimator", [&] { return bias_correct(tv_ridge(design, lambda2), beta_tilde, design); });

  const RidgeCovariance cov = run_stage("error_cov", [&] {
    ErrorCovInputs inputs;
    inputs.residuals = ctx.residuals;
    inputs.sigma_hat = fit.sigma_hat;
    inputs.lasso = cfg.lasso;
    return ridge_covariance(design, build_sigma_et(cfg.error_model, design, inputs), lambda2);
  });
  fit.omega_diag = cov.diag;

  RawPValues raw =
      run_stage("raw_pvalues", [&] { return raw_pvalues(fit.estimate, design, cov.diag, fit.lambda1, cfg.inference.xi); });
  fit.raw_p = std::move(raw.raw_p);
  fit.correction = std::move(raw.correction);

  const NullDistribution null = run_stage("null_distribution", [&] {
    if (ctx.bank) return ctx.serial ? estimate_null_distribution_serial(cov, *ctx.bank)
                                    : estimate_null_distribution(cov, *ctx.bank);
    const NormalBank bank = make_null_bank(cfg.inference, cov.factor.cols());
    return ctx.serial ? estimate_null_distribution_serial(cov, bank) : estimate_null_distribution(cov, bank);
  });
  fit.adj_p = adjust_pvalues(fit.raw_p, null, cfg.inference.zeta);
  for (Index j = 0; j < fit.adj_p.size(); ++j)
    if (fit.adj_p(j) <= cfg.inference.alpha) fit.rejected.push_back(j);
  return fit;
}

Index PathResult::failures() const {
  return static_cast<Index>(std::count_if(errors.begin(), errors.end(), [](const std::string& e) { return !e.empty(); }));
}

namespace {

PathResult run_path(const Dataset& data, const std::vector<double>& grid, const PipelineConfig& cfg, bool fail_fast,
                    bool parallel) {
  cfg.validate(data.n());
  if (grid.empty()) throw ConfigError("time grid is empty");
  for (double t : grid)
    if (!in_interior(cfg.kernel, t))
      throw BoundaryError("grid point " + std::to_string(t) + " lies outside the interior");

  PathResult result;
  result.grid = grid;
  const auto G = grid.size();
  result.fits.resize(G);
  result.errors.resize(G);

  if (cfg.lambda1.kind == LambdaRule::Kind::fixed) result.lambda1 = cfg.lambda1.value;
  if (cfg.lambda1.kind == LambdaRule::Kind::cv) {
    result.lambda1 = run_stage("cross_validation", [&] {
      const auto centres = cv_centres(cfg.kernel, data.n(), cfg.lambda1.cv_centre_count);
      return cross_validate_lambda1(data, cfg.kernel,
                                    default_lambda_grid(data, cfg.kernel, centres, cfg.lambda1.cv_grid_size),
                                    cfg.lasso, centres);
    });
  }

  Index bank_rows = 0;
  for (double t : grid) bank_rows = std::max(bank_rows, std::min(kernel_weights(cfg.kernel, t, data.n()).size(), data.p()));
  const NormalBank bank = make_null_bank(cfg.inference, bank_rows);

  // Banded models need residuals pooled from a first lasso pass.
  std::vector<Vector> betas;
  Vector residuals;
  if (needs_residuals(cfg.error_model)) {
    betas.resize(G);
    std::vector<std::string> pass_errors(G);
    auto first_pass = [&](std::size_t k) {
      try {
        const LocalDesign design = build_local_design(data, kernel_weights(cfg.kernel, grid[k], data.n()));
        double lambda1 = 0.0;
        if (result.lambda1) {
          lambda1 = *result.lambda1;
        } else {
          std::optional<double> sigma_hat;
          if (theory_needs_sigma(cfg)) sigma_hat = scaled_lasso_sigma(design, cfg.lasso).sigma;
          lambda1 = theory_lambda(cfg, design, sigma_hat);
        }
        betas[k] = weighted_lasso(design, lambda1, cfg.lasso).beta;
      } catch (const Error& e) {
        pass_errors[k] = e.what();
      }
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
      for (std::size_t k = 0; k < G; ++k) first_pass(k);
    } else {
      for (std::size_t k = 0; k < G; ++k) first_pass(k);
    }
    for (const auto& e : pass_errors)
      if (!e.empty()) throw StageError("residuals", NumericalError(e));
    residuals = pooled_residuals(data, grid, betas);
  }

  auto one = [&](std::size_t k) {
    PointwiseContext ctx;
    ctx.lambda1 = result.lambda1;
    ctx.bank = &bank;
    ctx.serial = !parallel;
    if (!betas.empty()) {
      ctx.residuals = &residuals;
      ctx.beta_tilde = &betas[k];
    }
    try {
      result.fits[k] = test_pointwise(data, grid[k], cfg, ctx);
    } catch (const Error& e) {
      result.errors[k] = e.what();
    }
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::size_t k = 0; k < G; ++k) one(k);
  } else {
    for (std::size_t k = 0; k < G; ++k) one(k);
  }

  if (fail_fast)
    for (std::size_t k = 0; k < G; ++k)
      if (!result.errors[k].empty())
        throw NumericalError("t = " + std::to_string(grid[k]) + ": " + result.errors[k]);
  return result;
}

}  // namespace

PathResult infer_path(const Dataset& data, const std::vector<double>& grid, const PipelineConfig& cfg, bool fail_fast) {
  return run_path(data, grid, cfg, fail_fast, true);
}

PathResult infer_path_serial(const Dataset& data, const std::vector<double>& grid, const PipelineConfig& cfg,
                             bool fail_fast) {
  return run_path(data, grid, cfg, fail_fast, false);
}

}  // namespace tvinfer
