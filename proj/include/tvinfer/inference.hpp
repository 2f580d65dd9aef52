#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tvinfer/error_cov.hpp"
#include "tvinfer/estimator.hpp"
#include "tvinfer/lasso.hpp"
#include "tvinfer/local_design.hpp"
#include "tvinfer/rng.hpp"

namespace tvinfer {

struct InferenceConfig {
  double xi = 0.05;
  double zeta = 0.0;
  double alpha = 0.05;
  Index n_mc = 50000;
  std::uint64_t seed = 20240101;

  /// Throws on invalid values; warns when n_mc < 10,000.
  void validate() const;
};

/// Two-sided normal p-value 2 (1 - Phi(|z|)).
inline double two_sided_p(double z) { return std::erfc(std::abs(z) * 0.70710678118654752440); }

/// Monte-Carlo sample of min_j 2 (1 - Phi(|V_j| / sqrt(Omega_jj))),
/// V ~ N(0, Omega), sorted ascending. cdf() is the right-continuous ECDF.
class NullDistribution {
 public:
  NullDistribution() = default;
  explicit NullDistribution(std::vector<double> sample);

  double cdf(double z) const noexcept;
  Index size() const noexcept { return static_cast<Index>(sample_.size()); }
  const std::vector<double>& sample() const noexcept { return sample_; }

 private:
  std::vector<double> sample_;
};

/// Draws v = F_std g using the first `cov.factor.cols()` rows of `bank`,
/// parallel over blocks of draws.
NullDistribution estimate_null_distribution(const RidgeCovariance& cov, const NormalBank& bank);

/// Single-threaded reference of the above; bit-identical output.
NullDistribution estimate_null_distribution_serial(const RidgeCovariance& cov, const NormalBank& bank);

/// The common-random-number bank used for every null distribution drawn
/// under `cfg.seed`.
NormalBank make_null_bank(const InferenceConfig& cfg, Index rows);

/// Convenience: builds Omega(lambda2) and a private bank from cfg.seed.
NullDistribution estimate_null_distribution(const LocalDesign& design, const Matrix& sigma_et, double lambda2,
                                            const InferenceConfig& cfg);

struct RawPValues {
  Vector raw_p;
  Vector correction;  // lambda1^(1 - xi) max_{k != j} |(P_R)_jk|
};

/// Bias-corrected two-sided p-values; the standardized statistic is
/// clamped at zero so that every p-value is at most 1.
RawPValues raw_pvalues(const PointEstimate& estimate, const LocalDesign& design, const Vector& omega_diag,
                       double lambda1, double xi);

/// P_j = F(min(1, raw_j + zeta)).
Vector adjust_pvalues(const Vector& raw_p, const NullDistribution& null, double zeta);

/// How lambda1 is chosen for the tv-lasso. The default is the theory
/// rule lambda1 = 2 lambda0 for iid Gaussian errors.
struct LambdaRule {
  enum class Kind { fixed, theory, cv };
  Kind kind = Kind::theory;
  double value = 0.0;           // fixed
  PenaltyRegime regime;         // theory
  double multiplier = 2.0;      // theory: lambda1 = multiplier * lambda0
  std::optional<double> sigma;  // theory: known noise scale; otherwise IidKnown sigma or scaled lasso
  int cv_grid_size = 30;        // cv
  int cv_centre_count = 9;      // cv

  static LambdaRule fixed_value(double v) {
    LambdaRule r;
    r.kind = Kind::fixed;
    r.value = v;
    return r;
  }
  static LambdaRule theory(PenaltyRegime regime, double multiplier = 2.0) {
    LambdaRule r;
    r.kind = Kind::theory;
    r.regime = regime;
    r.multiplier = multiplier;
    return r;
  }
  static LambdaRule cross_validated() {
    LambdaRule r;
    r.kind = Kind::cv;
    return r;
  }
};

/// Everything test_pointwise needs besides the data.
struct PipelineConfig {
  KernelSpec kernel;
  LassoConfig lasso;
  LambdaRule lambda1;
  double lambda2 = 0.0;  // <= 0 selects 1/n
  ErrorCovModel error_model = IidEstimated{};
  InferenceConfig inference;
  double rank_tol = kDefaultRankTol;

  double resolved_lambda2(Index n) const { return lambda2 > 0.0 ? lambda2 : default_lambda2(n); }
  void validate(Index n) const;
};

struct PointwiseFit {
  PointEstimate estimate;
  double lambda1 = 0.0;
  std::optional<double> sigma_hat;
  Index local_size = 0;
  Index rank = 0;
  Vector omega_diag;
  Vector raw_p;
  Vector correction;
  Vector adj_p;
  std::vector<Index> rejected;
};

/// Shared per-path state handed to test_pointwise.
struct PointwiseContext {
  std::optional<double> lambda1;          // resolved penalty (cv / fixed)
  const Vector* residuals = nullptr;      // pooled residuals for banded models
  const NormalBank* bank = nullptr;       // common random numbers
  const Vector* warm_start = nullptr;     // lasso warm start
  const Vector* beta_tilde = nullptr;     // precomputed tv-lasso at this t
  bool serial = false;                    // use the serial reference kernels
};

/// Kernel weights -> local design -> SVD -> tv-lasso -> tv-ridge -> bias
/// correction -> Omega -> raw p-values -> null distribution -> adjustment.
/// Errors are rethrown as StageError naming the failing stage.
PointwiseFit test_pointwise(const Dataset& data, double t, const PipelineConfig& cfg,
                            const PointwiseContext& ctx = {});

/// The same pipeline from the SVD-equipped local design onwards; used for
/// windows that do not come from kernel_weights (e.g. one global window).
PointwiseFit test_design(const LocalDesign& design, const Dataset& data, const PipelineConfig& cfg,
                         const PointwiseContext& ctx = {});

struct PathResult {
  std::vector<double> grid;
  std::vector<std::optional<PointwiseFit>> fits;
  std::vector<std::string> errors;  // empty string where the fit succeeded
  std::optional<double> lambda1;    // shared penalty when not chosen per t

  Index failures() const;
};

/// Pointwise fits over `grid`, parallel over t. With fail_fast the first
/// (lowest-t) error is rethrown after all fits finish.
PathResult infer_path(const Dataset& data, const std::vector<double>& grid, const PipelineConfig& cfg,
                      bool fail_fast = false);

/// Single-threaded reference; identical results.
PathResult infer_path_serial(const Dataset& data, const std::vector<double>& grid, const PipelineConfig& cfg,
                             bool fail_fast = false);

}  // namespace tvinfer
