#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "tvinfer/inference.hpp"

namespace tvinfer {

struct DesignSpec {
  enum class Kind { identity, toeplitz };
  Kind kind = Kind::identity;
  double r = 0.5;  // toeplitz: Sigma_jk = r^|j-k|
};

struct ErrorProcess {
  enum class Kind { iid_normal, ar1, t3_scaled, lrd };
  Kind kind = Kind::iid_normal;
  double phi = 0.5;                 // ar1
  double rho = 0.75;                // lrd decay exponent
  Index lrd_truncation = 100000;    // lrd MA order
  double scale = 1.0;               // multiplies every error

  void validate() const;
};

enum class Method { proposed, tv_lasso, fp_lasso, non_tv };

std::string_view method_name(Method m) noexcept;
Method parse_method(std::string_view name);
DesignSpec parse_design(std::string_view name, double r = 0.5);
ErrorProcess parse_error_process(std::string_view name);
std::string design_name(const DesignSpec& d);
std::string error_process_name(const ErrorProcess& e);

/// Which error covariance the proposed and Non-TV methods are given.
/// oracle: the true covariance of the generated errors.
/// estimated: scaled-lasso sigma for iid processes, banded estimate (h = h*) otherwise.
enum class CovarianceChoice { oracle, estimated };

struct SimulationConfig {
  Index n = 200;
  Index p = 100;
  Index s = 3;
  DesignSpec design;
  ErrorProcess error;
  Index n_knots = 6;
  KernelKind kernel = KernelKind::uniform;
  double bandwidth = 0.1;
  Index replications = 100;
  double alpha = 0.05;
  std::uint64_t seed = 20240101;
  std::vector<Method> methods{Method::proposed};

  double xi = 0.05;
  double zeta = 0.0;
  Index n_mc = 50000;
  double lambda2 = 0.0;  // <= 0 selects 1/n
  std::optional<LambdaRule> lambda1;  // proposed method; default: theory rule for the error process
  LassoConfig lasso;
  CovarianceChoice covariance = CovarianceChoice::oracle;
  double band_constant = 1.0;

  Index fp_calibration = 20;                // FP-Lasso calibration replications
  std::optional<double> fp_target;          // defaults to the proposed method's FWER
  double fp_tolerance = 0.005;
  int fp_steps = 20;

  void validate() const;
  bool has(Method m) const;
  KernelSpec kernel_spec() const { return {kernel, bandwidth}; }
};

/// Design with iid N(0, Sigma_X) rows.
Matrix gen_design(Index n, Index p, const DesignSpec& spec, std::uint64_t seed);

struct CoefficientPath {
  Matrix beta;                  // n x p; row i is beta(t_i)
  std::vector<Index> support;   // ascending
};

/// Natural cubic spline through equally spaced knots on [0, 1] (linear for
/// two knots), evaluated at t_i = i / n, i = 1..n.
Vector spline_path(const std::vector<double>& knot_values, Index n);

/// s support columns chosen uniformly; each follows a spline through
/// n_knots U(-2.5, 2.5) values.
CoefficientPath gen_coefficients(Index n, Index p, Index s, Index n_knots, std::uint64_t seed);

Vector gen_errors(const ErrorProcess& process, Index n, std::uint64_t seed);

/// Omitted share of the LRD variance, sum_{m > M} (m+1)^-2rho / zeta(2 rho).
double lrd_tail_ratio(double rho, Index truncation);

/// Penalty regime matching the error process: iid and t3 (q = 2.5) use the
/// iid and heavy-tail rules, AR(1) the short-range rule with |a|_1 = 1/(1-|phi|),
/// long memory the long-range rule with n.
PenaltyRegime regime_for(const ErrorProcess& process, Index n);

/// Covariance model matching the generated errors.
ErrorCovModel oracle_error_model(const ErrorProcess& process, Index n);

struct SimulatedData {
  Dataset data;
  CoefficientPath truth;
};

SimulatedData simulate_dataset(const SimulationConfig& cfg, std::uint64_t replication);

/// Raw error counts for one method; merge() is associative.
struct MethodCounts {
  std::int64_t false_positives = 0;   // over t, j in S^c
  std::int64_t negatives = 0;         // number of (t, j in S^c) cells
  std::int64_t false_negatives = 0;   // over t, j in S
  std::int64_t positives = 0;
  std::int64_t family_errors = 0;     // (t, m) with any S^c rejection
  std::int64_t families = 0;
  double squared_error = 0.0;
  std::int64_t coefficients = 0;

  void merge(const MethodCounts& other);
  double fpr() const;
  double fnr() const;
  double fwer() const;
  double rmse() const;
};

/// Scores one replication. `rejected[g]` is the rejection set at
/// grid[g]; `estimates[g]` the coefficient estimate there (may be empty to
/// skip the RMSE contribution).
MethodCounts score_rejections(const std::vector<std::vector<Index>>& rejected, const std::vector<Vector>& estimates,
                              const std::vector<Index>& grid_rows, const CoefficientPath& truth);

struct MethodMetrics {
  Method method;
  double fpr = 0.0, fnr = 0.0, fwer = 0.0, rmse = 0.0;
  MethodCounts counts;
};

struct MetricsReport {
  SimulationConfig config;
  Index grid_size = 0;
  std::vector<MethodMetrics> methods;
  Index completed = 0;
  Index failed = 0;
  std::vector<std::string> failures;  // "replication k: message"
  std::optional<double> fp_lambda1;
  std::optional<double> fp_calibration_fwer;
  std::optional<double> lrd_tail_ratio;
  double runtime_seconds = 0.0;

  const MethodMetrics* find(Method m) const;
  void write_csv(std::ostream& os) const;
  void write_table(std::ostream& os) const;
};

/// Interior grid rows: indices i with t_i in [b, 1-b].
std::vector<Index> grid_rows(const KernelSpec& spec, Index n);

/// Support of the tv-lasso at a fixed lambda1 on every grid point.
std::vector<std::vector<Index>> method_tv_lasso(const Dataset& data, const KernelSpec& spec,
                                                const std::vector<double>& grid, double lambda1,
                                                const LassoConfig& cfg, std::vector<Vector>* betas = nullptr);

/// Bisection over log lambda1 on the calibration replications until the
/// support-based FWER is within tolerance of target. Returns lambda1 and the
/// achieved calibration FWER.
std::pair<double, double> method_fp_lasso(const SimulationConfig& cfg, double target_fwer);

/// Pipeline on a single global window (w_i = 1/n) with lambda1 = 2 sqrt(2 log p / n).
PointwiseFit method_non_tv(const Dataset& data, const PipelineConfig& cfg);

MetricsReport run_simulation(const SimulationConfig& cfg);
MetricsReport run_simulation_serial(const SimulationConfig& cfg);

}  // namespace tvinfer
