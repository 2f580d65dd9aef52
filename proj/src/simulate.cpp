#include "tvinfer/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_zeta.h>
#include <gsl/gsl_spline.h>

#include "tvinfer/csv.hpp"
#include "tvinfer/log.hpp"

namespace tvinfer {

namespace {

constexpr std::uint64_t kReplicationDomain = 0x7265706c;  // "repl"
constexpr std::uint64_t kDesignStream = 1;
constexpr std::uint64_t kCoefStream = 2;
constexpr std::uint64_t kErrorStream = 3;

bool is_dependent(const ErrorProcess& e) {
  return e.kind == ErrorProcess::Kind::ar1 || e.kind == ErrorProcess::Kind::lrd;
}

}  // namespace

void ErrorProcess::validate() const {
  if (!(scale > 0.0)) throw ConfigError("error scale must be positive");
  if (kind == Kind::ar1 && !(std::abs(phi) < 1.0)) throw ConfigError("AR(1) phi must lie in (-1, 1)");
  if (kind == Kind::lrd) {
    if (!(rho > 0.5 && rho < 1.0)) throw ConfigError("long-memory exponent must lie in (1/2, 1)");
    if (lrd_truncation < 1) throw ConfigError("long-memory truncation must be positive");
  }
}

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::proposed: return "proposed";
    case Method::tv_lasso: return "tv_lasso";
    case Method::fp_lasso: return "fp_lasso";
    case Method::non_tv: return "non_tv";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::proposed, Method::tv_lasso, Method::fp_lasso, Method::non_tv})
    if (name == method_name(m)) return m;
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

DesignSpec parse_design(std::string_view name, double r) {
  if (name == "identity") return {DesignSpec::Kind::identity, r};
  if (name == "toeplitz") return {DesignSpec::Kind::toeplitz, r};
  throw ConfigError("unknown design '" + std::string(name) + "'");
}

ErrorProcess parse_error_process(std::string_view name) {
  ErrorProcess e;
  if (name == "iid_normal") e.kind = ErrorProcess::Kind::iid_normal;
  else if (name == "ar1") e.kind = ErrorProcess::Kind::ar1;
  else if (name == "t3_scaled") e.kind = ErrorProcess::Kind::t3_scaled;
  else if (name == "lrd") e.kind = ErrorProcess::Kind::lrd;
  else throw ConfigError("unknown error process '" + std::string(name) + "'");
  return e;
}

std::string design_name(const DesignSpec& d) {
  return d.kind == DesignSpec::Kind::identity ? "identity" : "toeplitz(" + format_double(d.r) + ")";
}

std::string error_process_name(const ErrorProcess& e) {
  switch (e.kind) {
    case ErrorProcess::Kind::iid_normal: return "iid_normal";
    case ErrorProcess::Kind::ar1: return "ar1(" + format_double(e.phi) + ")";
    case ErrorProcess::Kind::t3_scaled: return "t3_scaled";
    case ErrorProcess::Kind::lrd: return "lrd(" + format_double(e.rho) + ")";
  }
  return "?";
}

void SimulationConfig::validate() const {
  if (n < 2 || p < 1) throw ConfigError("simulation needs n >= 2 and p >= 1");
  if (s < 0 || s > p) throw ConfigError("sparsity s must lie in [0, p]");
  if (replications < 1) throw ConfigError("replication count must be at least 1");
  if (n_knots < 2) throw ConfigError("spline needs at least 2 knots");
  if (design.kind == DesignSpec::Kind::toeplitz && !(std::abs(design.r) < 1.0))
    throw ConfigError("toeplitz r must lie in (-1, 1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (methods.empty()) throw ConfigError("no methods selected");
  error.validate();
  kernel_spec().validate(n);
  lasso.validate();
  InferenceConfig inf{xi, zeta, alpha, n_mc, seed};
  inf.validate();
  if (has(Method::fp_lasso)) {
    if (fp_calibration < 1) throw ConfigError("FP-Lasso needs at least one calibration replication");
    if (fp_steps < 1) throw ConfigError("FP-Lasso needs at least one bisection step");
    if (!fp_target && !has(Method::proposed))
      throw ConfigError("FP-Lasso needs the proposed method or an explicit target FWER");
  }
}

bool SimulationConfig::has(Method m) const { return std::find(methods.begin(), methods.end(), m) != methods.end(); }

Matrix gen_design(Index n, Index p, const DesignSpec& spec, std::uint64_t seed) {
  Engine eng = make_engine(seed, 0);
  std::normal_distribution<double> normal;
  Matrix X(n, p);
  if (spec.kind == DesignSpec::Kind::identity) {
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < p; ++j) X(i, j) = normal(eng);
    return X;
  }
  // AR(1) recursion across columns: the bidiagonal inverse Cholesky factor
  // of the Toeplitz matrix r^|j-k|.
  const double r = spec.r, innov = std::sqrt(1.0 - r * r);
  for (Index i = 0; i < n; ++i) {
    X(i, 0) = normal(eng);
    for (Index j = 1; j < p; ++j) X(i, j) = r * X(i, j - 1) + innov * normal(eng);
  }
  return X;
}

Vector spline_path(const std::vector<double>& knot_values, Index n) {
  const auto k = knot_values.size();
  if (k < 2) throw ConfigError("spline needs at least 2 knots");
  std::vector<double> knots(k);
  for (std::size_t j = 0; j < k; ++j) knots[j] = static_cast<double>(j) / static_cast<double>(k - 1);
  Vector out(n);
  const gsl_interp_type* type = k >= 3 ? gsl_interp_cspline : gsl_interp_linear;
  gsl_spline* spline = gsl_spline_alloc(type, k);
  gsl_interp_accel* acc = gsl_interp_accel_alloc();
  gsl_spline_init(spline, knots.data(), knot_values.data(), k);
  for (Index i = 0; i < n; ++i) {
    const double t = std::min(1.0, static_cast<double>(i + 1) / static_cast<double>(n));
    out(i) = gsl_spline_eval(spline, t, acc);
  }
  gsl_interp_accel_free(acc);
  gsl_spline_free(spline);
  return out;
}

CoefficientPath gen_coefficients(Index n, Index p, Index s, Index n_knots, std::uint64_t seed) {
  if (s < 0 || s > p) throw ConfigError("sparsity s must lie in [0, p]");
  Engine eng = make_engine(seed, 0);
  std::vector<Index> cols(static_cast<std::size_t>(p));
  std::iota(cols.begin(), cols.end(), Index{0});
  for (Index k = 0; k < s; ++k) {
    std::uniform_int_distribution<Index> pick(k, p - 1);
    std::swap(cols[static_cast<std::size_t>(k)], cols[static_cast<std::size_t>(pick(eng))]);
  }
  CoefficientPath out;
  out.support.assign(cols.begin(), cols.begin() + s);
  std::sort(out.support.begin(), out.support.end());
  out.beta = Matrix::Zero(n, p);
  std::uniform_real_distribution<double> node(-2.5, 2.5);
  for (Index j : out.support) {
    std::vector<double> values(static_cast<std::size_t>(n_knots));
    for (auto& v : values) v = node(eng);
    out.beta.col(j) = spline_path(values, n);
  }
  return out;
}

Vector gen_errors(const ErrorProcess& process, Index n, std::uint64_t seed) {
  process.validate();
  Engine eng = make_engine(seed, 0);
  std::normal_distribution<double> normal;
  Vector e(n);
  switch (process.kind) {
    case ErrorProcess::Kind::iid_normal:
      for (Index i = 0; i < n; ++i) e(i) = normal(eng);
      break;
    case ErrorProcess::Kind::ar1: {
      const double phi = process.phi;
      e(0) = normal(eng) / std::sqrt(1.0 - phi * phi);
      for (Index i = 1; i < n; ++i) e(i) = phi * e(i - 1) + normal(eng);
      break;
    }
    case ErrorProcess::Kind::t3_scaled: {
      std::student_t_distribution<double> t3(3.0);
      for (Index i = 0; i < n; ++i) e(i) = t3(eng) / std::sqrt(3.0);
      break;
    }
    case ErrorProcess::Kind::lrd: {
      const Index M = process.lrd_truncation;
      Vector a(M + 1);
      for (Index m = 0; m <= M; ++m) a(m) = std::pow(static_cast<double>(m + 1), -process.rho);
      // xi(k) is the innovation at time k - M.
      Vector xi(n + M);
      for (Index k = 0; k < n + M; ++k) xi(k) = normal(eng);
      for (Index i = 0; i < n; ++i) e(i) = a.dot(xi.segment(i, M + 1).reverse());
      break;
    }
  }
  return process.scale * e;
}

double lrd_tail_ratio(double rho, Index truncation) {
  const double s = 2.0 * rho;
  double head = 0.0;
  for (Index m = truncation; m >= 0; --m) head += std::pow(static_cast<double>(m + 1), -s);
  const double total = gsl_sf_zeta(s);
  return std::max(0.0, (total - head) / total);
}

PenaltyRegime regime_for(const ErrorProcess& process, Index n) {
  switch (process.kind) {
    case ErrorProcess::Kind::iid_normal: return PenaltyRegime::iid();
    case ErrorProcess::Kind::t3_scaled: return PenaltyRegime::heavy(2.5);
    case ErrorProcess::Kind::ar1: return PenaltyRegime::short_range(1.0 / (1.0 - std::abs(process.phi)));
    case ErrorProcess::Kind::lrd: return PenaltyRegime::long_range(process.rho, 4.0, n);
  }
  return PenaltyRegime::iid();
}

ErrorCovModel oracle_error_model(const ErrorProcess& process, Index n) {
  const double s2 = process.scale * process.scale;
  switch (process.kind) {
    case ErrorProcess::Kind::iid_normal:
    case ErrorProcess::Kind::t3_scaled:
      return IidKnown{process.scale};
    case ErrorProcess::Kind::ar1:
      return KnownStationary{s2 * ar1_autocov(process.phi, n - 1)};
    case ErrorProcess::Kind::lrd:
      return KnownStationary{s2 * truncated_ma_autocov(process.rho, process.lrd_truncation, n - 1)};
  }
  return IidKnown{};
}

SimulatedData simulate_dataset(const SimulationConfig& cfg, std::uint64_t replication) {
  const std::uint64_t seed = stream_seed(cfg.seed, replication, kReplicationDomain);
  Matrix X = gen_design(cfg.n, cfg.p, cfg.design, stream_seed(seed, kDesignStream));
  CoefficientPath truth = gen_coefficients(cfg.n, cfg.p, cfg.s, cfg.n_knots, stream_seed(seed, kCoefStream));
  const Vector e = gen_errors(cfg.error, cfg.n, stream_seed(seed, kErrorStream));
  Vector y = (X.array() * truth.beta.array()).rowwise().sum().matrix() + e;
  return {Dataset(std::move(X), std::move(y)), std::move(truth)};
}

void MethodCounts::merge(const MethodCounts& o) {
  false_positives += o.false_positives;
  negatives += o.negatives;
  false_negatives += o.false_negatives;
  positives += o.positives;
  family_errors += o.family_errors;
  families += o.families;
  squared_error += o.squared_error;
  coefficients += o.coefficients;
}

namespace {
double ratio(std::int64_t a, std::int64_t b) { return b > 0 ? static_cast<double>(a) / static_cast<double>(b) : 0.0; }
}  // namespace

double MethodCounts::fpr() const { return ratio(false_positives, negatives); }
double MethodCounts::fnr() const { return ratio(false_negatives, positives); }
double MethodCounts::fwer() const { return ratio(family_errors, families); }
double MethodCounts::rmse() const {
  return coefficients > 0 ? std::sqrt(squared_error / static_cast<double>(coefficients)) : 0.0;
}

MethodCounts score_rejections(const std::vector<std::vector<Index>>& rejected, const std::vector<Vector>& estimates,
                              const std::vector<Index>& rows, const CoefficientPath& truth) {
  if (rejected.size() != rows.size()) throw DimensionError("score: one rejection set per grid point expected");
  const Index p = truth.beta.cols();
  MethodCounts c;
  std::vector<char> hit(static_cast<std::size_t>(p));
  for (std::size_t g = 0; g < rows.size(); ++g) {
    std::fill(hit.begin(), hit.end(), 0);
    for (Index j : rejected[g]) hit[static_cast<std::size_t>(j)] = 1;
    const auto beta = truth.beta.row(rows[g]);
    bool family_error = false;
    for (Index j = 0; j < p; ++j) {
      const bool active = beta(j) != 0.0, flagged = hit[static_cast<std::size_t>(j)] != 0;
      if (active) {
        ++c.positives;
        if (!flagged) ++c.false_negatives;
      } else {
        ++c.negatives;
        if (flagged) {
          ++c.false_positives;
          family_error = true;
        }
      }
    }
    ++c.families;
    if (family_error) ++c.family_errors;
    if (g < estimates.size() && estimates[g].size() == p) {
      c.squared_error += (estimates[g].transpose() - beta).squaredNorm();
      c.coefficients += p;
    }
  }
  return c;
}

std::vector<Index> grid_rows(const KernelSpec& spec, Index n) {
  std::vector<Index> rows;
  for (double t : interior_grid(spec, n)) rows.push_back(static_cast<Index>(std::llround(t * static_cast<double>(n))) - 1);
  return rows;
}

namespace {

std::vector<Index> nonzero(const Vector& b) {
  std::vector<Index> out;
  for (Index j = 0; j < b.size(); ++j)
    if (b(j) != 0.0) out.push_back(j);
  return out;
}

std::vector<double> times(const std::vector<Index>& rows, Index n) {
  std::vector<double> out;
  for (Index i : rows) out.push_back(static_cast<double>(i + 1) / static_cast<double>(n));
  return out;
}

PipelineConfig pipeline_for(const SimulationConfig& cfg, std::uint64_t replication) {
  PipelineConfig pc;
  pc.kernel = cfg.kernel_spec();
  pc.lasso = cfg.lasso;
  if (cfg.lambda1) {
    pc.lambda1 = *cfg.lambda1;
  } else {
    pc.lambda1 = LambdaRule::theory(regime_for(cfg.error, cfg.n));
    // The oracle knows the innovation scale.
    if (cfg.covariance == CovarianceChoice::oracle) pc.lambda1.sigma = cfg.error.scale;
  }
  pc.lambda2 = cfg.lambda2;
  pc.inference = InferenceConfig{cfg.xi, cfg.zeta, cfg.alpha, cfg.n_mc,
                                 stream_seed(cfg.seed, replication, kReplicationDomain)};
  if (cfg.covariance == CovarianceChoice::oracle) {
    pc.error_model = oracle_error_model(cfg.error, cfg.n);
  } else if (is_dependent(cfg.error)) {
    BandedEstimate band;
    band.rho = cfg.error.kind == ErrorProcess::Kind::lrd ? cfg.error.rho : 1.0;
    band.constant = cfg.band_constant;
    pc.error_model = band;
  } else {
    pc.error_model = IidEstimated{};
  }
  return pc;
}

}  // namespace

std::vector<std::vector<Index>> method_tv_lasso(const Dataset& data, const KernelSpec& spec,
                                                const std::vector<double>& grid, double lambda1,
                                                const LassoConfig& cfg, std::vector<Vector>* betas) {
  std::vector<std::vector<Index>> out;
  out.reserve(grid.size());
  if (betas) betas->clear();
  Vector warm;
  for (double t : grid) {
    const LocalDesign design = build_local_design(data, kernel_weights(spec, t, data.n()));
    LassoFit fit = weighted_lasso(design, lambda1, cfg, warm.size() ? &warm : nullptr);
    out.push_back(nonzero(fit.beta));
    warm = fit.beta;
    if (betas) betas->push_back(std::move(fit.beta));
  }
  return out;
}

PointwiseFit method_non_tv(const Dataset& data, const PipelineConfig& cfg) {
  const Index n = data.n();
  Neighborhood global;
  global.t = 0.5;
  global.indices.resize(static_cast<std::size_t>(n));
  std::iota(global.indices.begin(), global.indices.end(), Index{0});
  global.weights = Vector::Constant(n, 1.0 / static_cast<double>(n));
  const LocalDesign design = svd_projection(build_local_design(data, global), cfg.rank_tol);
  PipelineConfig global_cfg = cfg;
  const double p = static_cast<double>(data.p());
  global_cfg.lambda1 =
      LambdaRule::fixed_value(2.0 * std::sqrt(2.0 * std::log(std::max(p, 2.0)) / static_cast<double>(n)));
  return test_design(design, data, global_cfg);
}

std::pair<double, double> method_fp_lasso(const SimulationConfig& cfg, double target_fwer) {
  const KernelSpec spec = cfg.kernel_spec();
  const std::vector<Index> rows = grid_rows(spec, cfg.n);
  const std::vector<double> grid = times(rows, cfg.n);
  const Index C = cfg.fp_calibration;

  // Calibration replications follow the evaluation ones.
  std::vector<SimulatedData> batch;
  batch.reserve(static_cast<std::size_t>(C));
  for (Index c = 0; c < C; ++c)
    batch.push_back(simulate_dataset(cfg, static_cast<std::uint64_t>(cfg.replications + c)));

  double top = 0.0;
  for (const auto& sim : batch)
    for (double t : grid)
      top = std::max(top, lambda_max(build_local_design(sim.data, kernel_weights(spec, t, cfg.n))));
  if (!(top > 0.0)) throw NumericalError("FP-Lasso calibration: all local designs are degenerate");

  auto fwer_at = [&](double lambda1) {
    std::vector<std::int64_t> errors(static_cast<std::size_t>(C), 0);
#pragma omp parallel for schedule(dynamic)
    for (Index c = 0; c < C; ++c) {
      const auto& sim = batch[static_cast<std::size_t>(c)];
      const auto support = method_tv_lasso(sim.data, spec, grid, lambda1, cfg.lasso);
      errors[static_cast<std::size_t>(c)] = score_rejections(support, {}, rows, sim.truth).family_errors;
    }
    const auto total = std::accumulate(errors.begin(), errors.end(), std::int64_t{0});
    return static_cast<double>(total) / static_cast<double>(C * static_cast<Index>(rows.size()));
  };

  // FWER falls as lambda1 grows; search log lambda1 in [1e-4 top, top].
  double lo = std::log(top * 1e-4), hi = std::log(top);
  double best = top, best_fwer = fwer_at(top);
  for (int step = 0; step < cfg.fp_steps; ++step) {
    const double mid = 0.5 * (lo + hi);
    const double f = fwer_at(std::exp(mid));
    if (f <= target_fwer + cfg.fp_tolerance) {
      best = std::exp(mid);
      best_fwer = f;
      hi = mid;
    } else {
      lo = mid;
    }
    if (std::abs(f - target_fwer) <= cfg.fp_tolerance) break;
  }
  return {best, best_fwer};
}

namespace {

struct ReplicationResult {
  std::vector<MethodCounts> counts;  // aligned with cfg.methods
  std::string error;
};

ReplicationResult run_replication(const SimulationConfig& cfg, Index m, const std::optional<double>& fp_lambda1,
                                  bool fp_only) {
  ReplicationResult out;
  out.counts.resize(cfg.methods.size());
  try {
    const SimulatedData sim = simulate_dataset(cfg, static_cast<std::uint64_t>(m));
    const KernelSpec spec = cfg.kernel_spec();
    const std::vector<Index> rows = grid_rows(spec, cfg.n);
    const std::vector<double> grid = times(rows, cfg.n);
    const PipelineConfig pc = pipeline_for(cfg, static_cast<std::uint64_t>(m));

    std::optional<PathResult> path;
    if (!fp_only && cfg.has(Method::proposed)) path = infer_path_serial(sim.data, grid, pc, true);
    for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
      const Method method = cfg.methods[k];
      std::vector<std::vector<Index>> rejected;
      std::vector<Vector> estimates;
      if (method == Method::fp_lasso) {
        if (!fp_only) continue;
        rejected = method_tv_lasso(sim.data, spec, grid, *fp_lambda1, cfg.lasso, &estimates);
      } else if (fp_only) {
        continue;
      } else if (method == Method::non_tv) {
        const PointwiseFit fit = method_non_tv(sim.data, pc);
        rejected.assign(grid.size(), fit.rejected);
        estimates.assign(grid.size(), fit.estimate.beta_hat);
      } else if (method == Method::tv_lasso) {
        const auto centres = cv_centres(spec, cfg.n);
        const double lambda1 = cross_validate_lambda1(sim.data, spec, default_lambda_grid(sim.data, spec, centres),
                                                      cfg.lasso, centres);
        rejected = method_tv_lasso(sim.data, spec, grid, lambda1, cfg.lasso, &estimates);
      } else {
        for (const auto& fit : path->fits) {
          rejected.push_back(fit->rejected);
          estimates.push_back(fit->estimate.beta_hat);
        }
      }
      out.counts[k] = score_rejections(rejected, estimates, rows, sim.truth);
    }
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

void run_batch(const SimulationConfig& cfg, const std::optional<double>& fp_lambda1, bool fp_only, bool parallel,
               std::vector<ReplicationResult>& results) {
  const Index M = cfg.replications;
  results.assign(static_cast<std::size_t>(M), {});
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (Index m = 0; m < M; ++m) results[static_cast<std::size_t>(m)] = run_replication(cfg, m, fp_lambda1, fp_only);
  } else {
    for (Index m = 0; m < M; ++m) results[static_cast<std::size_t>(m)] = run_replication(cfg, m, fp_lambda1, fp_only);
  }
}

MetricsReport simulate(const SimulationConfig& cfg, bool parallel) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  MetricsReport report;
  report.config = cfg;
  report.grid_size = static_cast<Index>(grid_rows(cfg.kernel_spec(), cfg.n).size());
  if (cfg.error.kind == ErrorProcess::Kind::lrd)
    report.lrd_tail_ratio = lrd_tail_ratio(cfg.error.rho, cfg.error.lrd_truncation);

  std::vector<ReplicationResult> results;
  run_batch(cfg, std::nullopt, false, parallel, results);

  std::vector<char> failed(results.size(), 0);
  std::vector<MethodCounts> totals(cfg.methods.size());
  auto absorb = [&](const std::vector<ReplicationResult>& batch) {
    for (std::size_t m = 0; m < batch.size(); ++m) {
      if (!batch[m].error.empty() && !failed[m]) {
        failed[m] = 1;
        report.failures.push_back("replication " + std::to_string(m) + ": " + batch[m].error);
      }
    }
  };
  absorb(results);

  if (cfg.has(Method::fp_lasso)) {
    double target = 0.0;
    if (cfg.fp_target) {
      target = *cfg.fp_target;
    } else {
      MethodCounts proposed;
      const auto k = static_cast<std::size_t>(
          std::find(cfg.methods.begin(), cfg.methods.end(), Method::proposed) - cfg.methods.begin());
      for (std::size_t m = 0; m < results.size(); ++m)
        if (!failed[m]) proposed.merge(results[m].counts[k]);
      target = proposed.fwer();
    }
    const auto [lambda1, achieved] = method_fp_lasso(cfg, target);
    report.fp_lambda1 = lambda1;
    report.fp_calibration_fwer = achieved;
    std::vector<ReplicationResult> fp;
    run_batch(cfg, lambda1, true, parallel, fp);
    absorb(fp);
    const auto k = static_cast<std::size_t>(
        std::find(cfg.methods.begin(), cfg.methods.end(), Method::fp_lasso) - cfg.methods.begin());
    for (std::size_t m = 0; m < results.size(); ++m) results[m].counts[k] = fp[m].counts[k];
  }

  for (std::size_t m = 0; m < results.size(); ++m) {
    if (failed[m]) continue;
    for (std::size_t k = 0; k < cfg.methods.size(); ++k) totals[k].merge(results[m].counts[k]);
  }
  report.failed = static_cast<Index>(std::count(failed.begin(), failed.end(), 1));
  report.completed = cfg.replications - report.failed;
  for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
    const MethodCounts& c = totals[k];
    report.methods.push_back({cfg.methods[k], c.fpr(), c.fnr(), c.fwer(), c.rmse(), c});
  }
  for (const auto& f : report.failures) log_warning(f);
  report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace

MetricsReport run_simulation(const SimulationConfig& cfg) { return simulate(cfg, true); }
MetricsReport run_simulation_serial(const SimulationConfig& cfg) { return simulate(cfg, false); }

const MethodMetrics* MetricsReport::find(Method m) const {
  for (const auto& mm : methods)
    if (mm.method == m) return &mm;
  return nullptr;
}

namespace {

std::vector<std::pair<std::string, std::string>> echo(const MetricsReport& r) {
  const auto& c = r.config;
  std::vector<std::pair<std::string, std::string>> out{
      {"n", std::to_string(c.n)},
      {"p", std::to_string(c.p)},
      {"s", std::to_string(c.s)},
      {"design", design_name(c.design)},
      {"error", error_process_name(c.error)},
      {"covariance", c.covariance == CovarianceChoice::oracle ? "oracle" : "estimated"},
      {"kernel", std::string(kernel_name(c.kernel))},
      {"bandwidth", format_double(c.bandwidth)},
      {"n_knots", std::to_string(c.n_knots)},
      {"alpha", format_double(c.alpha)},
      {"xi", format_double(c.xi)},
      {"zeta", format_double(c.zeta)},
      {"n_mc", std::to_string(c.n_mc)},
      {"seed", std::to_string(c.seed)},
      {"replications", std::to_string(c.replications)},
      {"completed", std::to_string(r.completed)},
      {"failed", std::to_string(r.failed)},
      {"grid_size", std::to_string(r.grid_size)},
  };
  if (r.fp_lambda1) out.emplace_back("fp_lambda1", format_double(*r.fp_lambda1));
  if (r.fp_calibration_fwer) out.emplace_back("fp_calibration_fwer", format_double(*r.fp_calibration_fwer));
  if (r.lrd_tail_ratio) out.emplace_back("lrd_tail_ratio", format_double(*r.lrd_tail_ratio));
  return out;
}

}  // namespace

void MetricsReport::write_csv(std::ostream& os) const {
  for (const auto& [k, v] : echo(*this)) os << "# " << k << '=' << v << '\n';
  os << "method,fpr,fnr,fwer,rmse,false_positives,negatives,false_negatives,positives,family_errors,families\n";
  for (const auto& m : methods) {
    const auto& c = m.counts;
    os << csv_row({std::string(method_name(m.method)), format_double(m.fpr), format_double(m.fnr),
                   format_double(m.fwer), format_double(m.rmse), std::to_string(c.false_positives),
                   std::to_string(c.negatives), std::to_string(c.false_negatives), std::to_string(c.positives),
                   std::to_string(c.family_errors), std::to_string(c.families)})
       << '\n';
  }
}

void MetricsReport::write_table(std::ostream& os) const {
  for (const auto& [k, v] : echo(*this)) os << k << ": " << v << '\n';
  os << '\n' << std::left << std::setw(10) << "method" << std::right << std::setw(12) << "FPR" << std::setw(10)
     << "FNR" << std::setw(10) << "FWER" << std::setw(10) << "RMSE" << '\n';
  for (const auto& m : methods) {
    std::ostringstream fpr;
    fpr << std::scientific << std::setprecision(2) << m.fpr;
    os << std::left << std::setw(10) << method_name(m.method) << std::right << std::setw(12) << fpr.str()
       << std::fixed << std::setprecision(4) << std::setw(10) << m.fnr << std::setw(10) << m.fwer << std::setw(10)
       << m.rmse << '\n';
    os.unsetf(std::ios::floatfield);
  }
}

}  // namespace tvinfer
