#include "tvinfer/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tvinfer {

void LassoConfig::validate() const {
  if (max_iter < 1) throw ConfigError("lasso max_iter must be positive");
  if (!(conv_tol > 0.0)) throw ConfigError("lasso conv_tol must be positive");
  if (cv_folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
}

namespace {

inline double soft(double z, double threshold) {
  if (z > threshold) return z - threshold;
  if (z < -threshold) return z + threshold;
  return 0.0;
}

inline double sign(double v) { return (v > 0.0) - (v < 0.0); }

inline double coordinate_kkt(double corr, double b, double lambda1) {
  const double grad = 2.0 * corr;
  if (b != 0.0) return std::abs(grad - lambda1 * sign(b));
  return std::max(0.0, std::abs(grad) - lambda1);
}

}  // namespace

double kkt_residual(const Matrix& gram, const Vector& xty, const Vector& beta, double lambda1) {
  const Vector corr = xty - gram * beta;
  double worst = 0.0;
  for (Index j = 0; j < beta.size(); ++j) worst = std::max(worst, coordinate_kkt(corr(j), beta(j), lambda1));
  return worst;
}

LassoFit lasso_gram(const Matrix& gram, const Vector& xty, double lambda1, const LassoConfig& cfg,
                    const Vector* warm_start) {
  if (!(lambda1 > 0.0)) throw ConfigError("lambda1 must be positive");
  const Index p = gram.rows();
  if (gram.cols() != p || xty.size() != p) throw DimensionError("lasso: gram / xty dimension mismatch");

  Vector beta = Vector::Zero(p);
  if (warm_start) {
    if (warm_start->size() != p) throw DimensionError("lasso: warm start has wrong length");
    beta = *warm_start;
  }
  // corr = X'(Y - X beta)
  Vector corr = xty - gram * beta;
  const double half = 0.5 * lambda1;

  auto update = [&](Index j) {
    const double gjj = gram(j, j);
    if (gjj <= 0.0) {
      beta(j) = 0.0;
      return 0.0;
    }
    const double old = beta(j);
    const double fresh = soft(corr(j) + gjj * old, half) / gjj;
    const double delta = fresh - old;
    if (delta != 0.0) {
      beta(j) = fresh;
      corr.noalias() -= gram.col(j) * delta;
    }
    return std::abs(delta) * std::sqrt(gjj);
  };

  std::vector<Index> active;
  active.reserve(static_cast<std::size_t>(p));
  double residual = std::numeric_limits<double>::infinity();
  int sweeps = 0;
  while (sweeps < cfg.max_iter) {
    // Full pass, then iterate on the active set until it settles.
    for (Index j = 0; j < p; ++j) update(j);
    ++sweeps;
    active.clear();
    for (Index j = 0; j < p; ++j)
      if (beta(j) != 0.0) active.push_back(j);
    while (sweeps < cfg.max_iter && !active.empty()) {
      double active_kkt = 0.0;
      for (Index j : active) {
        update(j);
      }
      ++sweeps;
      for (Index j : active) active_kkt = std::max(active_kkt, coordinate_kkt(corr(j), beta(j), lambda1));
      if (active_kkt <= 0.25 * cfg.conv_tol) break;
    }
    corr = xty - gram * beta;
    residual = 0.0;
    for (Index j = 0; j < p; ++j) residual = std::max(residual, coordinate_kkt(corr(j), beta(j), lambda1));
    if (residual <= cfg.conv_tol) return LassoFit{std::move(beta), lambda1, residual, sweeps};
  }
  throw ConvergenceError("lasso did not converge in " + std::to_string(cfg.max_iter) +
                             " sweeps (KKT residual " + std::to_string(residual) + ")",
                         beta, residual);
}

LassoFit weighted_lasso(const LocalDesign& design, double lambda1, const LassoConfig& cfg, const Vector* warm_start) {
  const Matrix gram = design.Xt().transpose() * design.Xt();
  const Vector xty = design.Xt().transpose() * design.Yt();
  return lasso_gram(gram, xty, lambda1, cfg, warm_start);
}

double lasso_objective(const LocalDesign& design, const Vector& beta, double lambda1) {
  return (design.Yt() - design.Xt() * beta).squaredNorm() + lambda1 * beta.lpNorm<1>();
}

double lambda_max(const LocalDesign& design) {
  return 2.0 * (design.Xt().transpose() * design.Yt()).lpNorm<Eigen::Infinity>();
}

std::vector<double> log_grid(double top, double ratio, int count) {
  if (!(top > 0.0) || !(ratio > 0.0 && ratio < 1.0) || count < 1)
    throw ConfigError("invalid lambda grid specification");
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    grid[static_cast<std::size_t>(k)] = top * std::pow(ratio, frac);
  }
  return grid;
}

std::vector<double> cv_centres(const KernelSpec& spec, Index n, int count) {
  const auto grid = interior_grid(spec, n);
  if (grid.empty()) throw DegenerateBandwidthError("no interior time points");
  const auto g = static_cast<int>(grid.size());
  if (count >= g) return grid;
  std::vector<double> out;
  for (int k = 0; k < count; ++k) {
    const auto idx = count == 1 ? g / 2 : static_cast<int>(std::lround(static_cast<double>(k) * (g - 1) / (count - 1)));
    out.push_back(grid[static_cast<std::size_t>(idx)]);
  }
  return out;
}

std::vector<double> default_lambda_grid(const Dataset& data, const KernelSpec& spec,
                                        const std::vector<double>& centres, int count) {
  double top = 0.0;
  for (double t : centres)
    top = std::max(top, lambda_max(build_local_design(data, kernel_weights(spec, t, data.n()))));
  if (!(top > 0.0)) top = 1.0;
  return log_grid(top, 1e-3, count);
}

double cross_validate_lambda1(const Dataset& data, const KernelSpec& spec, std::vector<double> grid,
                              const LassoConfig& cfg, const std::vector<double>& centres) {
  cfg.validate();
  if (grid.empty()) throw ConfigError("cross-validation grid is empty");
  if (centres.empty()) throw ConfigError("cross-validation needs at least one centre");
  for (double g : grid)
    if (!(g > 0.0)) throw ConfigError("cross-validation grid values must be positive");
  std::sort(grid.begin(), grid.end(), std::greater<>());
  if (grid.size() == 1) return grid.front();

  const auto n_grid = static_cast<Index>(grid.size());
  const int folds = cfg.cv_folds;
  const auto n_tasks = static_cast<Index>(centres.size()) * folds;
  Matrix losses = Matrix::Zero(n_grid, n_tasks);

  std::vector<Neighborhood> hoods;
  hoods.reserve(centres.size());
  for (double t : centres) hoods.push_back(kernel_weights(spec, t, data.n()));

#pragma omp parallel for schedule(dynamic)
  for (Index task = 0; task < n_tasks; ++task) {
    const auto& nb = hoods[static_cast<std::size_t>(task / folds)];
    const int fold = static_cast<int>(task % folds);
    std::vector<Index> train, test;
    for (Index a = 0; a < nb.size(); ++a) (a % folds == fold ? test : train).push_back(a);
    if (train.empty() || test.empty()) continue;

    double wsum = 0.0;
    for (Index a : train) wsum += nb.weights(a);
    Matrix Xtr(static_cast<Index>(train.size()), data.p());
    Vector Ytr(static_cast<Index>(train.size()));
    for (std::size_t k = 0; k < train.size(); ++k) {
      const Index a = train[k];
      const Index i = nb.indices[static_cast<std::size_t>(a)];
      const double root = std::sqrt(nb.weights(a) / wsum);
      Xtr.row(static_cast<Index>(k)) = root * data.X().row(i);
      Ytr(static_cast<Index>(k)) = root * data.y()(i);
    }
    const Matrix gram = Xtr.transpose() * Xtr;
    const Vector xty = Xtr.transpose() * Ytr;

    Vector warm = Vector::Zero(data.p());
    bool have_warm = false;
    for (Index g = 0; g < n_grid; ++g) {
      try {
        LassoFit fit = lasso_gram(gram, xty, grid[static_cast<std::size_t>(g)], cfg, have_warm ? &warm : nullptr);
        double loss = 0.0;
        for (Index a : test) {
          const Index i = nb.indices[static_cast<std::size_t>(a)];
          const double r = data.y()(i) - data.X().row(i).dot(fit.beta);
          loss += nb.weights(a) * r * r;
        }
        losses(g, task) = loss;
        warm = std::move(fit.beta);
        have_warm = true;
      } catch (const ConvergenceError&) {
        losses(g, task) = std::numeric_limits<double>::infinity();
        have_warm = false;
      }
    }
  }

  const Vector total = losses.rowwise().sum();
  Index best = -1;
  for (Index g = 0; g < n_grid; ++g) {
    if (!std::isfinite(total(g))) continue;
    // Grid is descending: later entries win ties, i.e. the smallest lambda1.
    if (best < 0 || total(g) <= total(best) * (1.0 + 1e-12)) best = g;
  }
  if (best < 0) throw NumericalError("cross-validation: every grid value failed to converge");
  return grid[static_cast<std::size_t>(best)];
}

ScaledLassoResult scaled_lasso_sigma(const LocalDesign& design, const LassoConfig& cfg) {
  const Index m = design.local_size();
  const Index p = design.p();
  if (m < 4) throw ConfigError("scaled lasso needs at least 4 local observations");
  const double universal = std::sqrt(2.0 * std::log(static_cast<double>(p)) / static_cast<double>(m));
  const Matrix gram = design.Xt().transpose() * design.Xt();
  const Vector xty = design.Xt().transpose() * design.Yt();

  ScaledLassoResult out;
  double sigma = std::sqrt(design.Yt().squaredNorm());
  out.beta = Vector::Zero(p);
  out.trace.push_back(sigma);
  constexpr int kRounds = 50;
  int plain = 0;  // plain updates since the last extrapolation
  for (int round = 0; round < kRounds; ++round) {
    const double lambda1 = std::max(2.0 * sigma * universal, kLambdaFloor);
    LassoFit fit = lasso_gram(gram, xty, lambda1, cfg, &out.beta);
    out.beta = std::move(fit.beta);
    const double rss = (design.Yt() - design.Xt() * out.beta).squaredNorm();
    const Index support = (out.beta.array() != 0.0).count();
    const double denom = std::max<double>(static_cast<double>(m - support), 1.0);
    const double next = std::sqrt(rss * static_cast<double>(m) / denom);
    const bool settled = std::abs(next - sigma) < 1e-6 || next < 1e-12;
    // The support count makes the update discontinuous, so it can cycle;
    // a revisited value ends the iteration at the largest sigma on the cycle.
    const auto seen = std::find_if(out.trace.begin(), out.trace.end() - 1,
                                   [&](double v) { return std::abs(v - next) < 1e-6; });
    const bool cycled = !settled && seen != out.trace.end() - 1;
    const auto first = seen - out.trace.begin();
    out.trace.push_back(next);
    sigma = cycled ? *std::max_element(out.trace.begin() + first, out.trace.end()) : next;
    if (settled || cycled) {
      out.sigma = sigma;
      return out;
    }
    // Between support changes the update contracts linearly, sometimes with
    // a rate near 1. Aitken extrapolation over three consecutive iterates
    // skips ahead; only a plain update can end the loop.
    if (++plain >= 2) {
      const auto n = out.trace.size();
      const double d1 = out.trace[n - 2] - out.trace[n - 3], d2 = out.trace[n - 1] - out.trace[n - 2];
      const double ratio = d1 != 0.0 ? d2 / d1 : 0.0;
      const double jump = out.trace[n - 1] + d2 * ratio / (1.0 - ratio);
      if (ratio > 0.0 && ratio < 1.0 && jump > 0.0) {
        sigma = jump;
        out.trace.push_back(sigma);
        plain = 0;
      }
    }
  }
  throw ConvergenceError("scaled lasso did not converge in 50 rounds", out.beta, sigma, out.trace);
}

void PenaltyRegime::validate() const {
  switch (kind) {
    case Kind::iid_gaussian: break;
    case Kind::srd:
      if (!(a_l1 >= 1.0)) throw ConfigError("srd regime needs |a|_1 >= 1 (a_0 = 1)");
      break;
    case Kind::lrd:
      if (!(rho > 0.5 && rho < 1.0)) throw ConfigError("lrd regime needs rho in (1/2, 1)");
      if (!(c_lrd > 0.0)) throw ConfigError("lrd regime needs C > 0");
      if (n < 1) throw ConfigError("lrd regime needs the sample size n");
      break;
    case Kind::heavy_tail:
      if (!(q > 2.0)) throw ConfigError("heavy-tail regime needs q > 2");
      if (!(c_q > 0.0)) throw ConfigError("heavy-tail regime needs C_q > 0");
      break;
  }
}

PenaltyRecommendation recommend_lambda(const PenaltyRegime& regime, const LocalDesign& design, double sigma,
                                       double multiplier) {
  regime.validate();
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (!(multiplier > 0.0)) throw ConfigError("lambda1 multiplier must be positive");

  const Matrix& Xt = design.Xt();  // rows sqrt(w_i) x_i
  const Vector& w = design.weights();
  PenaltyRecommendation rec;
  rec.L1 = std::sqrt(Xt.colwise().squaredNorm().maxCoeff());
  rec.L2 = std::sqrt((w.asDiagonal() * Xt.cwiseAbs2()).colwise().sum().maxCoeff());
  const double root_log_p = std::sqrt(std::log(static_cast<double>(design.p())));
  const double base = sigma * rec.L2 * root_log_p;

  switch (regime.kind) {
    case PenaltyRegime::Kind::iid_gaussian: rec.lambda0 = 4.0 * base; break;
    case PenaltyRegime::Kind::srd: rec.lambda0 = 4.0 * base * regime.a_l1; break;
    case PenaltyRegime::Kind::lrd:
      rec.lambda0 = regime.c_lrd * base * std::pow(static_cast<double>(regime.n), 1.0 - regime.rho);
      break;
    case PenaltyRegime::Kind::heavy_tail: {
      // |w X_ij| = sqrt(w_i) |Xt_ij|
      const Matrix wx = w.cwiseSqrt().asDiagonal() * Xt.cwiseAbs();
      const double mu = wx.array().pow(regime.q).colwise().sum().maxCoeff();
      const double moment_term = std::pow(static_cast<double>(design.p()) * mu, 1.0 / regime.q);
      rec.lambda0 = regime.c_q * std::max(moment_term, base);
      break;
    }
  }
  rec.lambda0 = std::max(rec.lambda0, kLambdaFloor);
  rec.lambda1 = multiplier * rec.lambda0;
  return rec;
}

}  // namespace tvinfer
