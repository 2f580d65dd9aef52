#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>

#include "helpers.hpp"
#include "tvinfer/lasso.hpp"
#include "tvinfer/simulate.hpp"

using namespace tvinfer;
using testutil::gaussian;

namespace {

double soft(double z, double t) { return z > t ? z - t : (z < -t ? z + t : 0.0); }

LocalDesign random_design(Index m, Index p, std::uint64_t seed) {
  return testutil::design_from(gaussian(m, p, seed), testutil::gaussian_vector(m, seed + 1000));
}

/// Uniform-kernel design whose columns are standardized over the window.
LocalDesign standardized(Index m, Index p, std::uint64_t seed) {
  Matrix X = gaussian(m, p, seed);
  for (Index j = 0; j < p; ++j) X.col(j) *= std::sqrt(static_cast<double>(m)) / X.col(j).norm();
  const Dataset data(X, testutil::gaussian_vector(m, seed + 1));
  return build_local_design(data, testutil::uniform_window(0, m));
}

}  // namespace

TEST_CASE("large penalty gives the zero solution") {
  const LocalDesign d = random_design(20, 15, 1);
  const double top = lambda_max(d);
  CHECK(top == doctest::Approx(2.0 * (d.Xt().transpose() * d.Yt()).cwiseAbs().maxCoeff()));
  CHECK(weighted_lasso(d, top).beta.isZero(0.0));
  CHECK(weighted_lasso(d, 3.0 * top).beta.isZero(0.0));
  CHECK_THROWS_AS(weighted_lasso(d, 0.0), ConfigError);
}

TEST_CASE("orthonormal columns give soft thresholding") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Matrix Q = gaussian(20, 5, seed).householderQr().householderQ() * Matrix::Identity(20, 5);
    const Vector y = testutil::gaussian_vector(20, seed + 50);
    const LocalDesign d = testutil::design_from(Q, y);
    const Vector z = Q.transpose() * y;
    for (double lambda1 : {0.1, 0.5, 1.2}) {
      const Vector b = weighted_lasso(d, lambda1).beta;
      for (Index j = 0; j < 5; ++j) CHECK(b(j) == doctest::Approx(soft(z(j), lambda1 / 2.0)).epsilon(1e-8));
    }
  }
}

TEST_CASE("KKT residual, objective and path monotonicity") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const LocalDesign d = random_design(25, 60, seed);
    const Matrix gram = d.Xt().transpose() * d.Xt();
    const Vector xty = d.Xt().transpose() * d.Yt();
    const auto grid = log_grid(lambda_max(d), 1e-3, 25);
    for (std::size_t k = 1; k < grid.size(); ++k) CHECK(grid[k] < grid[k - 1]);
    double last_l1 = 0.0;
    Vector warm = Vector::Zero(60);
    for (double lambda1 : grid) {
      const LassoFit fit = weighted_lasso(d, lambda1, {}, &warm);
      CHECK(fit.kkt_residual <= LassoConfig{}.conv_tol);
      CHECK(kkt_residual(gram, xty, fit.beta, lambda1) <= LassoConfig{}.conv_tol);
      CHECK(lasso_objective(d, fit.beta, lambda1) <= lasso_objective(d, Vector::Zero(60), lambda1) + 1e-15);
      const double l1 = fit.beta.lpNorm<1>();
      CHECK(l1 >= last_l1 - 1e-9);
      last_l1 = l1;
      warm = fit.beta;
    }
  }
}

TEST_CASE("non-convergence carries the last iterate") {
  const LocalDesign d = random_design(25, 60, 3);
  LassoConfig cfg;
  cfg.max_iter = 1;
  cfg.conv_tol = 1e-14;
  try {
    weighted_lasso(d, 0.01 * lambda_max(d), cfg);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.last_iterate().size() == 60);
    CHECK(e.residual() > cfg.conv_tol);
  }
}

TEST_CASE("three-coordinate lasso matches exhaustive grid search") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Matrix X = gaussian(20, 3, seed);
    Vector truth(3);
    truth << 0.8, -0.5, 0.0;
    const Vector y = X * truth + 0.5 * testutil::gaussian_vector(20, seed + 77);
    const LocalDesign d = testutil::design_from(X / std::sqrt(20.0), y / std::sqrt(20.0));
    const double lambda1 = 0.1;
    const LassoFit fit = weighted_lasso(d, lambda1);
    const double obj = lasso_objective(d, fit.beta, lambda1);

    // Step 1e-3 over [-1.5, 1.5]^2 for the first two coordinates; the third
    // is minimized exactly given the other two.
    const Matrix G = d.Xt().transpose() * d.Xt();
    const Vector c = d.Xt().transpose() * d.Yt();
    const double yy = d.Yt().squaredNorm();
    double best = std::numeric_limits<double>::infinity();
    for (int a = -1500; a <= 1500; ++a) {
      const double b0 = a * 1e-3;
      for (int b = -1500; b <= 1500; ++b) {
        const double b1 = b * 1e-3;
        const double b2 = soft(c(2) - G(2, 0) * b0 - G(2, 1) * b1, lambda1 / 2.0) / G(2, 2);
        const double quad = yy - 2.0 * (c(0) * b0 + c(1) * b1 + c(2) * b2) + G(0, 0) * b0 * b0 + G(1, 1) * b1 * b1 +
                            G(2, 2) * b2 * b2 + 2.0 * (G(0, 1) * b0 * b1 + G(0, 2) * b0 * b2 + G(1, 2) * b1 * b2);
        best = std::min(best, quad + lambda1 * (std::abs(b0) + std::abs(b1) + std::abs(b2)));
      }
    }
    CHECK(std::abs(obj - best) <= 1e-4);
    CHECK(obj <= best + 1e-12);
  }
}

TEST_CASE("cross-validation") {
  const Index n = 200, p = 30;
  Matrix X = gaussian(n, p, 5);
  Vector beta = Vector::Zero(p);
  beta(3) = 2.0;
  beta(17) = -1.5;
  const Vector y = X * beta + 0.5 * testutil::gaussian_vector(n, 6);
  const Dataset data(X, y);
  const KernelSpec spec;
  const auto centres = cv_centres(spec, n, 5);
  CHECK(centres.size() == 5);

  CHECK(cross_validate_lambda1(data, spec, {0.37}, {}, centres) == 0.37);

  const auto grid = default_lambda_grid(data, spec, centres, 20);
  const double chosen = cross_validate_lambda1(data, spec, grid, {}, centres);
  const LocalDesign d = build_local_design(data, kernel_weights(spec, 0.5, n));
  const Vector b = weighted_lasso(d, chosen).beta;
  CHECK(b(3) > 1.0);
  CHECK(b(17) < -0.75);
  CHECK(chosen < grid.front());

  // A zero response makes every penalty fit equally well: the smallest wins.
  const Dataset flat(X, Vector::Zero(n));
  CHECK(cross_validate_lambda1(flat, spec, {1.0, 0.5, 0.25}, {}, centres) == 0.25);
}

TEST_CASE("scaled lasso noise level") {
  const Index n = 500, p = 50;
  double mean_sigma = 0.0, mean_ratio = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Matrix X = gaussian(n, p, seed);
    const Vector e = testutil::gaussian_vector(n, seed + 100);
    const auto nb = testutil::uniform_window(0, n);
    const double s1 = scaled_lasso_sigma(build_local_design(Dataset(X, e), nb)).sigma;
    const double s2 = scaled_lasso_sigma(build_local_design(Dataset(X, 2.0 * e), nb)).sigma;
    // Against the realized noise level, so sampling spread of e is not charged to the estimator.
    const double realized = e.norm() / std::sqrt(static_cast<double>(n));
    CHECK(s1 / realized >= 0.9);
    CHECK(s1 / realized <= 1.1);
    mean_sigma += s1 / 20.0;
    mean_ratio += s2 / s1 / 20.0;
  }
  CHECK(mean_sigma >= 0.9);
  CHECK(mean_sigma <= 1.1);
  CHECK(mean_ratio >= 1.8);
  CHECK(mean_ratio <= 2.2);

  const Matrix X = gaussian(60, 5, 9);
  Vector beta(5);
  beta << 1.0, -2.0, 0.0, 0.5, 3.0;
  const auto r = scaled_lasso_sigma(build_local_design(Dataset(X, X * beta), testutil::uniform_window(0, 60)));
  CHECK(r.sigma < 1e-3);
  CHECK_THROWS_AS(scaled_lasso_sigma(build_local_design(Dataset(X, X * beta), testutil::uniform_window(0, 3))),
                  ConfigError);
}

TEST_CASE("scaled lasso resolves a cycling iteration") {
  SimulationConfig cfg;
  cfg.error = parse_error_process("ar1");
  const Dataset data = simulate_dataset(cfg, 0).data;
  for (double t : {0.12, 0.145, 0.24, 0.745}) {
    const LocalDesign d = build_local_design(data, kernel_weights(cfg.kernel_spec(), t, cfg.n));
    const ScaledLassoResult r = scaled_lasso_sigma(d);
    CHECK(r.sigma > 0.0);
    CHECK(std::find(r.trace.begin(), r.trace.end(), r.sigma) != r.trace.end());
    CHECK(r.trace.size() <= 51);
  }
}

TEST_CASE("scaled lasso reaches a fixed point on slowly contracting windows") {
  SimulationConfig cfg;
  cfg.error = parse_error_process("ar1");
  cfg.error.phi = 0.5;
  for (auto [rep, t] : {std::pair{1, 0.81}, std::pair{13, 0.565}}) {
    const Dataset data = simulate_dataset(cfg, static_cast<std::uint64_t>(rep)).data;
    const LocalDesign d = build_local_design(data, kernel_weights(cfg.kernel_spec(), t, cfg.n));
    const ScaledLassoResult r = scaled_lasso_sigma(d);
    // One plain update from the returned sigma barely moves it.
    const double m = static_cast<double>(d.local_size());
    const double lambda1 = 2.0 * r.sigma * std::sqrt(2.0 * std::log(static_cast<double>(d.p())) / m);
    const Vector b = weighted_lasso(d, lambda1).beta;
    const double s = static_cast<double>((b.array() != 0.0).count());
    const double next = std::sqrt((d.Yt() - d.Xt() * b).squaredNorm() * m / std::max(m - s, 1.0));
    CHECK(std::abs(next - r.sigma) < 1e-5);
  }
}

TEST_CASE("penalty recommendations") {
  const Index m = 41, p = 100;
  const LocalDesign d = standardized(m, p, 3);
  const double sigma = 1.3, root_log_p = std::sqrt(std::log(100.0));

  const auto iid = recommend_lambda(PenaltyRegime::iid(), d, sigma);
  CHECK(iid.L1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(iid.L2 == doctest::Approx(1.0 / std::sqrt(41.0)).epsilon(1e-12));
  CHECK(iid.lambda0 == doctest::Approx(4.0 * sigma * std::sqrt(std::log(100.0) / 41.0)).epsilon(1e-12));
  CHECK(iid.lambda1 == doctest::Approx(2.0 * iid.lambda0));

  CHECK(recommend_lambda(PenaltyRegime::short_range(1.0), d, sigma).lambda0 == doctest::Approx(iid.lambda0));
  CHECK(recommend_lambda(PenaltyRegime::short_range(2.0), d, sigma).lambda0 == doctest::Approx(2.0 * iid.lambda0));

  const auto lrd = recommend_lambda(PenaltyRegime::long_range(0.75, 4.0, 200), d, sigma);
  CHECK(lrd.lambda0 == doctest::Approx(4.0 * sigma * iid.L2 * std::pow(200.0, 0.25) * root_log_p).epsilon(1e-12));

  const double q = 2.5;
  double mu = 0.0;
  const Matrix& Xt = d.Xt();
  for (Index j = 0; j < p; ++j) {
    double s = 0.0;
    for (Index i = 0; i < m; ++i) s += std::pow(std::abs(std::sqrt(1.0 / m) * Xt(i, j)), q);
    mu = std::max(mu, s);
  }
  const auto heavy = recommend_lambda(PenaltyRegime::heavy(q, 2.0), d, sigma);
  CHECK(heavy.lambda0 ==
        doctest::Approx(2.0 * std::max(std::pow(p * mu, 1.0 / q), sigma * iid.L2 * root_log_p)).epsilon(1e-12));

  for (const PenaltyRegime& r : {PenaltyRegime::iid(), PenaltyRegime::short_range(1.7),
                                 PenaltyRegime::long_range(0.8, 4.0, 300)})
    CHECK(recommend_lambda(r, d, 2.0 * sigma).lambda0 == doctest::Approx(2.0 * recommend_lambda(r, d, sigma).lambda0));

  const LocalDesign single = standardized(m, 1, 4);
  CHECK(recommend_lambda(PenaltyRegime::iid(), single, sigma).lambda0 == kLambdaFloor);

  CHECK_THROWS_AS(recommend_lambda(PenaltyRegime::long_range(0.4, 4.0, 200), d, sigma), ConfigError);
  CHECK_THROWS_AS(recommend_lambda(PenaltyRegime::heavy(1.5), d, sigma), ConfigError);
  CHECK_THROWS_AS(recommend_lambda(PenaltyRegime::iid(), d, 0.0), ConfigError);
}
