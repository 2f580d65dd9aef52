#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "tvinfer/local_design.hpp"

using namespace tvinfer;
using testutil::gaussian;

TEST_CASE("uniform kernel window and weights") {
  const KernelSpec spec{KernelKind::uniform, 0.25};
  const Neighborhood nb = kernel_weights(spec, 0.5, 10);
  REQUIRE(nb.size() == 5);
  for (Index k = 0; k < 5; ++k) {
    CHECK(nb.indices[static_cast<std::size_t>(k)] == k + 2);
    CHECK(nb.weights(k) == doctest::Approx(0.2).epsilon(1e-15));
  }
}

TEST_CASE("epanechnikov weights follow the kernel formula") {
  const KernelSpec spec{KernelKind::epanechnikov, 0.25};
  const Neighborhood nb = kernel_weights(spec, 0.5, 10);
  REQUIRE(nb.size() == 5);
  std::vector<double> raw;
  double total = 0.0;
  for (int i = 3; i <= 7; ++i) {
    const double u = (i / 10.0 - 0.5) / 0.25;
    raw.push_back(0.75 * (1.0 - u * u));
    total += raw.back();
  }
  for (std::size_t k = 0; k < raw.size(); ++k) CHECK(nb.weights(static_cast<Index>(k)) == doctest::Approx(raw[k] / total).epsilon(1e-14));
  // Relative to the centre: K(0.8) / K(0) = 0.36, K(0.4) / K(0) = 0.84.
  CHECK(nb.weights(0) / nb.weights(2) == doctest::Approx(0.36).epsilon(1e-12));
  CHECK(nb.weights(1) / nb.weights(2) == doctest::Approx(0.84).epsilon(1e-12));
}

TEST_CASE("weights sum to one, are positive and symmetric") {
  for (KernelKind kind : {KernelKind::uniform, KernelKind::epanechnikov, KernelKind::triangular}) {
    const KernelSpec spec{kind, 0.1};
    for (Index n : {50, 200, 333}) {
      for (double t : interior_grid(spec, n)) {
        const Neighborhood nb = kernel_weights(spec, t, n);
        CHECK(nb.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(nb.weights.minCoeff() > 0.0);
        for (Index i : nb.indices) CHECK(std::abs((i + 1.0) / n - t) <= 0.1 + 1e-12);
      }
      const double t = 0.5;
      const Neighborhood nb = kernel_weights(spec, t, 200);
      const Index m = nb.size();
      for (Index k = 0; k < m; ++k) CHECK(nb.weights(k) == doctest::Approx(nb.weights(m - 1 - k)).epsilon(1e-13));
    }
  }
}

TEST_CASE("kernels integrate to one") {
  for (KernelKind kind : {KernelKind::uniform, KernelKind::epanechnikov, KernelKind::triangular}) {
    const KernelSpec spec{kind, 0.1};
    const int steps = 200000;
    double sum = 0.0;
    for (int k = 0; k < steps; ++k) sum += spec.evaluate(-1.0 + (k + 0.5) * 2.0 / steps);
    CHECK(sum * 2.0 / steps == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(spec.evaluate(1.5) == 0.0);
    CHECK(spec.evaluate(-0.3) == spec.evaluate(0.3));
  }
}

TEST_CASE("interior grid and boundary errors") {
  const KernelSpec spec{KernelKind::uniform, 0.1};
  const auto grid = interior_grid(spec, 200);
  CHECK(grid.size() == 161);
  CHECK(grid.front() == doctest::Approx(0.1));
  CHECK(grid.back() == doctest::Approx(0.9));
  CHECK_THROWS_AS(kernel_weights(spec, 0.05, 200), BoundaryError);
  CHECK_THROWS_AS(kernel_weights(spec, 0.95, 200), BoundaryError);
  CHECK_THROWS_AS(KernelSpec({KernelKind::uniform, 0.6}).validate(100), ConfigError);
  CHECK_THROWS_AS(KernelSpec({KernelKind::uniform, 0.005}).validate(100), ConfigError);
  CHECK_THROWS_AS(parse_kernel("gaussian"), ConfigError);
  CHECK(parse_kernel("epanechnikov") == KernelKind::epanechnikov);
}

TEST_CASE("local design rows are sqrt-weighted") {
  const Matrix X = gaussian(12, 3, 1);
  const Vector y = gaussian(12, 1, 2).col(0);
  const Dataset data(X, y);

  SUBCASE("equal weights") {
    const auto nb = testutil::uniform_window(4, 4);
    const LocalDesign d = build_local_design(data, nb);
    CHECK((d.Xt() - X.middleRows(4, 4) / 2.0).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((d.Yt() - y.segment(4, 4) / 2.0).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("single row") {
    const LocalDesign d = build_local_design(data, testutil::window(7, Vector::Ones(1)));
    CHECK((d.Xt().row(0) - X.row(7)).norm() == 0.0);
  }
  SUBCASE("arbitrary weights") {
    Vector w(5);
    w << 0.1, 0.3, 0.2, 0.25, 0.15;
    const LocalDesign d = build_local_design(data, testutil::window(2, w));
    for (Index k = 0; k < 5; ++k)
      for (Index j = 0; j < 3; ++j) CHECK(d.Xt()(k, j) == doctest::Approx(std::sqrt(w(k)) * X(2 + k, j)).epsilon(1e-15));
  }
  SUBCASE("mismatch") {
    CHECK_THROWS_AS(LocalDesign(testutil::uniform_window(0, 3), Matrix::Zero(4, 2), Vector::Zero(4)), DimensionError);
  }
}

TEST_CASE("projection examples") {
  SUBCASE("square orthonormal design") {
    const LocalDesign d = svd_projection(testutil::design_from(Matrix::Identity(3, 3), Vector::Zero(3)));
    CHECK(d.rank() == 3);
    CHECK((d.dense_projection() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("rank one") {
    Matrix row(1, 4);
    row << 1.0, -2.0, 0.5, 3.0;
    const LocalDesign d = svd_projection(testutil::design_from(row, Vector::Zero(1)));
    CHECK(d.rank() == 1);
    const Vector v = row.row(0).transpose();
    const Matrix expected = v * v.transpose() / v.squaredNorm();
    CHECK((d.dense_projection() - expected).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("rank-deficient columns are detected") {
    Matrix X = gaussian(10, 4, 3);
    X.col(3) = X.col(0) - 2.0 * X.col(1);
    CHECK(svd_projection(testutil::design_from(X, Vector::Zero(10))).rank() == 3);
  }
}

TEST_CASE("projection is symmetric, idempotent and fixes the row space") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Matrix X = gaussian(8, 20, seed);
    const LocalDesign d = svd_projection(testutil::design_from(X, Vector::Zero(8)));
    const Matrix P = d.dense_projection();
    CHECK(d.rank() == 8);
    CHECK((P * P - P).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((P - P.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((P * X.transpose() - X.transpose()).cwiseAbs().maxCoeff() <= 1e-8);
    const auto& s = d.spectral();
    CHECK((s.P.transpose() * s.P - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((s.Q.transpose() * s.Q - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);

    Matrix off = P.cwiseAbs();
    off.diagonal().setZero();
    const Vector expected = off.rowwise().maxCoeff();
    CHECK((d.max_offdiag_projection() - expected).cwiseAbs().maxCoeff() < 1e-14);
    for (Index j : {0, 7, 19}) CHECK((d.projection_row(j) - P.row(j).transpose()).cwiseAbs().maxCoeff() < 1e-14);
    const Vector v = testutil::gaussian_vector(20, seed + 100);
    CHECK((d.project(v) - P * v).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("ridge covariance: factored route equals the dense formula") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Index m = 5 + static_cast<Index>(seed % 7), p = 3 + static_cast<Index>((seed * 7) % 40);
    const Matrix X = gaussian(m, p, seed);
    const LocalDesign d = svd_projection(testutil::design_from(X, Vector::Zero(m)));
    const Matrix sigma = testutil::ar1_covariance(m, 0.4);
    const RidgeCovariance cov = ridge_covariance(d, sigma, 0.05);
    const Matrix dense = ridge_covariance_dense(d, sigma, 0.05);
    CHECK((cov.dense() - dense).norm() <= 1e-8 * dense.norm());
    CHECK((cov.diag - dense.diagonal()).cwiseAbs().maxCoeff() <= 1e-10 * dense.diagonal().maxCoeff());
    CHECK(cov.min_diag == doctest::Approx(cov.diag.minCoeff()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov.dense());
    CHECK(es.eigenvalues().minCoeff() >= -1e-12 * es.eigenvalues().maxCoeff());
  }
}

TEST_CASE("ridge covariance scales with sigma squared and vanishes for a zero design") {
  const Matrix X = gaussian(9, 15, 4);
  const LocalDesign d = svd_projection(testutil::design_from(X, Vector::Zero(9)));
  const Matrix a = ridge_covariance(d, Matrix::Identity(9, 9), 0.1).dense();
  const Matrix b = ridge_covariance(d, 6.25 * Matrix::Identity(9, 9), 0.1).dense();
  CHECK((b - 6.25 * a).norm() <= 1e-12 * b.norm());

  const LocalDesign zero = svd_projection(testutil::design_from(Matrix::Zero(4, 3), Vector::Zero(4)));
  CHECK(zero.rank() == 0);
  CHECK(ridge_covariance(zero, Matrix::Identity(4, 4), 0.1).dense().isZero(0.0));
  CHECK_THROWS_AS(ridge_covariance(d, Matrix::Identity(9, 9), 0.0), ConfigError);
}

TEST_CASE("ridge covariance matches Monte-Carlo covariance of the ridge noise") {
  const Index m = 6, p = 12;
  const Matrix X = gaussian(m, p, 11);
  const Vector w = Vector::Constant(m, 1.0 / m);
  const LocalDesign d = svd_projection(LocalDesign(testutil::window(0, w), X, Vector::Zero(m)));
  const Matrix sigma = testutil::ar1_covariance(m, 0.5);
  const double l2 = 0.2;
  const Matrix omega = ridge_covariance(d, sigma, l2).dense();

  // theta noise = (X'X + l2 I)^-1 X' W^1/2 e, e ~ N(0, sigma)
  const Matrix A = (X.transpose() * X + l2 * Matrix::Identity(p, p))
                       .ldlt()
                       .solve(X.transpose() * w.cwiseSqrt().asDiagonal());
  const Matrix L = sigma.llt().matrixL();
  const int draws = 100000;
  const Matrix g = gaussian(m, draws, 12);
  const Matrix theta = A * (L * g);
  const Matrix sample = theta * theta.transpose() / draws;
  for (Index j = 0; j < p; ++j)
    for (Index k = 0; k < p; ++k) {
      const double se = std::sqrt((omega(j, j) * omega(k, k) + omega(j, k) * omega(j, k)) / draws);
      CHECK(std::abs(sample(j, k) - omega(j, k)) <= 3.0 * se);
    }
}
