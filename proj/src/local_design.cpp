#include "tvinfer/local_design.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "tvinfer/log.hpp"

namespace tvinfer {

namespace {

// Slack for comparisons of t_i = i/n against interval endpoints.
constexpr double kGridEps = 1e-9;

}  // namespace

Dataset::Dataset(Matrix X, Vector y) : X_(std::move(X)), y_(std::move(y)) {
  if (X_.rows() != y_.size())
    throw DimensionError("design has " + std::to_string(X_.rows()) + " rows but response has " +
                         std::to_string(y_.size()) + " entries");
  if (X_.rows() < 2) throw DataError("need at least 2 observations");
  if (X_.cols() < 1) throw DataError("need at least 1 predictor");
  if (!X_.allFinite() || !y_.allFinite()) throw DataError("non-finite entries in data");
}

KernelKind parse_kernel(std::string_view name) {
  if (name == "uniform") return KernelKind::uniform;
  if (name == "epanechnikov") return KernelKind::epanechnikov;
  if (name == "triangular") return KernelKind::triangular;
  throw ConfigError("unknown kernel '" + std::string(name) + "'");
}

std::string_view kernel_name(KernelKind kind) noexcept {
  switch (kind) {
    case KernelKind::uniform: return "uniform";
    case KernelKind::epanechnikov: return "epanechnikov";
    case KernelKind::triangular: return "triangular";
  }
  return "?";
}

double KernelSpec::evaluate(double u) const noexcept {
  const double a = std::abs(u);
  if (a > 1.0) return 0.0;
  switch (kind) {
    case KernelKind::uniform: return 0.5;
    case KernelKind::epanechnikov: return 0.75 * (1.0 - u * u);
    case KernelKind::triangular: return 1.0 - a;
  }
  return 0.0;
}

void KernelSpec::validate(Index n) const {
  if (!(bandwidth > 1.0 / static_cast<double>(n)) || !(bandwidth < 0.5))
    throw ConfigError("bandwidth " + std::to_string(bandwidth) + " outside (1/n, 1/2) for n = " +
                      std::to_string(n));
}

bool in_interior(const KernelSpec& spec, double t) noexcept {
  return t >= spec.bandwidth - 1e-12 && t <= 1.0 - spec.bandwidth + 1e-12;
}

std::vector<double> interior_grid(const KernelSpec& spec, Index n) {
  std::vector<double> grid;
  const double nd = static_cast<double>(n);
  for (Index i = 1; i <= n; ++i) {
    const double k = static_cast<double>(i);
    if (k >= nd * spec.bandwidth - kGridEps && k <= nd * (1.0 - spec.bandwidth) + kGridEps)
      grid.push_back(k / nd);
  }
  return grid;
}

Neighborhood kernel_weights(const KernelSpec& spec, double t, Index n) {
  spec.validate(n);
  if (!in_interior(spec, t))
    throw BoundaryError("t = " + std::to_string(t) + " outside the interior [" + std::to_string(spec.bandwidth) +
                        ", " + std::to_string(1.0 - spec.bandwidth) + "]");

  const double nd = static_cast<double>(n);
  const double reach = nd * spec.bandwidth;
  const double centre = nd * t;

  Neighborhood nbhd;
  nbhd.t = t;
  std::vector<double> raw;
  const Index lo = std::max<Index>(1, static_cast<Index>(std::floor(centre - reach - 1.0)));
  const Index hi = std::min<Index>(n, static_cast<Index>(std::ceil(centre + reach + 1.0)));
  for (Index i = lo; i <= hi; ++i) {
    const double offset = static_cast<double>(i) - centre;
    if (std::abs(offset) > reach + kGridEps) continue;
    const double u = std::clamp(offset / reach, -1.0, 1.0);
    const double k = spec.evaluate(u);
    if (k <= 0.0) continue;
    nbhd.indices.push_back(i - 1);
    raw.push_back(k);
  }
  if (nbhd.indices.empty())
    throw DegenerateBandwidthError("empty kernel neighborhood at t = " + std::to_string(t));

  double total = 0.0;
  for (double k : raw) total += k;
  nbhd.weights.resize(static_cast<Index>(raw.size()));
  for (std::size_t i = 0; i < raw.size(); ++i) nbhd.weights(static_cast<Index>(i)) = raw[i] / total;
  return nbhd;
}

LocalDesign::LocalDesign(Neighborhood nbhd, Matrix Xt, Vector Yt)
    : nbhd_(std::move(nbhd)), Xt_(std::move(Xt)), Yt_(std::move(Yt)) {
  if (Xt_.rows() != nbhd_.size() || Yt_.size() != nbhd_.size())
    throw DimensionError("local design does not match its neighborhood");
}

const Spectral& LocalDesign::spectral() const {
  if (!spectral_) throw ConfigError("local design has no SVD attached; call svd_projection first");
  return *spectral_;
}

Vector LocalDesign::project(const Eigen::Ref<const Vector>& v) const {
  const auto& s = spectral();
  if (v.size() != p()) throw DimensionError("projection argument has wrong length");
  return s.Q * (s.Q.transpose() * v);
}

Vector LocalDesign::projection_row(Index j) const {
  const auto& s = spectral();
  return s.Q * s.Q.row(j).transpose();
}

Vector LocalDesign::max_offdiag_projection() const {
  const auto& s = spectral();
  const Index p = this->p();
  Vector out = Vector::Zero(p);
  if (s.rank() == 0) return out;
  constexpr Index kBlock = 64;
  Matrix rows;
  for (Index j0 = 0; j0 < p; j0 += kBlock) {
    const Index b = std::min(kBlock, p - j0);
    rows.noalias() = s.Q.middleRows(j0, b) * s.Q.transpose();
    for (Index a = 0; a < b; ++a) {
      rows(a, j0 + a) = 0.0;
      out(j0 + a) = rows.row(a).cwiseAbs().maxCoeff();
    }
  }
  return out;
}

Matrix LocalDesign::dense_projection() const {
  const auto& s = spectral();
  return s.Q * s.Q.transpose();
}

LocalDesign build_local_design(const Dataset& data, const Neighborhood& nbhd) {
  if (nbhd.weights.size() != nbhd.size()) throw DimensionError("weights do not match neighborhood");
  const Index m = nbhd.size();
  Matrix Xt(m, data.p());
  Vector Yt(m);
  for (Index a = 0; a < m; ++a) {
    const Index i = nbhd.indices[static_cast<std::size_t>(a)];
    if (i < 0 || i >= data.n()) throw DimensionError("neighborhood index " + std::to_string(i) + " out of range");
    const double root = std::sqrt(nbhd.weights(a));
    Xt.row(a) = root * data.X().row(i);
    Yt(a) = root * data.y()(i);
  }
  return LocalDesign(nbhd, std::move(Xt), std::move(Yt));
}

LocalDesign svd_projection(const LocalDesign& design, double rank_tol) {
  if (!(rank_tol > 0.0)) throw ConfigError("rank tolerance must be positive");
  if (!design.Xt().allFinite()) throw NumericalError("SVD of non-finite local design");

  Eigen::BDCSVD<Matrix> svd(design.Xt(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("SVD of local design failed");
  const Vector& sv = svd.singularValues();
  Index r = 0;
  if (sv.size() > 0) {
    const double cut = rank_tol * sv(0);
    while (r < sv.size() && sv(r) > cut) ++r;
  }
  LocalDesign out = design;
  out.spectral_ = Spectral{svd.matrixU().leftCols(r), sv.head(r), svd.matrixV().leftCols(r)};
  return out;
}

namespace {

// C = P^T W^1/2 Sigma W^1/2 P, r x r.
Matrix projected_error_cov(const LocalDesign& design, const Matrix& sigma_et) {
  const auto& s = design.spectral();
  const Vector root_w = design.weights().cwiseSqrt();
  const Matrix WP = root_w.asDiagonal() * s.P;
  return WP.transpose() * sigma_et * WP;
}

}  // namespace

RidgeCovariance ridge_covariance(const LocalDesign& design, const Matrix& sigma_et, double lambda2) {
  if (!(lambda2 > 0.0)) throw ConfigError("lambda2 must be positive");
  const Index m = design.local_size();
  if (sigma_et.rows() != m || sigma_et.cols() != m)
    throw DimensionError("error covariance must be " + std::to_string(m) + " x " + std::to_string(m));

  const auto& s = design.spectral();
  const Index r = s.rank();
  RidgeCovariance out;
  out.factor = Matrix::Zero(design.p(), r);
  if (r > 0) {
    Matrix C = projected_error_cov(design, sigma_et);
    C = 0.5 * (C + C.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(C);
    if (eig.info() != Eigen::Success) throw NumericalError("eigen-decomposition of projected error covariance failed");
    Vector ev = eig.eigenvalues();
    const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    if (ev.minCoeff() < -1e-10 * scale)
      log_warning("error covariance is not positive semidefinite (min eigenvalue " + std::to_string(ev.minCoeff()) +
                  "); clipping negative directions");
    ev = ev.cwiseMax(0.0);
    // Symmetric square root: unique, so the draws do not depend on the
    // eigenvector basis (which is arbitrary when eigenvalues repeat).
    const Matrix L = eig.eigenvectors() * ev.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
    const Vector shrink = s.d.array() / (s.d.array().square() + lambda2);
    out.factor.noalias() = s.Q * (shrink.asDiagonal() * L);
  }
  out.diag = out.factor.rowwise().squaredNorm();
  out.min_diag = out.diag.size() ? out.diag.minCoeff() : 0.0;
  return out;
}

Matrix ridge_covariance_dense(const LocalDesign& design, const Matrix& sigma_et, double lambda2) {
  if (!(lambda2 > 0.0)) throw ConfigError("lambda2 must be positive");
  const Index p = design.p();
  const Matrix& X = design.Xt();
  const Vector root_w = design.weights().cwiseSqrt();
  const Matrix gram = X.transpose() * X + lambda2 * Matrix::Identity(p, p);
  const Matrix inv = gram.ldlt().solve(Matrix::Identity(p, p));
  const Matrix WX = root_w.asDiagonal() * X;
  const Matrix middle = WX.transpose() * sigma_et * WX;
  return inv * middle * inv;
}

}  // namespace tvinfer
