#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "tvinfer/types.hpp"

namespace tvinfer {

enum class KernelKind { uniform, epanechnikov, triangular };

KernelKind parse_kernel(std::string_view name);
std::string_view kernel_name(KernelKind kind) noexcept;

/// Symmetric kernel supported on [-1, 1] integrating to 1, with bandwidth b_n.
struct KernelSpec {
  KernelKind kind = KernelKind::uniform;
  double bandwidth = 0.1;

  /// K(u); zero outside [-1, 1].
  double evaluate(double u) const noexcept;

  /// Requires 1/n < b_n < 1/2.
  void validate(Index n) const;
};

/// Interior time interval [b_n, 1 - b_n] on which pointwise fits are defined.
bool in_interior(const KernelSpec& spec, double t) noexcept;

/// All observation times t_i = i/n lying in [b_n, 1 - b_n].
std::vector<double> interior_grid(const KernelSpec& spec, Index n);

/// Kernel neighborhood N_t with normalized weights (0-based row indices).
struct Neighborhood {
  double t = 0.0;
  std::vector<Index> indices;
  Vector weights;

  Index size() const noexcept { return static_cast<Index>(indices.size()); }
};

/// Nadaraya-Watson weights at t. Rows with |t_i - t| <= b_n are included;
/// rows where the kernel vanishes (the closed boundary of the compact
/// kernels) carry no weight and are dropped so every weight is positive.
Neighborhood kernel_weights(const KernelSpec& spec, double t, Index n);

/// Thin SVD Xt = P diag(d) Q^T restricted to the numerically nonzero
/// singular values.
struct Spectral {
  Matrix P;  // |N_t| x r
  Vector d;  // r, descending
  Matrix Q;  // p x r

  Index rank() const noexcept { return d.size(); }
};

/// Kernel-weighted local design at one time point.
class LocalDesign {
 public:
  LocalDesign(Neighborhood nbhd, Matrix Xt, Vector Yt);

  double t() const noexcept { return nbhd_.t; }
  const Neighborhood& neighborhood() const noexcept { return nbhd_; }
  const Vector& weights() const noexcept { return nbhd_.weights; }
  const Matrix& Xt() const noexcept { return Xt_; }
  const Vector& Yt() const noexcept { return Yt_; }
  Index local_size() const noexcept { return Xt_.rows(); }
  Index p() const noexcept { return Xt_.cols(); }

  bool has_spectral() const noexcept { return spectral_.has_value(); }
  const Spectral& spectral() const;
  Index rank() const { return spectral().rank(); }

  /// P_R v computed as Q (Q^T v).
  Vector project(const Eigen::Ref<const Vector>& v) const;

  /// Row j of P_R = Q Q^T.
  Vector projection_row(Index j) const;

  /// max_{k != j} |(P_R)_{jk}| for every j, formed a block of rows at a
  /// time so that memory stays O(p r).
  Vector max_offdiag_projection() const;

  /// Dense p x p projection; only for diagnostics and small p.
  Matrix dense_projection() const;

 private:
  friend LocalDesign svd_projection(const LocalDesign& design, double rank_tol);

  Neighborhood nbhd_;
  Matrix Xt_;
  Vector Yt_;
  std::optional<Spectral> spectral_;
};

/// Rows of the local design: Xt row = sqrt(w_i) x_i, Yt entry = sqrt(w_i) y_i.
LocalDesign build_local_design(const Dataset& data, const Neighborhood& nbhd);

inline constexpr double kDefaultRankTol = 1e-10;

/// Attaches the SVD; singular values d_j <= rank_tol * d_1 are discarded.
LocalDesign svd_projection(const LocalDesign& design, double rank_tol = kDefaultRankTol);

/// Covariance of the ridge estimator's stochastic part,
///   Omega = (Xt'Xt + l2 I)^-1 Xt' W^1/2 Sigma W^1/2 Xt (Xt'Xt + l2 I)^-1,
/// kept in factored form Omega = F F^T with F = Q diag(d/(d^2+l2)) L where
/// L is the symmetric square root of P^T W^1/2 Sigma W^1/2 P.
struct RidgeCovariance {
  Matrix factor;  // p x r
  Vector diag;    // Omega_jj
  double min_diag = 0.0;

  Index p() const noexcept { return factor.rows(); }
  Matrix dense() const { return factor * factor.transpose(); }
};

RidgeCovariance ridge_covariance(const LocalDesign& design, const Matrix& sigma_et, double lambda2);

/// Same quantity from the direct p x p formula. Reference route for tests.
Matrix ridge_covariance_dense(const LocalDesign& design, const Matrix& sigma_et, double lambda2);

}  // namespace tvinfer
