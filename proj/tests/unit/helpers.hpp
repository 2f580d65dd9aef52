#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "tvinfer/local_design.hpp"

namespace testutil {

using tvinfer::Index;
using tvinfer::Matrix;
using tvinfer::Vector;

inline Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = z(rng);
  return m;
}

inline Vector gaussian_vector(Index n, std::uint64_t seed) { return gaussian(n, 1, seed).col(0); }

/// Neighborhood over rows [first, first + count) with the given weights.
inline tvinfer::Neighborhood window(Index first, const Vector& weights, double t = 0.5) {
  tvinfer::Neighborhood nb;
  nb.t = t;
  for (Index k = 0; k < weights.size(); ++k) nb.indices.push_back(first + k);
  nb.weights = weights;
  return nb;
}

inline tvinfer::Neighborhood uniform_window(Index first, Index count, double t = 0.5) {
  return window(first, Vector::Constant(count, 1.0 / static_cast<double>(count)), t);
}

/// Local design with the given weighted rows, on a uniform window.
inline tvinfer::LocalDesign design_from(const Matrix& Xt, const Vector& Yt) {
  return tvinfer::LocalDesign(uniform_window(0, Xt.rows()), Xt, Yt);
}

/// Two-sided KS distance between a sorted sample and a continuous cdf.
inline double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

inline Matrix ar1_covariance(Index m, double phi) {
  Matrix s(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) s(i, j) = std::pow(phi, std::abs(static_cast<double>(i - j))) / (1.0 - phi * phi);
  return s;
}

}  // namespace testutil
