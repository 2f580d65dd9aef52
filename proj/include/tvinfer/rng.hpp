#pragma once

#include <cstdint>
#include <random>

#include "tvinfer/types.hpp"

namespace tvinfer {

/// SplitMix64 finalizer; used to derive statistically independent stream
/// seeds from a master seed and a task index.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed of the sub-stream `index` of `seed`, optionally salted by `domain`
/// so that differently purposed streams never collide.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t domain = 0) noexcept;

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::uint64_t index, std::uint64_t domain = 0) {
  return Engine(stream_seed(seed, index, domain));
}

/// Standard normal draws shared across time points (common random numbers).
/// Row k is generated from its own stream, so the leading r rows are the
/// same no matter how many rows the bank holds.
class NormalBank {
 public:
  NormalBank(std::uint64_t seed, Index rows, Index draws);

  Index rows() const noexcept { return draws_.rows(); }
  Index draws() const noexcept { return draws_.cols(); }
  std::uint64_t seed() const noexcept { return seed_; }
  const Matrix& matrix() const noexcept { return draws_; }

 private:
  std::uint64_t seed_;
  Matrix draws_;
};

}  // namespace tvinfer
