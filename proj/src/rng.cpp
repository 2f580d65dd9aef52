#include "tvinfer/rng.hpp"

namespace tvinfer {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t domain) noexcept {
  return mix64(seed ^ mix64(index ^ mix64(domain + 0x5851f42d4c957f2dULL)));
}

NormalBank::NormalBank(std::uint64_t seed, Index rows, Index draws) : seed_(seed), draws_(rows, draws) {
  constexpr std::uint64_t kBankDomain = 0xb4b4;
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < rows; ++k) {
    Engine engine = make_engine(seed, static_cast<std::uint64_t>(k), kBankDomain);
    std::normal_distribution<double> normal;
    for (Index m = 0; m < draws; ++m) draws_(k, m) = normal(engine);
  }
}

}  // namespace tvinfer
