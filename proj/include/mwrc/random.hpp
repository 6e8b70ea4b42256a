#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mwrc/info.hpp"

namespace mwrc {

// SplitMix64 finaliser. Used to split a master seed into independent
// per-trial streams and as a keyed counter-based generator.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                                    std::uint64_t index = 0) noexcept {
  return mix64(mix64(master ^ mix64(tag)) + mix64(index + 0x632be59bd9b4e019ULL));
}

// 53-bit uniform double in [0, 1).
constexpr double unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return unit_interval(engine_()); }
  std::uint64_t bits() { return engine_(); }
  std::size_t below(std::size_t bound) { return static_cast<std::size_t>(uniform() * bound); }
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// Inverse-CDF sampler for a finite distribution.
class Sampler {
 public:
  Sampler() = default;
  explicit Sampler(const Distribution& p) { reset(p.mass()); }
  explicit Sampler(std::span<const double> mass) { reset(mass); }

  void reset(std::span<const double> mass) {
    cdf_.resize(mass.size());
    double acc = 0.0;
    last_ = 0;
    for (std::size_t k = 0; k < mass.size(); ++k) {
      acc += mass[k];
      cdf_[k] = acc;
      if (mass[k] > 0.0) last_ = k;
    }
  }

  Symbol draw(double u) const noexcept {
    const double target = u * cdf_.back();
    for (std::size_t k = 0; k < last_; ++k)
      if (target < cdf_[k]) return static_cast<Symbol>(k);
    return static_cast<Symbol>(last_);
  }
  Symbol draw(RandomStream& rng) const noexcept { return draw(rng.uniform()); }

 private:
  std::vector<double> cdf_;
  std::size_t last_ = 0;
};

}  // namespace mwrc
