#pragma once

#include "daisy/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace daisy {

/// SplitMix64 finalizer; bijective 64-bit mixing.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: the i-th draw is a pure function of (key, i).
///
/// Streams are derived with split(), so trial t of an experiment seeded with s
/// always sees counter_rng(s).split(t) regardless of how trials are scheduled
/// across worker threads. Satisfies UniformRandomBitGenerator.
class counter_rng {
 public:
  using result_type = std::uint64_t;

  explicit counter_rng(std::uint64_t seed) noexcept : key_(mix64(seed ^ kSeedSalt)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    ++counter_;
    return mix64(mix64(counter_ * kGamma) ^ key_);
  }

  /// Independent child stream; does not advance this generator.
  [[nodiscard]] counter_rng split(std::uint64_t stream) const noexcept {
    counter_rng child(0);
    child.key_ = mix64(key_ ^ mix64(stream + kGamma));
    return child;
  }

  void discard(std::uint64_t n) noexcept { counter_ += n; }
  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Circularly-symmetric complex Gaussian CN(0, variance) via Box-Muller.
  complex_t complex_normal(double variance) noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-variance * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kSeedSalt = 0x6a09e667f3bcc909ULL;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Named sub-streams inside one trial.
enum class stream_id : std::uint64_t { channel = 1, csi_error = 2, noise = 3, payload = 4 };

inline counter_rng substream(const counter_rng& trial, stream_id id) {
  return trial.split(static_cast<std::uint64_t>(id));
}

inline void fill_complex_normal(cmatrix& out, double variance, counter_rng& rng) {
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = rng.complex_normal(variance);
}

}  // namespace daisy
