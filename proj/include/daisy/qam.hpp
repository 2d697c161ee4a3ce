#pragma once

#include "daisy/errors.hpp"
#include "daisy/linalg.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace daisy {

/// Square Gray-labelled QAM with unit average symbol energy.
///
/// The label of a point is (gray(i_I) << b) | gray(i_Q), where i_I, i_Q index the
/// per-axis PAM levels from most negative to most positive and b = log2(sqrt(order)).
/// Bits are consumed most-significant first.
class qam_map {
 public:
  explicit qam_map(int order = 16) : order_(order) {
    detail::require_param(order >= 4 && std::has_single_bit(static_cast<unsigned>(order)),
                          "qam order must be a power of two >= 4");
    bits_ = std::countr_zero(static_cast<unsigned>(order));
    detail::require_param(bits_ % 2 == 0, "only square constellations are supported");
    levels_ = 1 << (bits_ / 2);
    scale_ = std::sqrt(3.0 / (2.0 * (order - 1)));

    points_.resize(order);
    for (int label = 0; label < order; ++label) {
      const int half = bits_ / 2;
      const int gi = label >> half;
      const int gq = label & (levels_ - 1);
      points_[label] = {level(inverse_gray(gi)), level(inverse_gray(gq))};
    }
  }

  [[nodiscard]] int order() const noexcept { return order_; }
  [[nodiscard]] int bits_per_symbol() const noexcept { return bits_; }
  [[nodiscard]] std::span<const complex_t> constellation() const noexcept { return points_; }
  [[nodiscard]] complex_t point(int label) const { return points_.at(label); }

  /// Smallest distance between two constellation points.
  [[nodiscard]] double min_distance() const noexcept { return 2.0 * scale_; }

  /// Hard decision: label of the nearest point (per-axis slicing).
  [[nodiscard]] int slice(complex_t s) const noexcept {
    const int half = bits_ / 2;
    return (gray(axis_index(s.real())) << half) | gray(axis_index(s.imag()));
  }

  [[nodiscard]] std::vector<complex_t> modulate(std::span<const std::uint8_t> bits) const {
    detail::require_param(bits.size() % bits_ == 0, "bit count must be a multiple of log2(order)");
    std::vector<complex_t> out;
    out.reserve(bits.size() / bits_);
    for (std::size_t i = 0; i < bits.size(); i += bits_) {
      int label = 0;
      for (int b = 0; b < bits_; ++b) label = (label << 1) | (bits[i + b] & 1);
      out.push_back(points_[label]);
    }
    return out;
  }

  [[nodiscard]] std::vector<std::uint8_t> demodulate(std::span<const complex_t> symbols) const {
    std::vector<std::uint8_t> out;
    out.reserve(symbols.size() * bits_);
    for (complex_t s : symbols) {
      const int label = slice(s);
      for (int b = bits_ - 1; b >= 0; --b) out.push_back(static_cast<std::uint8_t>((label >> b) & 1));
    }
    return out;
  }

  static int gray(int i) noexcept { return i ^ (i >> 1); }
  static int inverse_gray(int g) noexcept {
    int i = g;
    for (int shift = 1; shift < 32; shift <<= 1) i ^= i >> shift;
    return i;
  }

 private:
  [[nodiscard]] double level(int i) const noexcept { return (2.0 * i - (levels_ - 1)) * scale_; }

  [[nodiscard]] int axis_index(double v) const noexcept {
    const double t = std::floor((v / scale_ + (levels_ - 1)) / 2.0 + 0.5);
    if (!(t > 0.0)) return 0;  // also catches NaN
    return t >= levels_ - 1 ? levels_ - 1 : static_cast<int>(t);
  }

  int order_;
  int bits_ = 0;
  int levels_ = 0;
  double scale_ = 0.0;
  std::vector<complex_t> points_;
};

}  // namespace daisy
