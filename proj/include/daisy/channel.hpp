#pragma once

#include "daisy/errors.hpp"
#include "daisy/linalg.hpp"
#include "daisy/random.hpp"

#include <cstdint>
#include <string>

namespace daisy {

/// An M x K channel draw; row m is the antenna-m CSI vector h_m^T.
struct channel_realization {
  cmatrix h;
  std::uint64_t seed = 0;

  [[nodiscard]] int antennas() const noexcept { return static_cast<int>(h.rows()); }
  [[nodiscard]] int users() const noexcept { return static_cast<int>(h.cols()); }

  /// h_m as a K-vector (0-based antenna index).
  [[nodiscard]] cvector row(int m) const { return h.row(m).transpose(); }
};

/// Receiver noise power; SNR = 1 / N0 with unit transmit power per user.
struct noise_model {
  double n0 = 1.0;

  static noise_model from_snr(double snr) {
    detail::require_param(snr > 0.0, "snr must be positive");
    return {1.0 / snr};
  }
  static noise_model from_snr_db(double snr_db) { return from_snr(from_db(snr_db)); }

  [[nodiscard]] double snr() const noexcept { return 1.0 / n0; }
};

/// Draws H with i.i.d. CN(0,1) entries into an existing buffer.
inline void draw_iid_channel(cmatrix& h, counter_rng& rng) { fill_complex_normal(h, 1.0, rng); }

inline channel_realization gen_iid_channel(int m, int k, std::uint64_t seed) {
  detail::require_dims(m >= 1 && k >= 1, "channel needs m >= 1 and k >= 1");
  channel_realization out{cmatrix(m, k), seed};
  counter_rng rng = substream(counter_rng(seed), stream_id::channel);
  draw_iid_channel(out.h, rng);
  return out;
}

/// Adds an estimation error with i.i.d. CN(0, n0) entries (no pilot boosting).
inline void add_csi_error(cmatrix& h, double n0, counter_rng& rng) {
  if (n0 == 0.0) return;
  for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] += rng.complex_normal(n0);
}

inline channel_realization corrupt_csi(const channel_realization& h, double n0, std::uint64_t seed) {
  detail::require_param(n0 >= 0.0, "csi noise power must be nonnegative");
  channel_realization out = h;
  counter_rng rng = substream(counter_rng(seed), stream_id::csi_error);
  add_csi_error(out.h, n0, rng);
  return out;
}

inline cmatrix awgn(int len, double n0, std::uint64_t seed) {
  detail::require_dims(len >= 1, "noise length must be positive");
  detail::require_param(n0 >= 0.0, "noise power must be nonnegative");
  cmatrix out = cmatrix::Zero(len, 1);
  if (n0 == 0.0) return out;
  counter_rng rng = substream(counter_rng(seed), stream_id::noise);
  fill_complex_normal(out, n0, rng);
  return out;
}

}  // namespace daisy
