#pragma once

// Trial-parallel Monte Carlo drivers.
//
// Trials are grouped into fixed-size chunks; every chunk accumulates into its
// own copy of the accumulator and chunks are merged in index order. The
// result is therefore bit-identical for any worker count.

#include "daisy/channel.hpp"
#include "daisy/equalizers.hpp"
#include "daisy/errors.hpp"
#include "daisy/metrics.hpp"
#include "daisy/qam.hpp"
#include "daisy/random.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace daisy {

inline constexpr long kTrialChunk = 64;

inline int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(rng, trial, acc) for trial = 0..trials-1 with rng = counter_rng(seed).split(trial).
template <class Acc, class Fn>
Acc run_trials(long trials, std::uint64_t seed, int workers, const Acc& zero, Fn&& fn) {
  detail::require_param(trials >= 1, "trials must be >= 1");
  const counter_rng root(seed);
  const long chunks = (trials + kTrialChunk - 1) / kTrialChunk;
  std::vector<Acc> partial(chunks, zero);

  auto run_chunk = [&](long c) {
    const long begin = c * kTrialChunk;
    const long end = std::min(trials, begin + kTrialChunk);
    for (long t = begin; t < end; ++t) {
      counter_rng rng = root.split(static_cast<std::uint64_t>(t));
      fn(rng, t, partial[c]);
    }
  };

  const int nthreads = static_cast<int>(std::min<long>(resolve_workers(workers), chunks));
  if (nthreads <= 1) {
    for (long c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::atomic<long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int i = 0; i < nthreads; ++i) {
      pool.emplace_back([&] {
        try {
          for (long c = next++; c < chunks; c = next++) run_chunk(c);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = chunks;
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  Acc total = zero;
  for (const auto& p : partial) total.merge(p);
  return total;
}

/// One SINR Monte Carlo configuration.
struct sinr_experiment {
  int m = 128;
  int k = 16;
  equalizer_kind kind = equalizer_kind::cd;
  double mu = 1.0;
  int n_iter = 1;
  long trials = 10000;
  std::uint64_t seed = 1;
  int workers = 1;
  double csi_n0 = 0.0;  // variance of the CSI estimation error; 0 = ideal CSI
};

namespace detail {

struct pass_accumulators {
  std::vector<sinr_accumulator> per_pass;
  void merge(const pass_accumulators& other) {
    if (per_pass.empty()) {
      per_pass = other.per_pass;
      return;
    }
    for (std::size_t i = 0; i < per_pass.size(); ++i) per_pass[i].merge(other.per_pass[i]);
  }
};

}  // namespace detail

/// SINR statistics after each ring pass n = 1..n_iter (one entry for ZF/MRC).
///
/// Each trial draws H, optionally corrupts the CSI used for formulation, and
/// evaluates the equivalent channel against the true H.
inline std::vector<sinr_accumulator> simulate_sinr_passes(const sinr_experiment& ex) {
  detail::require_dims(ex.m >= 1 && ex.k >= 1, "m and k must be >= 1");
  detail::require_param(ex.n_iter >= 1, "n_iter must be >= 1");
  const std::size_t npass = ex.kind == equalizer_kind::cd ? static_cast<std::size_t>(ex.n_iter) : 1;
  detail::pass_accumulators zero{std::vector<sinr_accumulator>(npass, sinr_accumulator(ex.k))};

  auto trial = [&](counter_rng& rng, long, detail::pass_accumulators& acc) {
    channel_realization truth{cmatrix(ex.m, ex.k), 0};
    counter_rng ch_rng = substream(rng, stream_id::channel);
    draw_iid_channel(truth.h, ch_rng);
    channel_realization csi = truth;
    if (ex.csi_n0 > 0.0) {
      counter_rng err_rng = substream(rng, stream_id::csi_error);
      add_csi_error(csi.h, ex.csi_n0, err_rng);
    }
    if (ex.kind == equalizer_kind::cd) {
      std::vector<equalizer_set> passes;
      cd_formulate_multi(csi, ex.mu, ex.n_iter, antenna_order::forward, &passes);
      for (std::size_t n = 0; n < passes.size(); ++n)
        acc.per_pass[n].add(passes[n].w.adjoint() * truth.h, passes[n].w);
    } else {
      const equalizer_set eq = formulate(ex.kind, csi);
      acc.per_pass[0].add(eq.w.adjoint() * truth.h, eq.w);
    }
  };
  return run_trials(ex.trials, ex.seed, ex.workers, zero, trial).per_pass;
}

inline sinr_accumulator simulate_sinr(const sinr_experiment& ex) { return simulate_sinr_passes(ex).back(); }

/// Uncoded bit-error-rate configuration for one detector.
struct ber_settings {
  int m = 128;
  int k = 16;
  equalizer_kind kind = equalizer_kind::cd;
  step_size_policy policy = step_size_policy::numeric_optimal();
  int n_iter = 1;
  bool noisy_csi = false;  // CSI error variance = N0 of the SNR point
  long bits_per_point = 100000;
  int symbols_per_frame = 8;  // channel uses per channel draw
  int qam_order = 16;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct ber_point {
  double snr_db = 0.0;
  double mu = std::numeric_limits<double>::quiet_NaN();
  double ber = 0.0;
  long bits = 0;
  long errors = 0;
  long trials = 0;
};

namespace detail {

struct error_count {
  long errors = 0;
  long bits = 0;
  void merge(const error_count& o) {
    errors += o.errors;
    bits += o.bits;
  }
};

}  // namespace detail

/// BER at one SNR. Draws are common across SNR points for a fixed seed.
///
/// The receiver scales user k by 1 / [W^H H_csi]_kk before slicing; for CD
/// this gain is 1 - conj(A_M(k,k)), available where the residual ends up.
inline ber_point ber_at(const ber_settings& cfg, double snr_db) {
  detail::require_param(cfg.bits_per_point >= 1, "bits_per_point must be >= 1 (zero trials)");
  detail::require_param(cfg.symbols_per_frame >= 1, "symbols_per_frame must be >= 1");
  const qam_map qam(cfg.qam_order);
  const double n0 = 1.0 / from_db(snr_db);
  const long bits_per_trial = static_cast<long>(cfg.k) * cfg.symbols_per_frame * qam.bits_per_symbol();
  const long trials = (cfg.bits_per_point + bits_per_trial - 1) / bits_per_trial;

  ber_point out;
  out.snr_db = snr_db;
  if (cfg.kind == equalizer_kind::cd) out.mu = cfg.policy.resolve(cfg.m, cfg.k, 1.0 / n0);

  auto trial = [&](counter_rng& rng, long, detail::error_count& acc) {
    channel_realization truth{cmatrix(cfg.m, cfg.k), 0};
    counter_rng ch_rng = substream(rng, stream_id::channel);
    draw_iid_channel(truth.h, ch_rng);
    channel_realization csi = truth;
    if (cfg.noisy_csi) {
      counter_rng err_rng = substream(rng, stream_id::csi_error);
      add_csi_error(csi.h, n0, err_rng);
    }
    const equalizer_set eq = formulate(cfg.kind, csi, out.mu, cfg.n_iter);
    const cvector gain = (eq.w.adjoint() * csi.h).diagonal();

    counter_rng bit_rng = substream(rng, stream_id::payload);
    std::vector<int> labels(static_cast<std::size_t>(cfg.k) * cfg.symbols_per_frame);
    cmatrix x(cfg.k, cfg.symbols_per_frame);
    for (int s = 0; s < cfg.symbols_per_frame; ++s)
      for (int u = 0; u < cfg.k; ++u) {
        const int label = static_cast<int>(bit_rng() % static_cast<std::uint64_t>(qam.order()));
        labels[static_cast<std::size_t>(s) * cfg.k + u] = label;
        x(u, s) = qam.point(label);
      }
    cmatrix y = truth.h * x;
    counter_rng noise_rng = substream(rng, stream_id::noise);
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] += noise_rng.complex_normal(n0);

    const cmatrix xhat = apply_equalizer(eq, y);
    for (int s = 0; s < cfg.symbols_per_frame; ++s)
      for (int u = 0; u < cfg.k; ++u) {
        const complex_t g = gain(u);
        const complex_t z = g == complex_t(0.0) ? xhat(u, s) : xhat(u, s) / g;
        const int decided = qam.slice(z);
        acc.errors += std::popcount(static_cast<unsigned>(decided ^ labels[static_cast<std::size_t>(s) * cfg.k + u]));
      }
    acc.bits += bits_per_trial;
  };

  const auto count = run_trials(trials, cfg.seed, cfg.workers, detail::error_count{}, trial);
  out.errors = count.errors;
  out.bits = count.bits;
  out.trials = trials;
  out.ber = static_cast<double>(count.errors) / static_cast<double>(count.bits);
  return out;
}

inline std::vector<ber_point> ber_montecarlo(const ber_settings& cfg, std::span<const double> snr_db) {
  std::vector<ber_point> curve;
  curve.reserve(snr_db.size());
  for (double s : snr_db) curve.push_back(ber_at(cfg, s));
  return curve;
}

/// SNR (dB) at which a BER curve sorted by SNR reaches `target`, interpolating log10(BER)
/// linearly between the bracketing points. Points with zero errors are ignored.
inline double snr_for_ber(std::span<const ber_point> curve, double target) {
  detail::require_param(target > 0.0, "target BER must be positive");
  std::vector<const ber_point*> pts;
  for (const auto& p : curve)
    if (p.ber > 0.0) pts.push_back(&p);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double b0 = pts[i]->ber;
    const double b1 = pts[i + 1]->ber;
    if ((b0 - target) * (b1 - target) > 0.0 || b0 == b1) continue;
    const double t = (std::log10(target) - std::log10(b0)) / (std::log10(b1) - std::log10(b0));
    return pts[i]->snr_db + t * (pts[i + 1]->snr_db - pts[i]->snr_db);
  }
  throw parameter_error("target BER is outside the reference curve");
}

/// Extra SNR `point` needs over the reference curve to reach the same BER.
inline double snr_gap_db(std::span<const ber_point> reference, const ber_point& point) {
  return point.snr_db - snr_for_ber(reference, point.ber);
}

}  // namespace daisy
