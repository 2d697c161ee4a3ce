#pragma once

#include "daisy/channel.hpp"
#include "daisy/equalizers.hpp"
#include "daisy/errors.hpp"
#include "daisy/linalg.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace daisy {

/// Neumaier-compensated running sum.
struct compensated_sum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) noexcept {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      carry += (sum - t) + x;
    else
      carry += (x - t) + sum;
    sum = t;
  }
  void merge(const compensated_sum& other) noexcept {
    add(other.sum);
    add(other.carry);
  }
  [[nodiscard]] double value() const noexcept { return sum + carry; }
};

/// Entrywise compensated sum of equally sized complex matrices.
class matrix_sum {
 public:
  matrix_sum() = default;
  matrix_sum(Eigen::Index rows, Eigen::Index cols)
      : rows_(rows), cols_(cols), re_(rows * cols), im_(rows * cols) {}

  void add(const cmatrix& a) {
    detail::require_dims(a.rows() == rows_ && a.cols() == cols_, "matrix_sum shape mismatch");
    for (Eigen::Index r = 0; r < rows_; ++r)
      for (Eigen::Index c = 0; c < cols_; ++c) {
        re_[r * cols_ + c].add(a(r, c).real());
        im_[r * cols_ + c].add(a(r, c).imag());
      }
  }
  void merge(const matrix_sum& other) {
    for (std::size_t i = 0; i < re_.size(); ++i) {
      re_[i].merge(other.re_[i]);
      im_[i].merge(other.im_[i]);
    }
  }
  [[nodiscard]] cmatrix mean(long count) const {
    cmatrix out(rows_, cols_);
    for (Eigen::Index r = 0; r < rows_; ++r)
      for (Eigen::Index c = 0; c < cols_; ++c)
        out(r, c) = {re_[r * cols_ + c].value() / count, im_[r * cols_ + c].value() / count};
    return out;
  }

 private:
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<compensated_sum> re_;
  std::vector<compensated_sum> im_;
};

enum class link_direction { uplink, downlink };

/// K x K equivalent channel: W^H H (uplink) or H^T P (downlink).
struct equivalent_channel {
  cmatrix e;
  link_direction direction = link_direction::uplink;
};

inline equivalent_channel equivalent_channel_ul(const cmatrix& w, const cmatrix& h) {
  detail::require_dims(w.rows() == h.rows() && w.cols() == h.cols(), "W and H must both be M x K");
  return {w.adjoint() * h, link_direction::uplink};
}

inline equivalent_channel equivalent_channel_ul(const equalizer_set& eq, const channel_realization& ch) {
  return equivalent_channel_ul(eq.w, ch.h);
}

inline equivalent_channel equivalent_channel_dl(const cmatrix& h, const cmatrix& p) {
  detail::require_dims(p.rows() == h.rows() && p.cols() == h.cols(), "P and H must both be M x K");
  return {h.transpose() * p, link_direction::downlink};
}

inline equivalent_channel equivalent_channel_dl(const channel_realization& ch, const precoder_set& pre) {
  return equivalent_channel_dl(ch.h, pre.p);
}

/// Interference below this fraction of the signal power is reported as zero (+inf SIR).
inline constexpr double kZeroInterference = 1e-20;

/// Per-user performance figures. Everything is stored linear; use the *_db helpers to present.
struct metrics_report {
  std::vector<double> sir;
  std::vector<double> sinr;
  std::vector<double> noise_term;  // E|z_k|^2
  double mean_sir = 0.0;           // pooled over users
  double mean_sinr = 0.0;
  double ber = std::numeric_limits<double>::quiet_NaN();
  double w_norm_sq = 0.0;  // mean ||W||_F^2
  long trials = 0;

  [[nodiscard]] double mean_sir_db() const { return to_db(mean_sir); }
  [[nodiscard]] double mean_sinr_db() const { return to_db(mean_sinr); }
  [[nodiscard]] std::vector<double> sir_db() const { return apply_db(sir); }
  [[nodiscard]] std::vector<double> sinr_db() const { return apply_db(sinr); }

 private:
  static std::vector<double> apply_db(const std::vector<double>& v) {
    std::vector<double> out;
    out.reserve(v.size());
    for (double x : v) out.push_back(to_db(x));
    return out;
  }
};

/// Ratio of means: mean|E_kk|^2 over mean interference (+ noise).
///
/// The noise contribution of a realization is N0 [W^H W]_kk, so one
/// accumulator serves every SNR of a sweep.
class sinr_accumulator {
 public:
  sinr_accumulator() = default;
  explicit sinr_accumulator(int k) : signal_(k), interference_(k), noise_coef_(k) {}

  [[nodiscard]] int users() const noexcept { return static_cast<int>(signal_.size()); }
  [[nodiscard]] long trials() const noexcept { return trials_; }

  void add(const cmatrix& e, const cmatrix& w) {
    add_interference(e);
    detail::require_dims(w.cols() == users(), "W must have K columns");
    for (int k = 0; k < users(); ++k) noise_coef_[k].add(w.col(k).squaredNorm());
    w_norm_.add(w.squaredNorm());
  }

  void add(const equivalent_channel& e, const equalizer_set& eq) { add(e.e, eq.w); }

  /// Interference-only sample (no noise information).
  void add_interference(const cmatrix& e) {
    detail::require_dims(e.rows() == users() && e.cols() == users(), "equivalent channel must be K x K");
    for (int k = 0; k < users(); ++k) {
      const double total = e.row(k).squaredNorm();
      const double diag = std::norm(e(k, k));
      signal_[k].add(diag);
      interference_[k].add(total - diag);
    }
    ++trials_;
  }

  void merge(const sinr_accumulator& other) {
    if (users() == 0) {
      *this = other;
      return;
    }
    detail::require_dims(other.users() == users(), "cannot merge accumulators of different K");
    for (int k = 0; k < users(); ++k) {
      signal_[k].merge(other.signal_[k]);
      interference_[k].merge(other.interference_[k]);
      noise_coef_[k].merge(other.noise_coef_[k]);
    }
    w_norm_.merge(other.w_norm_);
    trials_ += other.trials_;
  }

  [[nodiscard]] metrics_report report(double n0) const {
    detail::require_param(trials_ >= 1, "no trials accumulated");
    detail::require_param(n0 >= 0.0, "n0 must be nonnegative");
    metrics_report r;
    r.trials = trials_;
    r.w_norm_sq = w_norm_.value() / trials_;
    compensated_sum sig_all;
    compensated_sum iui_all;
    compensated_sum noise_all;
    for (int k = 0; k < users(); ++k) {
      const double s = signal_[k].value() / trials_;
      const double i = interference_[k].value() / trials_;
      const double z = n0 * noise_coef_[k].value() / trials_;
      r.sir.push_back(ratio(s, i, 0.0));
      r.sinr.push_back(ratio(s, i, z));
      r.noise_term.push_back(z);
      sig_all.add(s);
      iui_all.add(i);
      noise_all.add(z);
    }
    r.mean_sir = ratio(sig_all.value(), iui_all.value(), 0.0);
    r.mean_sinr = ratio(sig_all.value(), iui_all.value(), noise_all.value());
    return r;
  }

 private:
  static double ratio(double signal, double interference, double noise) {
    if (interference <= kZeroInterference * signal) interference = 0.0;
    const double den = interference + noise;
    if (den == 0.0) return signal > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return signal / den;
  }

  std::vector<compensated_sum> signal_;
  std::vector<compensated_sum> interference_;
  std::vector<compensated_sum> noise_coef_;
  compensated_sum w_norm_;
  long trials_ = 0;
};

/// Per-user SIR from a set of equivalent-channel realizations.
inline std::vector<double> empirical_sir(std::span<const equivalent_channel> samples) {
  detail::require_param(!samples.empty(), "need at least one sample");
  sinr_accumulator acc(static_cast<int>(samples.front().e.rows()));
  for (const auto& s : samples) acc.add_interference(s.e);
  return acc.report(0.0).sir;
}

/// Per-user SINR; w_sets[i] is the equalizer that produced samples[i].
inline std::vector<double> empirical_sinr(std::span<const equivalent_channel> samples,
                                          std::span<const equalizer_set> w_sets, double n0) {
  detail::require_param(!samples.empty(), "need at least one sample");
  detail::require_dims(samples.size() == w_sets.size(), "one equalizer per sample required");
  sinr_accumulator acc(static_cast<int>(samples.front().e.rows()));
  for (std::size_t i = 0; i < samples.size(); ++i) acc.add(samples[i].e, w_sets[i].w);
  return acc.report(n0).sinr;
}

}  // namespace daisy
