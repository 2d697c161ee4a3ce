#pragma once

// Per-antenna equalization/precoding vectors.
//
// Coordinate descent builds w_m one antenna at a time while a K x K residual
// matrix A travels along the array:
//
//   A_0 = I,   w_m = mu_m A_{m-1} h_m,   A_m = A_{m-1} - w_m h_m^H,
//
// with mu_m = mu / ||h_m||^2. After the last antenna A_M = I - (W^H H)^*.
// Rows of W are the w_m^T; rows of H are the h_m^T.

#include "daisy/channel.hpp"
#include "daisy/closed_form.hpp"
#include "daisy/errors.hpp"
#include "daisy/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace daisy {

enum class equalizer_kind { cd, zf, mrc };

inline const char* to_string(equalizer_kind k) {
  switch (k) {
    case equalizer_kind::cd: return "cd";
    case equalizer_kind::zf: return "zf";
    case equalizer_kind::mrc: return "mrc";
  }
  return "?";
}

/// Order in which antennas are visited by a sequential pass.
enum class antenna_order { forward, reverse };

struct step_size_policy {
  enum class kind { fixed, recommended, numeric_optimal };

  kind variant = kind::fixed;
  double mu = 1.0;
  double lo = kMuLo;
  double hi = kMuHi;

  static step_size_policy fixed(double mu) {
    detail::require_param(mu >= 0.0 && mu < 2.0, "fixed step size must lie in [0, 2)");
    return {kind::fixed, mu};
  }
  static step_size_policy recommended() { return {kind::recommended, 0.0}; }
  static step_size_policy numeric_optimal() { return {kind::numeric_optimal, 0.0}; }

  /// Relaxation parameter for an M x K system at the given linear SNR.
  [[nodiscard]] double resolve(int m, int k, double snr) const {
    detail::require_param(0.0 < lo && lo < hi && hi < 2.0, "step-size search interval must lie in (0, 2)");
    switch (variant) {
      case kind::fixed: return mu;
      case kind::recommended: return step_size_recommended(m, k, snr, lo, hi);
      case kind::numeric_optimal: return step_size_optimal(m, k, snr, lo, hi);
    }
    return mu;
  }
};

struct equalizer_set {
  equalizer_kind kind = equalizer_kind::cd;
  cmatrix w;                          // M x K, row m = w_m^T
  std::vector<double> per_antenna_mu;  // mu_m, CD only
  cmatrix residual;                   // K x K, A_M = I - (W^H H)^*
  double mu_used = std::numeric_limits<double>::quiet_NaN();
  int iterations = 1;

  [[nodiscard]] int antennas() const noexcept { return static_cast<int>(w.rows()); }
  [[nodiscard]] int users() const noexcept { return static_cast<int>(w.cols()); }
};

struct precoder_set {
  cmatrix p;  // M x K, row m = p_m^T
  double power_scale = 1.0;
};

namespace detail {

inline std::vector<double> antenna_steps(const cmatrix& h, double mu) {
  std::vector<double> steps(h.rows());
  for (Eigen::Index m = 0; m < h.rows(); ++m) {
    const double norm2 = h.row(m).squaredNorm();
    if (!(norm2 > 0.0)) throw degenerate_channel_error("channel row " + std::to_string(m) + " is zero");
    steps[m] = mu / norm2;
  }
  return steps;
}

inline cmatrix residual_of(const cmatrix& w, const cmatrix& h) {
  return identity(h.cols()) - (w.adjoint() * h).conjugate();
}

}  // namespace detail

/// One coordinate-descent step at antenna row h (as a K-vector).
///
/// Adds mu_m A h to w_row and right-multiplies A by (I - mu_m h h^H).
template <class Row>
inline void cd_step(cmatrix& a, Row&& w_row, const cvector& h, double step, cvector& scratch) {
  scratch.noalias() = step * (a * h);
  a.noalias() -= scratch * h.adjoint();
  w_row += scratch.transpose();
}

/// Algorithm 1 followed by (n_iter - 1) further passes around a ring.
///
/// Every pass continues from the residual of the previous one and adds its
/// increment to each w_m, so pass n = 1 is exactly the single-pass algorithm.
/// When `passes` is non-null it receives a snapshot after every pass.
inline equalizer_set cd_formulate_multi(const channel_realization& ch, double mu, int n_iter,
                                        antenna_order order = antenna_order::forward,
                                        std::vector<equalizer_set>* passes = nullptr) {
  detail::require_param(n_iter >= 1, "n_iter must be >= 1");
  detail::require_param(mu >= 0.0 && mu <= 2.0, "mu must lie in [0, 2]");
  const cmatrix& h = ch.h;
  const Eigen::Index M = h.rows();
  const Eigen::Index K = h.cols();

  equalizer_set out;
  out.kind = equalizer_kind::cd;
  out.per_antenna_mu = detail::antenna_steps(h, mu);
  out.w = cmatrix::Zero(M, K);
  out.residual = identity(K);
  out.mu_used = mu;

  cvector hm(K);
  cvector scratch(K);
  for (int n = 1; n <= n_iter; ++n) {
    for (Eigen::Index i = 0; i < M; ++i) {
      const Eigen::Index m = order == antenna_order::forward ? i : M - 1 - i;
      hm = h.row(m).transpose();
      cd_step(out.residual, out.w.row(m), hm, out.per_antenna_mu[m], scratch);
    }
    out.iterations = n;
    if (passes) passes->push_back(out);
  }
  return out;
}

inline equalizer_set cd_formulate(const channel_realization& ch, double mu,
                                  antenna_order order = antenna_order::forward) {
  return cd_formulate_multi(ch, mu, 1, order);
}

inline equalizer_set cd_formulate(const channel_realization& ch, const step_size_policy& policy, double snr,
                                  int n_iter = 1) {
  return cd_formulate_multi(ch, policy.resolve(ch.antennas(), ch.users(), snr), n_iter);
}

/// Sequential Kaczmarz estimate of x from y = Hx + n.
///
///   eps_m = y_m - h_m^T x,   x += mu_m h_m^* eps_m
///
/// Run in reverse antenna order this reproduces W^H y for W from
/// cd_formulate(..., forward); run forward it matches cd_formulate(..., reverse).
/// Further passes restart at the first antenna of `order` from the current estimate.
inline cvector kaczmarz_estimate_stream(const channel_realization& ch, const cmatrix& y, double mu,
                                        antenna_order order = antenna_order::reverse, int passes = 1,
                                        const cvector* prior = nullptr) {
  const cmatrix& h = ch.h;
  detail::require_dims(y.rows() == h.rows() && y.cols() == 1, "y must be M x 1");
  detail::require_param(passes >= 1, "passes must be >= 1");
  if (prior) detail::require_dims(prior->size() == h.cols(), "prior must be K x 1");
  const auto steps = detail::antenna_steps(h, mu);
  const Eigen::Index M = h.rows();

  cvector x = prior ? *prior : cvector::Zero(h.cols());
  for (int p = 0; p < passes; ++p) {
    for (Eigen::Index i = 0; i < M; ++i) {
      const Eigen::Index m = order == antenna_order::forward ? i : M - 1 - i;
      const complex_t err = y(m, 0) - (h.row(m) * x)(0, 0);
      x += (steps[m] * err) * h.row(m).adjoint();
    }
  }
  return x;
}

/// W^H = (H^H H)^{-1} H^H.
inline equalizer_set zf_formulate(const channel_realization& ch) {
  const cmatrix& h = ch.h;
  if (h.rows() < h.cols()) throw rank_error("zero-forcing needs M >= K");
  const cmatrix gram = h.adjoint() * h;
  Eigen::LLT<cmatrix> llt(gram);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-13) throw rank_error("Gramian H^H H is singular");

  equalizer_set out;
  out.kind = equalizer_kind::zf;
  out.w = llt.solve(h.adjoint()).adjoint();
  out.residual = detail::residual_of(out.w, h);
  return out;
}

/// Matched filter with per-user scaling 1/||h_k||^2, so diag(W^H H) = 1.
inline equalizer_set mrc_formulate(const channel_realization& ch) {
  const cmatrix& h = ch.h;
  equalizer_set out;
  out.kind = equalizer_kind::mrc;
  out.w = h;
  for (Eigen::Index k = 0; k < h.cols(); ++k) {
    const double norm2 = h.col(k).squaredNorm();
    if (!(norm2 > 0.0)) throw degenerate_channel_error("channel column " + std::to_string(k) + " is zero");
    out.w.col(k) /= norm2;
  }
  out.residual = detail::residual_of(out.w, h);
  return out;
}

inline equalizer_set formulate(equalizer_kind kind, const channel_realization& ch, double mu = 1.0,
                               int n_iter = 1) {
  switch (kind) {
    case equalizer_kind::cd: return cd_formulate_multi(ch, mu, n_iter);
    case equalizer_kind::zf: return zf_formulate(ch);
    case equalizer_kind::mrc: return mrc_formulate(ch);
  }
  throw parameter_error("unknown equalizer kind");
}

/// P = W^*, uniformly scaled down if ||P||_F^2 exceeds the budget.
inline precoder_set precoder_from_equalizer(const equalizer_set& eq, double power_budget) {
  detail::require_param(power_budget > 0.0, "power budget must be positive");
  precoder_set out{eq.w.conjugate(), 1.0};
  const double power = out.p.squaredNorm();
  if (power > power_budget) {
    out.power_scale = std::sqrt(power_budget / power);
    out.p *= out.power_scale;
  }
  return out;
}

/// Default budget: unit power per user stream.
inline precoder_set precoder_from_equalizer(const equalizer_set& eq) {
  return precoder_from_equalizer(eq, static_cast<double>(eq.users()));
}

/// x_hat = sum_m w_m^* y_m, one partial product per antenna. y is M x S.
inline cmatrix apply_equalizer(const equalizer_set& eq, const cmatrix& y) {
  detail::require_dims(y.rows() == eq.w.rows(), "y must have one row per antenna");
  cmatrix x = cmatrix::Zero(eq.w.cols(), y.cols());
  for (Eigen::Index m = 0; m < eq.w.rows(); ++m) x.noalias() += eq.w.row(m).adjoint() * y.row(m);
  return x;
}

/// y_m = p_m^T x for every antenna. x is K x S, result M x S.
inline cmatrix apply_precoder(const precoder_set& pre, const cmatrix& x) {
  detail::require_dims(x.rows() == pre.p.cols(), "x must have one row per user");
  cmatrix y(pre.p.rows(), x.cols());
  for (Eigen::Index m = 0; m < pre.p.rows(); ++m) y.row(m).noalias() = pre.p.row(m) * x;
  return y;
}

}  // namespace daisy
