#pragma once

// Closed-form performance of coordinate-descent equalization over i.i.d.
// Rayleigh channels: SIR, SINR, post-equalization noise and E||W||_F^2.

#include "daisy/errors.hpp"
#include "daisy/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace daisy {

/// Per-step moment coefficients of Q = I - mu h h^H / ||h||^2.
struct moment_params {
  double alpha;  // 1 - 2mu/K + mu^2/(K(K+1))
  double beta;   // mu^2/(K(K+1))
  double nu;     // 1 - mu/K
  double eps;    // 1 - 2mu/K + mu^2/K
};

inline moment_params table1_params(double mu, int k) {
  detail::require_param(k >= 2, "moment parameters need k >= 2");
  const double kk = k;
  const double b = mu * mu / (kk * (kk + 1.0));
  return {1.0 - 2.0 * mu / kk + b, b, 1.0 - mu / kk, 1.0 - 2.0 * mu / kk + mu * mu / kk};
}

struct closed_form_inputs {
  int m = 128;
  int k = 16;
  double mu = 1.0;
  double n0 = 0.0;
};

namespace detail {

// 1 - x^n without cancellation for x near 1.
inline double one_minus_pow(double x, int n) {
  if (x <= 0.0) return 1.0 - std::pow(x, n);
  return -std::expm1(n * std::log1p(x - 1.0));
}

inline void check_closed_form(const closed_form_inputs& in) {
  require_param(in.k >= 2, "closed forms need k >= 2");
  require_param(in.m >= 1, "closed forms need m >= 1");
  require_param(in.mu > 0.0 && in.mu < 2.0, "closed forms need mu in (0, 2)");
  require_param(in.n0 >= 0.0, "n0 must be nonnegative");
}

// E|E_kk|^2 = 1 - 2 nu^M + alpha^M (1 - 1/K) + eps^M / K, regrouped as
// 2(1-nu^M) - (1-alpha^M)(1-1/K) - (1-eps^M)/K.
inline double signal_power(const closed_form_inputs& in, const moment_params& p) {
  const double kinv = 1.0 / in.k;
  return 2.0 * one_minus_pow(p.nu, in.m) - one_minus_pow(p.alpha, in.m) * (1.0 - kinv) -
         one_minus_pow(p.eps, in.m) * kinv;
}

// E sum_{i!=k} |E_ki|^2 = (1 - 1/K)(eps^M - alpha^M).
inline double interference_power(const closed_form_inputs& in, const moment_params& p) {
  // eps - alpha = beta K exactly; forming it from eps and alpha loses digits for small mu.
  const double eps_m = std::pow(p.eps, in.m);
  const double gap = p.alpha > 0.0 ? -eps_m * std::expm1(-in.m * std::log1p(p.beta * in.k / p.alpha))
                                   : eps_m - std::pow(p.alpha, in.m);
  return (1.0 - 1.0 / in.k) * gap;
}

}  // namespace detail

/// Post-equalization noise power per user, E|z_k|^2.
inline double analytic_noise_term(const closed_form_inputs& in) {
  detail::check_closed_form(in);
  const auto p = table1_params(in.mu, in.k);
  return in.n0 / (in.k - 1.0) * (in.mu / (2.0 - in.mu)) * detail::one_minus_pow(p.eps, in.m);
}

inline double analytic_sir(const closed_form_inputs& in) {
  detail::check_closed_form(in);
  const auto p = table1_params(in.mu, in.k);
  const double den = detail::interference_power(in, p);
  detail::require_param(den > 0.0, "degenerate SIR denominator (eps^M == alpha^M)");
  return detail::signal_power(in, p) / den;
}

/// Large-array form exp(mu (2 - mu) M / K).
inline double analytic_sir_approx(const closed_form_inputs& in) {
  detail::check_closed_form(in);
  return std::exp(in.mu * (2.0 - in.mu) * in.m / in.k);
}

inline double analytic_sinr(const closed_form_inputs& in) {
  detail::check_closed_form(in);
  const auto p = table1_params(in.mu, in.k);
  const double den = detail::interference_power(in, p) + analytic_noise_term(in);
  detail::require_param(den > 0.0, "degenerate SINR denominator");
  return detail::signal_power(in, p) / den;
}

inline double analytic_sinr_approx(const closed_form_inputs& in) {
  detail::check_closed_form(in);
  const double iui = std::exp(-in.mu * (2.0 - in.mu) * in.m / in.k);
  const double noise = in.n0 / in.k * (in.mu / (2.0 - in.mu));
  return 1.0 / (iui + noise);
}

/// E||W||_F^2 = K/(K-1) * mu/(2-mu) * (1 - eps^M), valid for mu in [0, 2).
inline double expected_w_norm(const closed_form_inputs& in) {
  detail::require_param(in.k >= 2, "expected_w_norm needs k >= 2");
  detail::require_param(in.mu >= 0.0 && in.mu < 2.0, "expected_w_norm needs mu in [0, 2)");
  if (in.mu == 0.0) return 0.0;
  const auto p = table1_params(in.mu, in.k);
  return in.k / (in.k - 1.0) * (in.mu / (2.0 - in.mu)) * detail::one_minus_pow(p.eps, in.m);
}

/// Default search interval for the relaxation parameter.
inline constexpr double kMuLo = 0.01;
inline constexpr double kMuHi = 1.99;

/// mu0 = (K / 2M) log(4 M SNR), clamped into [lo, hi].
inline double step_size_recommended(int m, int k, double snr, double lo = kMuLo, double hi = kMuHi) {
  detail::require_param(m >= 1 && k >= 1, "step size needs m, k >= 1");
  const double arg = 4.0 * m * snr;
  detail::require_param(arg > 1.0, "recommended step size needs 4 M SNR > 1");
  const double mu0 = 0.5 * static_cast<double>(k) / m * std::log(arg);
  return std::clamp(mu0, lo, hi);
}

/// argmax of the closed-form SINR over mu in [lo, hi].
///
/// A 200-point grid locates the best cell, then golden-section refines inside
/// the neighbouring cells to a bracket width of tol.
inline double step_size_optimal(int m, int k, double snr, double lo = kMuLo, double hi = kMuHi,
                                double tol = 1e-4) {
  detail::require_param(k >= 2, "step_size_optimal needs k >= 2");
  detail::require_param(snr > 0.0, "snr must be positive");
  detail::require_param(0.0 < lo && lo < hi && hi < 2.0, "search interval must lie in (0, 2)");
  const double n0 = 1.0 / snr;
  auto f = [&](double mu) { return analytic_sinr({m, k, mu, n0}); };

  constexpr int kGrid = 200;
  const double step = (hi - lo) / kGrid;
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kGrid; ++i) {
    const double v = f(lo + i * step);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }

  double a = lo + std::max(best - 1, 0) * step;
  double b = lo + std::min(best + 1, kGrid) * step;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  double mu_star = 0.5 * (a + b);
  if (f(mu_star) < best_val) mu_star = lo + best * step;

  if (4.0 * m * snr > 1.0) {
    const double mu0 = step_size_recommended(m, k, snr, lo, hi);
    if (f(mu0) > f(mu_star)) mu_star = mu0;
  }
  return mu_star;
}

}  // namespace daisy
