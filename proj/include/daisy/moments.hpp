#pragma once

// Second-order statistics of the projection Q = I - mu h h^H / ||h||^2 with
// h ~ CN(0, I_K), and of the residual product A_m = Q_1 Q_2 ... Q_m.
// Closed forms next to Monte Carlo estimators used to check them.

#include "daisy/closed_form.hpp"
#include "daisy/errors.hpp"
#include "daisy/linalg.hpp"
#include "daisy/metrics.hpp"
#include "daisy/montecarlo.hpp"
#include "daisy/random.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace daisy {

inline cmatrix diagonal_matrix(std::span<const double> d) {
  cmatrix out = cmatrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) out(i, i) = d[i];
  return out;
}

/// E{Q D Q^H} = alpha D + beta Tr(D) I.
inline cmatrix expected_qdq(std::span<const double> d, double mu) {
  const int k = static_cast<int>(d.size());
  const moment_params p = table1_params(mu, k);
  double trace = 0.0;
  for (double x : d) trace += x;
  return p.alpha * diagonal_matrix(d) + p.beta * trace * identity(k);
}

/// E{A_m D A_m^H} = alpha^m (D - D_a) + eps^m D_a with D_a = Tr(D)/K I.
inline cmatrix expected_ada(std::span<const double> d, double mu, int m) {
  detail::require_param(m >= 0, "m must be >= 0");
  const int k = static_cast<int>(d.size());
  const moment_params p = table1_params(mu, k);
  double trace = 0.0;
  for (double x : d) trace += x;
  const cmatrix da = (trace / k) * identity(k);
  return std::pow(p.alpha, m) * (diagonal_matrix(d) - da) + std::pow(p.eps, m) * da;
}

/// E{A_m} = nu^m I.
inline cmatrix expected_a(double mu, int m, int k) {
  return std::pow(table1_params(mu, k).nu, m) * identity(k);
}

namespace detail {

inline void draw_user_vector(cvector& h, counter_rng& rng) {
  for (Eigen::Index i = 0; i < h.size(); ++i) h(i) = rng.complex_normal(1.0);
}

inline void require_moment_args(std::span<const double> d, int k, long trials) {
  require_param(k >= 2, "k must be >= 2");
  require_dims(static_cast<int>(d.size()) == k, "D must have K diagonal entries");
  require_param(trials >= 1, "trials must be >= 1");
}

}  // namespace detail

/// Monte Carlo estimate of E{Q D Q^H}.
inline cmatrix moment_oracle_q(std::span<const double> d, double mu, int k, long trials, std::uint64_t seed,
                               int workers = 1) {
  detail::require_moment_args(d, k, trials);
  const cmatrix dm = diagonal_matrix(d);
  const matrix_sum zero(k, k);
  auto trial = [&](counter_rng& rng, long, matrix_sum& acc) {
    cvector h(k);
    counter_rng ch = substream(rng, stream_id::channel);
    detail::draw_user_vector(h, ch);
    const cmatrix q = identity(k) - (mu / h.squaredNorm()) * (h * h.adjoint());
    acc.add(q * dm * q.adjoint());
  };
  return run_trials(trials, seed, workers, zero, trial).mean(trials);
}

/// Monte Carlo estimates of E{A_m D A_m^H} and E{A_m}.
struct residual_moments {
  cmatrix ada;
  cmatrix a;
};

namespace detail {

struct residual_sums {
  matrix_sum ada;
  matrix_sum a;
  void merge(const residual_sums& o) {
    ada.merge(o.ada);
    a.merge(o.a);
  }
};

}  // namespace detail

inline residual_moments moment_oracle_a(std::span<const double> d, double mu, int m, int k, long trials,
                                        std::uint64_t seed, int workers = 1) {
  detail::require_moment_args(d, k, trials);
  detail::require_param(m >= 0, "m must be >= 0");
  const cmatrix dm = diagonal_matrix(d);
  const detail::residual_sums zero{matrix_sum(k, k), matrix_sum(k, k)};
  auto trial = [&](counter_rng& rng, long, detail::residual_sums& acc) {
    counter_rng ch = substream(rng, stream_id::channel);
    cvector h(k);
    cvector ah(k);
    cmatrix a = identity(k);
    for (int i = 0; i < m; ++i) {
      detail::draw_user_vector(h, ch);
      ah.noalias() = (mu / h.squaredNorm()) * (a * h);
      a.noalias() -= ah * h.adjoint();
    }
    acc.ada.add(a * dm * a.adjoint());
    acc.a.add(a);
  };
  const auto sums = run_trials(trials, seed, workers, zero, trial);
  return {sums.ada.mean(trials), sums.a.mean(trials)};
}

/// Scalar/matrix identities of a normalized Gaussian vector h ~ CN(0, I_K).
struct normalized_moments {
  cmatrix hh_norm2;  // E{h h^H / ||h||^2} = I/K
  cmatrix hh_norm4;  // E{h h^H / ||h||^4} = I/(K(K-1))
  cmatrix fourth;    // (k,i): E{|h_k|^2 |h_i|^2 / ||h||^4}; 2/(K(K+1)) on the diagonal, 1/(K(K+1)) off it
};

inline normalized_moments expected_normalized_moments(int k) {
  detail::require_param(k >= 2, "k must be >= 2");
  const double kk = k;
  normalized_moments out;
  out.hh_norm2 = identity(k) / kk;
  out.hh_norm4 = identity(k) / (kk * (kk - 1.0));
  out.fourth = cmatrix::Constant(k, k, 1.0 / (kk * (kk + 1.0)));
  out.fourth.diagonal().setConstant(2.0 / (kk * (kk + 1.0)));
  return out;
}

namespace detail {

struct normalized_sums {
  matrix_sum hh_norm2;
  matrix_sum hh_norm4;
  matrix_sum fourth;
  void merge(const normalized_sums& o) {
    hh_norm2.merge(o.hh_norm2);
    hh_norm4.merge(o.hh_norm4);
    fourth.merge(o.fourth);
  }
};

}  // namespace detail

inline normalized_moments estimate_normalized_moments(int k, long trials, std::uint64_t seed, int workers = 1) {
  detail::require_param(k >= 2, "k must be >= 2");
  detail::require_param(trials >= 1, "trials must be >= 1");
  const detail::normalized_sums zero{matrix_sum(k, k), matrix_sum(k, k), matrix_sum(k, k)};
  auto trial = [&](counter_rng& rng, long, detail::normalized_sums& acc) {
    counter_rng ch = substream(rng, stream_id::channel);
    cvector h(k);
    detail::draw_user_vector(h, ch);
    const double n2 = h.squaredNorm();
    const cmatrix outer = h * h.adjoint();
    acc.hh_norm2.add(outer / n2);
    acc.hh_norm4.add(outer / (n2 * n2));
    cmatrix f(k, k);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) f(r, c) = std::norm(h(r)) * std::norm(h(c)) / (n2 * n2);
    acc.fourth.add(f);
  };
  const auto sums = run_trials(trials, seed, workers, zero, trial);
  return {sums.hh_norm2.mean(trials), sums.hh_norm4.mean(trials), sums.fourth.mean(trials)};
}

/// Entrywise agreement: |est - ref| <= rel * |ref| on nonzero reference entries,
/// and <= rel * max|ref| where the reference entry is zero.
inline bool entrywise_close(const cmatrix& est, const cmatrix& ref, double rel) {
  if (est.rows() != ref.rows() || est.cols() != ref.cols()) return false;
  const double scale = ref.cwiseAbs().maxCoeff();
  for (Eigen::Index r = 0; r < ref.rows(); ++r)
    for (Eigen::Index c = 0; c < ref.cols(); ++c) {
      const double mag = std::abs(ref(r, c));
      const double tol = rel * (mag > 0.0 ? mag : scale);
      if (std::abs(est(r, c) - ref(r, c)) > tol) return false;
    }
  return true;
}

/// Largest entrywise error normalised as in entrywise_close.
inline double entrywise_rel_error(const cmatrix& est, const cmatrix& ref) {
  const double scale = ref.cwiseAbs().maxCoeff();
  double worst = 0.0;
  for (Eigen::Index r = 0; r < ref.rows(); ++r)
    for (Eigen::Index c = 0; c < ref.cols(); ++c) {
      const double mag = std::abs(ref(r, c));
      worst = std::max(worst, std::abs(est(r, c) - ref(r, c)) / (mag > 0.0 ? mag : scale));
    }
  return worst;
}

}  // namespace daisy
