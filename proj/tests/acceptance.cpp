// Acceptance run: one PASS/FAIL line per criterion, details indented below it.
// Exit status is the number of failed criteria.

#include "daisy/chain_sim.hpp"
#include "daisy/closed_form.hpp"
#include "daisy/cost_model.hpp"
#include "daisy/equalizers.hpp"
#include "daisy/experiments.hpp"
#include "daisy/metrics.hpp"
#include "daisy/moments.hpp"
#include "daisy/montecarlo.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

using namespace daisy;

namespace {

constexpr int kWorkers = 0;

struct criterion {
  int id;
  std::string title;
  std::function<bool(std::vector<std::string>&)> run;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <class... Args>
std::string fmtn(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

sinr_accumulator simulate(int m, int k, equalizer_kind kind, double mu, long trials, std::uint64_t seed,
                          int n_iter = 1) {
  sinr_experiment ex;
  ex.m = m;
  ex.k = k;
  ex.kind = kind;
  ex.mu = mu;
  ex.n_iter = n_iter;
  ex.trials = trials;
  ex.seed = seed;
  ex.workers = kWorkers;
  return simulate_sinr(ex);
}

bool tables(std::vector<std::string>& notes) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string first;
  const int bad = table_mismatches(build_tables(default_scenarios()), &first);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  notes.push_back(fmtn("%d of %zu published rows differ%s; %.3f s", bad, published_table_cells().size(),
                       first.empty() ? "" : (" (first: " + first + ")").c_str(), secs));
  return bad == 0 && secs < 1.0;
}

bool sir_anchor(std::vector<std::string>& notes) {
  const closed_form_inputs in{128, 16, 1.0, 0.0};
  const double exact = to_db(analytic_sir(in));
  const double approx = to_db(analytic_sir_approx(in));
  notes.push_back(fmtn("analytic_sir = %.4f dB, analytic_sir_approx = %.4f dB", exact, approx));
  bool ok = std::abs(exact - 36.2) <= 0.05 && round_half_up(approx, 1) == "34.7";
  const int dims[3][2] = {{128, 16}, {256, 32}, {512, 64}};
  const double stated[3] = {0.04, 0.02, 0.01};
  for (int i = 0; i < 3; ++i) {
    const closed_form_inputs x{dims[i][0], dims[i][1], 1.0, 0.0};
    const double e = to_db(analytic_sir(x));
    const double rel = (e - to_db(analytic_sir_approx(x))) / e;
    notes.push_back(fmtn("(%d,%d): relative dB error %.4f%% (stated %.0f%%)", dims[i][0], dims[i][1], 100 * rel,
                         100 * stated[i]));
    ok = ok && std::round(100 * rel) == std::round(100 * stated[i]);
  }
  return ok;
}

bool sinr_anchor(std::vector<std::string>& notes) {
  const closed_form_inputs in{128, 16, 0.4, 1.0};
  const double exact = to_db(analytic_sinr(in));
  const double approx = to_db(analytic_sinr_approx(in));
  const std::string e2 = round_half_up(exact, 2);
  const std::string a2 = round_half_up(approx, 2);
  const double rel = (std::stod(a2) - std::stod(e2)) / std::stod(e2);
  notes.push_back(fmtn("exact form %.4f dB -> %s, approximate form %.4f dB -> %s, relative difference %.2f%%", exact,
                       e2.c_str(), approx, a2.c_str(), 100 * rel));
  return e2 == "16.60" && a2 == "16.66" && std::abs(rel - 0.0036) < 0.00005;
}

bool closed_form_vs_mc(std::vector<std::string>& notes) {
  const int dims[3][2] = {{32, 4}, {64, 8}, {128, 16}};
  const double snrs[4] = {-10.0, 0.0, 10.0, 20.0};
  double worst = 0.0;
  bool ok = true;
  for (const auto& d : dims)
    for (double mu : {0.4, 0.7, 1.0}) {
      const auto acc = simulate(d[0], d[1], equalizer_kind::cd, mu, 10000, 400 + d[0]);
      double row_worst = 0.0;
      for (double s : snrs) {
        const double n0 = 1.0 / from_db(s);
        const double gap = std::abs(acc.report(n0).mean_sinr_db() - to_db(analytic_sinr({d[0], d[1], mu, n0})));
        row_worst = std::max(row_worst, gap);
      }
      worst = std::max(worst, row_worst);
      ok = ok && row_worst <= 0.3;
      notes.push_back(fmtn("(%d,%d) mu=%.1f: max |empirical - analytic| = %.3f dB", d[0], d[1], mu, row_worst));
    }
  notes.push_back(fmt("worst %.3f dB (limit 0.3)", worst));
  return ok;
}

bool baselines(std::vector<std::string>& notes) {
  const double snrs[4] = {20.0, 10.0, 0.0, -10.0};
  const double zf_ref[4] = {40.5, 30.5, 20.5, 10.5};
  const double mrc_ref[4] = {9.0, 9.0, 8.8, 6.8};
  const auto zf = simulate(128, 16, equalizer_kind::zf, 1.0, 10000, 501);
  const auto mrc = simulate(128, 16, equalizer_kind::mrc, 1.0, 10000, 502);
  bool ok = true;
  for (int i = 0; i < 4; ++i) {
    const double n0 = 1.0 / from_db(snrs[i]);
    const double z = zf.report(n0).mean_sinr_db();
    const double r = mrc.report(n0).mean_sinr_db();
    ok = ok && std::abs(z - zf_ref[i]) <= 0.5 && std::abs(r - mrc_ref[i]) <= 0.5;
    notes.push_back(fmtn("SNR %+3.0f dB: ZF %.2f dB (ref %.1f), MRC %.2f dB (ref %.1f)", snrs[i], z, zf_ref[i], r,
                         mrc_ref[i]));
  }
  return ok;
}

bool w_norm(std::vector<std::string>& notes) {
  bool ok = true;
  double worst = 0.0;
  for (int m : {32, 128})
    for (int k : {4, 16})
      for (double mu : {0.2, 1.0, 1.8}) {
        const auto rep = simulate(m, k, equalizer_kind::cd, mu, 10000, 600 + m + k).report(0.0);
        const double rel = std::abs(rep.w_norm_sq / expected_w_norm({m, k, mu, 0.0}) - 1.0);
        worst = std::max(worst, rel);
        if (rel > 0.02) {
          ok = false;
          notes.push_back(fmtn("(%d,%d) mu=%.1f: relative error %.2f%%", m, k, mu, 100 * rel));
        }
      }
  notes.push_back(fmt("worst relative error over 12 cells %.3f%% (limit 2%%)", 100 * worst));
  return ok;
}

bool moments(std::vector<std::string>& notes) {
  constexpr long trials = 100000;
  bool ok = true;
  int cells = 0, failed = 0;
  auto check = [&](const std::string& what, const cmatrix& est, const cmatrix& ref) {
    ++cells;
    const double err = entrywise_rel_error(est, ref);
    if (err > 0.02) {
      ok = false;
      ++failed;
      notes.push_back(what + fmt(": worst entrywise error %.2f%% of max |reference|", 100 * err));
    }
  };
  std::uint64_t seed = 700;
  for (int k : {4, 8}) {
    const auto nm = estimate_normalized_moments(k, trials, seed++, kWorkers);
    const auto ref = expected_normalized_moments(k);
    check(fmtn("K=%d E{hh^H/|h|^2}", k), nm.hh_norm2, ref.hh_norm2);
    check(fmtn("K=%d E{hh^H/|h|^4}", k), nm.hh_norm4, ref.hh_norm4);
    check(fmtn("K=%d E{hh^H D hh^H/|h|^4}", k), nm.fourth, ref.fourth);
    std::vector<double> d(k);
    for (int i = 0; i < k; ++i) d[i] = (i + 1.0) / k;
    for (double mu : {0.5, 1.0}) {
      check(fmtn("K=%d mu=%.1f E{QDQ}", k, mu), moment_oracle_q(d, mu, k, trials, seed++, kWorkers),
            expected_qdq(d, mu));
      for (int m : {1, 8, 32}) {
        const auto r = moment_oracle_a(d, mu, m, k, trials, seed++, kWorkers);
        check(fmtn("K=%d mu=%.1f m=%d E{A^H D A}", k, mu, m), r.ada, expected_ada(d, mu, m));
        check(fmtn("K=%d mu=%.1f m=%d E{A}", k, mu, m), r.a, expected_a(mu, m, k));
      }
    }
  }
  notes.push_back(fmtn("%d of %d cells outside 2%% at %ld trials", failed, cells, trials));
  return ok;
}

bool structural(std::vector<std::string>& notes) {
  double resid = 0, stream = 0, product = 0, recip = 0, chain = 0;
  bool monotone = true;
  const counter_rng root(800);
  for (int t = 0; t < 50; ++t) {
    counter_rng rng = root.split(t);
    const int k = 1 + static_cast<int>(rng() % 12);
    const int m = 4 * (1 + static_cast<int>(rng() % 24));
    const double mu = t < 2 ? 2.0 * t : 2.0 * rng.uniform();
    channel_realization ch{cmatrix(m, k), 0};
    draw_iid_channel(ch.h, rng);
    const auto fwd = cd_formulate(ch, mu, antenna_order::forward);
    resid = std::max(resid, max_abs_diff(fwd.residual, identity(k) - (fwd.w.adjoint() * ch.h).conjugate()));

    cmatrix y(m, 1);
    fill_complex_normal(y, 1.0, rng);
    stream = std::max(stream, max_abs_diff(kaczmarz_estimate_stream(ch, y, mu, antenna_order::reverse),
                                           fwd.w.adjoint() * y));
    const auto rev = cd_formulate(ch, mu, antenna_order::reverse);
    stream = std::max(stream, max_abs_diff(kaczmarz_estimate_stream(ch, y, mu, antenna_order::forward),
                                           rev.w.adjoint() * y));

    // w_m = mu_m Q_1 ... Q_{m-1} h_m with Q_i = I - mu_i h_i h_i^H, built left to right.
    cmatrix prefix = identity(k);
    cmatrix w_prod(m, k);
    for (int i = 0; i < m; ++i) {
      const cvector h = ch.h.row(i).transpose();
      w_prod.row(i) = (fwd.per_antenna_mu[i] * (prefix * h)).transpose();
      prefix = prefix * (identity(k) - fwd.per_antenna_mu[i] * h * h.adjoint());
    }
    product = std::max(product, max_abs_diff(w_prod, fwd.w));

    const auto pre = precoder_from_equalizer(fwd, 1e12);
    recip = std::max(recip, max_abs_diff(equivalent_channel_dl(ch, pre).e, equivalent_channel_ul(fwd, ch).e.transpose()));

    cmatrix a = identity(k), w = cmatrix::Zero(m, k);
    cvector hv(k), scratch(k);
    double prev = a.norm();
    for (int i = 0; i < m; ++i) {
      hv = ch.h.row(i).transpose();
      cd_step(a, w.row(i), hv, fwd.per_antenna_mu[i], scratch);
      monotone = monotone && a.norm() <= prev * (1.0 + 1e-10);
      prev = a.norm();
    }

    chain_config cc;
    cc.m = m;
    daisy_chain dc = build_chain(cc, ch);
    const auto f = run_formulation_pass(dc, mu);
    chain = std::max(chain, max_abs_diff(f.equalizers[0].w, fwd.w));
    chain = std::max(chain, max_abs_diff(dc.residual[0], fwd.residual));
    cmatrix ys(m, 4);
    fill_complex_normal(ys, 1.0, rng);
    chain = std::max(chain, max_abs_diff(run_filtering_pass(dc, ys).x_hat[0], apply_equalizer(fwd, ys)));
    cmatrix xs(k, 4);
    fill_complex_normal(xs, 1.0, rng);
    chain = std::max(chain, max_abs_diff(run_precoding_pass(dc, xs).y[0],
                                         apply_precoder(precoder_set{fwd.w.conjugate(), 1.0}, xs)));
  }
  notes.push_back(fmtn("A_M identity %.2e, Kaczmarz stream %.2e, product form %.2e", resid, stream, product));
  notes.push_back(fmtn("E^d = (E^u)^T %.2e, chain vs monolithic %.2e, ||A_m||_F nonincreasing: %s", recip, chain,
                       monotone ? "yes" : "no"));
  const double tol = 1e-10;
  return resid <= tol && stream <= tol && product <= tol && recip <= tol && chain <= tol && monotone;
}

bool multi_iteration(std::vector<std::string>& notes) {
  const double n0 = 1.0;
  sinr_experiment ex;
  ex.m = 64;
  ex.k = 8;
  ex.n_iter = 3;
  ex.trials = 10000;
  ex.seed = 900;
  ex.workers = kWorkers;
  std::vector<double> best(3, 0.0), best_mu(3, 0.0);
  for (int g = 1; g < 40; ++g) {
    ex.mu = 0.05 * g;
    const auto passes = simulate_sinr_passes(ex);
    for (int n = 0; n < 3; ++n) {
      const double s = passes[n].report(n0).mean_sinr;
      if (s > best[n]) {
        best[n] = s;
        best_mu[n] = ex.mu;
      }
    }
  }
  const double zf = simulate(64, 8, equalizer_kind::zf, 1.0, 10000, 901).report(n0).mean_sinr;
  for (int n = 0; n < 3; ++n)
    notes.push_back(fmtn("n_iter=%d: grid max %.3f dB at mu=%.2f, gap to ZF %.3f dB", n + 1, to_db(best[n]),
                         best_mu[n], to_db(zf) - to_db(best[n])));
  notes.push_back(fmt("ZF %.3f dB", to_db(zf)));
  return best[0] <= best[1] && best[1] <= best[2] && best[2] < zf;
}

bool ber(std::vector<std::string>& notes) {
  ber_settings base;
  base.m = 32;
  base.k = 4;
  base.bits_per_point = 100000;
  base.qam_order = 16;
  base.seed = 1000;
  base.workers = kWorkers;

  ber_settings zf = base;
  zf.kind = equalizer_kind::zf;
  const auto noiseless = ber_at(zf, std::numeric_limits<double>::infinity());
  notes.push_back(fmtn("ZF noiseless: %ld errors in %ld bits", noiseless.errors, noiseless.bits));
  bool ok = noiseless.errors == 0;

  const std::vector<double> snr{0.0, 5.0, 10.0, 15.0};
  const auto cd = ber_montecarlo(base, snr);
  std::string curve;
  for (std::size_t i = 0; i < cd.size(); ++i) {
    curve += fmtn(" %g dB: %.3e (%ld errors)", cd[i].snr_db, cd[i].ber, cd[i].errors);
    if (i && !(cd[i].ber < cd[i - 1].ber)) ok = false;
  }
  notes.push_back("CD(mu*) BER" + curve);

  ber_settings unit = base;
  unit.policy = step_size_policy::fixed(1.0);
  const auto u0 = ber_at(unit, 0.0);
  notes.push_back(fmtn("0 dB: CD(mu*=%.3f) %.3e vs CD(mu=1) %.3e", cd[0].mu, cd[0].ber, u0.ber));
  ok = ok && cd[0].ber <= u0.ber;

  std::vector<double> grid;
  for (double s = -14.0; s <= -2.0; s += 0.5) grid.push_back(s);
  double gaps[2];
  for (int noisy = 0; noisy < 2; ++noisy) {
    ber_settings z = zf, c = base;
    z.noisy_csi = c.noisy_csi = noisy == 1;
    const auto ref = ber_montecarlo(z, grid);
    const auto p = ber_at(c, -5.0);
    gaps[noisy] = snr_gap_db(ref, p);
    notes.push_back(fmtn("%s CSI at -5 dB: CD BER %.3e, SNR gap to ZF %.3f dB", noisy ? "noisy" : "ideal", p.ber,
                         gaps[noisy]));
  }
  notes.push_back(fmt("gap difference %.3f dB (limit 1 dB)", std::abs(gaps[1] - gaps[0])));
  return ok && std::abs(gaps[1] - gaps[0]) < 1.0;
}

}  // namespace

int main() {
  const std::vector<criterion> criteria{
      {1, "cost tables reproduce every published cell", tables},
      {2, "SIR closed-form anchor and approximation error", sir_anchor},
      {3, "SINR closed-form anchor", sinr_anchor},
      {4, "closed-form SINR matches Monte Carlo within 0.3 dB", closed_form_vs_mc},
      {5, "ZF and MRC baseline anchors", baselines},
      {6, "E||W||_F^2 closed form within 2%", w_norm},
      {7, "moment identities within 2% entrywise", moments},
      {8, "structural identities at machine precision", structural},
      {9, "multi-pass SINR nondecreasing and below ZF", multi_iteration},
      {10, "BER properties", ber},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    std::vector<std::string> notes;
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = c.run(notes);
    } catch (const std::exception& e) {
      notes.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %d %s (%.1f s)\n", ok ? "PASS" : "FAIL", c.id, c.title.c_str(), secs);
    for (const auto& n : notes) std::printf("    %s\n", n.c_str());
    std::fflush(stdout);
    failed += ok ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
