#pragma once

// The six CLI commands as pure functions from a scenario to output files.

#include "daisy/chain_sim.hpp"
#include "daisy/closed_form.hpp"
#include "daisy/config.hpp"
#include "daisy/cost_model.hpp"
#include "daisy/equalizers.hpp"
#include "daisy/metrics.hpp"
#include "daisy/moments.hpp"
#include "daisy/montecarlo.hpp"

#include <chrono>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace daisy {

struct artifact {
  std::string name;
  std::string content;
};

struct command_output {
  std::vector<artifact> files;
  std::string text;  // human-readable summary for stdout
  bool ok = true;    // false only when a validation check failed
  nlohmann::json summary = nlohmann::json::object();
};

namespace detail {

inline double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

inline equalizer_kind parse_kind(const std::string& s) {
  if (s == "zf") return equalizer_kind::zf;
  if (s == "mrc") return equalizer_kind::mrc;
  return equalizer_kind::cd;
}

inline double db_or_nan(double linear) { return linear < 0.0 || std::isnan(linear) ? nan_value() : to_db(linear); }

/// Empirical SINR statistics for one (kind, mu) under the configured CSI mode.
/// Ideal CSI needs a single run for every SNR; noisy CSI ties the CSI error to each SNR.
class sinr_cache {
 public:
  explicit sinr_cache(const scenario_config& c) : cfg_(c) {}

  /// Pooled SINR (linear) after each pass, evaluated at `snr_db`.
  std::vector<double> sinr(int m, int k, equalizer_kind kind, double mu, double snr_db, int n_iter = 1) {
    const double n0 = 1.0 / from_db(snr_db);
    const double csi_n0 = cfg_.csi_kind() == csi_mode::noisy ? n0 : 0.0;
    const auto key = std::make_tuple(m, k, static_cast<int>(kind), kind == equalizer_kind::cd ? mu : 0.0, csi_n0,
                                     kind == equalizer_kind::cd ? n_iter : 1);
    auto it = runs_.find(key);
    if (it == runs_.end()) {
      sinr_experiment ex;
      ex.m = m;
      ex.k = k;
      ex.kind = kind;
      ex.mu = mu;
      ex.n_iter = kind == equalizer_kind::cd ? n_iter : 1;
      ex.trials = cfg_.trials;
      ex.seed = cfg_.seed;
      ex.workers = cfg_.workers;
      ex.csi_n0 = csi_n0;
      it = runs_.emplace(key, simulate_sinr_passes(ex)).first;
    }
    std::vector<double> out;
    for (const auto& acc : it->second) out.push_back(acc.report(n0).mean_sinr);
    return out;
  }

  metrics_report report(int m, int k, equalizer_kind kind, double mu, double snr_db) {
    (void)sinr(m, k, kind, mu, snr_db);
    const double n0 = 1.0 / from_db(snr_db);
    const double csi_n0 = cfg_.csi_kind() == csi_mode::noisy ? n0 : 0.0;
    const auto key = std::make_tuple(m, k, static_cast<int>(kind), kind == equalizer_kind::cd ? mu : 0.0, csi_n0, 1);
    return runs_.at(key).back().report(n0);
  }

 private:
  const scenario_config& cfg_;
  std::map<std::tuple<int, int, int, double, double, int>, std::vector<sinr_accumulator>> runs_;
};

inline std::optional<double> try_step(int m, int k, double snr, bool recommended) {
  try {
    return recommended ? step_size_recommended(m, k, snr) : step_size_optimal(m, k, snr);
  } catch (const parameter_error&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// SINR versus mu for every SNR and pass count, with closed-form reference and mu0 / mu* marker rows.
inline command_output cmd_sweep_mu(const scenario_config& c) {
  csv_table csv(c, {"mu", "snr_db", "n_iter", "sinr_analytic_db", "sinr_empirical_db", "marker"});
  detail::sinr_cache cache(c);
  nlohmann::json peaks = nlohmann::json::array();

  for (double snr_db : c.snr_db) {
    const double snr = from_db(snr_db);
    struct point {
      double mu;
      std::string marker;
    };
    std::vector<point> points;
    for (double mu : c.mu_grid) points.push_back({mu, mu == 0.0 ? "w_zero" : ""});
    if (c.k >= 2) {
      if (auto mu0 = detail::try_step(c.m, c.k, snr, true)) points.push_back({*mu0, "mu0"});
      if (auto mus = detail::try_step(c.m, c.k, snr, false)) points.push_back({*mus, "mu_opt"});
    }
    std::vector<double> best(c.n_iter, -std::numeric_limits<double>::infinity());
    std::vector<double> best_mu(c.n_iter, detail::nan_value());
    for (const auto& p : points) {
      const auto per_pass = cache.sinr(c.m, c.k, equalizer_kind::cd, p.mu, snr_db, c.n_iter);
      double analytic = detail::nan_value();
      if (c.k >= 2 && p.mu > 0.0 && c.csi_kind() == csi_mode::ideal)
        analytic = to_db(analytic_sinr({c.m, c.k, p.mu, 1.0 / snr}));
      for (int n = 1; n <= c.n_iter; ++n) {
        const double emp = to_db(per_pass[n - 1]);
        csv.row({fmt_num(p.mu), fmt_num(snr_db), std::to_string(n), fmt_num(n == 1 ? analytic : detail::nan_value()),
                 fmt_num(emp), p.marker});
        if (p.marker.empty() && emp > best[n - 1]) {
          best[n - 1] = emp;
          best_mu[n - 1] = p.mu;
        }
      }
    }
    for (int n = 1; n <= c.n_iter; ++n)
      peaks.push_back({{"snr_db", snr_db}, {"n_iter", n}, {"peak_sinr_db", best[n - 1]}, {"peak_mu", best_mu[n - 1]}});
  }

  command_output out;
  out.files.push_back({"sweep_mu.csv", csv.text()});
  out.summary["rows"] = csv.rows();
  out.summary["grid_peaks"] = peaks;
  out.text = "sweep-mu: " + std::to_string(csv.rows()) + " rows\n";
  for (const auto& p : peaks)
    out.text += "  snr " + fmt_num(p["snr_db"].get<double>()) + " dB, n_iter " + std::to_string(p["n_iter"].get<int>()) +
                ": peak " + fmt_num(p["peak_sinr_db"].get<double>()) + " dB at mu " +
                fmt_num(p["peak_mu"].get<double>()) + "\n";
  return out;
}

/// SINR versus M/K at fixed M for CD(mu*), CD(mu0), ZF and MRC.
inline command_output cmd_sweep_ratio(const scenario_config& c) {
  csv_table csv(c, {"m_over_k", "k", "snr_db", "mu_opt", "mu0", "sinr_cd_mu_opt", "sinr_cd_mu0", "sinr_zf",
                    "sinr_mrc", "sir_cd_mu_opt"});
  for (int k : c.k_list)
    if (k > c.m) throw config_error("sweep-ratio: k_list entries must not exceed m");
  detail::sinr_cache cache(c);
  for (double snr_db : c.snr_db) {
    const double snr = from_db(snr_db);
    for (int k : c.k_list) {
      // K = 1: no step size is defined and E[1/|h_m|^2] diverges, so the CD SINR is reported as nan;
      // the interference-free SIR is measured at mu = 1.
      const double mu_opt = k >= 2 ? detail::try_step(c.m, k, snr, false).value_or(detail::nan_value()) : detail::nan_value();
      const double mu0 = k >= 2 ? detail::try_step(c.m, k, snr, true).value_or(detail::nan_value()) : detail::nan_value();
      auto cd = [&](double mu) {
        return std::isnan(mu) ? detail::nan_value() : to_db(cache.sinr(c.m, k, equalizer_kind::cd, mu, snr_db)[0]);
      };
      const double sir_mu = k >= 2 ? mu_opt : 1.0;
      const double sir_opt =
          std::isnan(sir_mu) ? detail::nan_value() : cache.report(c.m, k, equalizer_kind::cd, sir_mu, snr_db).mean_sir;
      const double zf = k < c.m ? to_db(cache.sinr(c.m, k, equalizer_kind::zf, 1.0, snr_db)[0]) : detail::nan_value();
      const double mrc = to_db(cache.sinr(c.m, k, equalizer_kind::mrc, 1.0, snr_db)[0]);
      csv.row({fmt_num(static_cast<double>(c.m) / k), std::to_string(k), fmt_num(snr_db), fmt_num(mu_opt),
               fmt_num(mu0), fmt_num(cd(mu_opt)), fmt_num(cd(mu0)), fmt_num(zf), fmt_num(mrc),
               fmt_num(detail::db_or_nan(sir_opt))});
    }
  }
  command_output out;
  out.files.push_back({"sweep_ratio.csv", csv.text()});
  out.summary["rows"] = csv.rows();
  out.text = "sweep-ratio: " + std::to_string(csv.rows()) + " rows (SINR columns in dB)\n";
  return out;
}

/// Uncoded BER curves for each configured detector.
inline command_output cmd_ber(const scenario_config& c) {
  csv_table csv(c, {"detector", "csi", "snr_db", "mu", "ber", "bits", "errors"});
  command_output out;
  for (const auto& det : c.detectors) {
    ber_settings b;
    b.m = c.m;
    b.k = c.k;
    b.kind = detail::parse_kind(det);
    b.policy = c.policy();
    b.n_iter = c.n_iter;
    b.noisy_csi = c.csi_kind() == csi_mode::noisy;
    b.bits_per_point = c.bits_per_point;
    b.symbols_per_frame = c.symbols_per_frame;
    b.qam_order = c.qam_order;
    b.seed = c.seed;
    b.workers = c.workers;
    for (const auto& p : ber_montecarlo(b, c.snr_db)) {
      csv.row({det, c.csi, fmt_num(p.snr_db), fmt_num(p.mu), fmt_num(p.ber), std::to_string(p.bits),
               std::to_string(p.errors)});
      out.text += "  " + det + " snr " + fmt_num(p.snr_db) + " dB: ber " + fmt_num(p.ber) + "\n";
    }
  }
  out.files.push_back({"ber.csv", csv.text()});
  out.summary["rows"] = csv.rows();
  out.text = "ber (" + c.csi + " CSI, " + std::to_string(c.qam_order) + "-QAM):\n" + out.text;
  return out;
}

/// The four cost tables for the reference scenarios under the configured hardware and numerology.
inline command_output cmd_tables(const scenario_config& c) {
  const auto tables = build_tables(default_scenarios(), c.hw, c.nr);
  command_output out;
  out.text = tables_to_text(tables);
  std::string csv = "# daisy_mimo " + std::string(kVersion) + " config_hash=" + config_hash(c) +
                    " seed=" + std::to_string(c.seed) + "\n" + tables_to_csv(tables);
  out.files.push_back({"tables.txt", out.text});
  out.files.push_back({"tables.csv", csv});
  return out;
}

/// Runs formulation, filtering and precoding over `chain_prbs` PRBs and reports timing and link traffic.
inline command_output cmd_chain(const scenario_config& c) {
  if (c.m % c.hw.m_rpu != 0) throw config_error("chain: m must be a multiple of m_rpu");
  if (c.n_iter > 1 && !c.ring) throw config_error("chain: n_iter > 1 requires ring = true");
  chain_config cc = chain_config::from_hardware(c.m, c.hw, c.nr);
  cc.ring = c.ring;
  cc.link_rate = c.link_rate_bps;

  const counter_rng root(c.seed);
  std::vector<channel_realization> prbs;
  std::vector<cmatrix> y, x;
  const double snr_db = c.snr_db.front();
  const double n0 = 1.0 / from_db(snr_db);
  for (int p = 0; p < c.chain_prbs; ++p) {
    const counter_rng trial = root.split(static_cast<std::uint64_t>(p));
    channel_realization ch{cmatrix(c.m, c.k), 0};
    counter_rng r1 = substream(trial, stream_id::channel);
    draw_iid_channel(ch.h, r1);
    cmatrix xp(c.k, c.nr.n_sc_prb);
    counter_rng r2 = substream(trial, stream_id::payload);
    fill_complex_normal(xp, 1.0, r2);
    cmatrix noise(c.m, c.nr.n_sc_prb);
    counter_rng r3 = substream(trial, stream_id::noise);
    fill_complex_normal(noise, n0, r3);
    y.push_back(ch.h * xp + noise);
    x.push_back(xp);
    prbs.push_back(std::move(ch));
  }

  daisy_chain chain = build_chain(cc, prbs);
  const auto form = run_formulation_pass(chain, c.policy(), from_db(snr_db), c.n_iter);
  const auto filt = run_filtering_pass(chain, y);
  const auto prec = run_precoding_pass(chain, x);

  double max_diff = 0.0;
  for (int p = 0; p < c.chain_prbs; ++p) {
    const auto mono = cd_formulate_multi(prbs[p], chain.mu_used, c.n_iter);
    max_diff = std::max(max_diff, max_abs_diff(form.equalizers[p].w, mono.w));
    max_diff = std::max(max_diff, max_abs_diff(filt.x_hat[p], apply_equalizer(mono, y[p])));
    max_diff = std::max(max_diff, max_abs_diff(prec.y[p], apply_precoder(precoder_set{mono.w.conjugate(), 1.0}, x[p])));
  }

  const double symbols = static_cast<double>(c.chain_prbs) / c.nr.n_prb;
  std::string links = "# daisy_mimo " + std::string(kVersion) + " config_hash=" + config_hash(c) +
                      " seed=" + std::to_string(c.seed) + "\nphase,from,to,bits,messages,rate_gbps\n";
  for (const auto* tr : {&form.trace, &filt.trace, &prec.trace}) {
    const int ph = static_cast<int>(tr->phase);
    for (const auto& l : tr->links)
      links += std::string(to_string(tr->phase)) + "," + std::to_string(l.from) + "," + std::to_string(l.to) + "," +
               std::to_string(l.bits[ph]) + "," + std::to_string(l.messages[ph]) + "," +
               fmt_num((bits{l.bits[ph] / symbols} / c.nr.t_ofdm).value / 1e9) + "\n";
  }

  const auto lat = latency_report(c.m, c.k, c.hw, c.nr);
  command_output out;
  out.files.push_back({"chain_formulation.csv", form.trace.to_csv()});
  out.files.push_back({"chain_filtering.csv", filt.trace.to_csv()});
  out.files.push_back({"chain_precoding.csv", prec.trace.to_csv()});
  out.files.push_back({"chain_links.csv", links});
  out.summary = {{"mu", chain.mu_used},
                 {"formulation_latency_ps", form.trace.latency},
                 {"filtering_latency_ps", filt.trace.latency},
                 {"precoding_latency_ps", prec.trace.latency},
                 {"closed_form_latency_ps", to_ps(lat.lat_form)},
                 {"max_abs_diff_vs_monolithic", max_diff}};
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "chain: %d RPUs, %d PRBs, mu %.6g\n"
                "  formulation latency %.6g us (closed form %.6g us)\n"
                "  filtering latency   %.6g us\n"
                "  precoding latency   %.6g us\n"
                "  max |distributed - monolithic| %.3g\n",
                chain.n_rpu(), c.chain_prbs, chain.mu_used, form.trace.latency * 1e-6, lat.lat_form.value * 1e6,
                filt.trace.latency * 1e-6, prec.trace.latency * 1e-6, max_diff);
  out.text = buf;
  return out;
}

struct check_result {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

/// Published cells of the four cost tables for the reference scenarios.
inline const std::map<std::string, std::vector<std::string>>& published_table_cells() {
  static const std::map<std::string, std::vector<std::string>> cells{
      {"R_d,form", {"12.67", "50.69", "114.05", "114.05"}},
      {"R_d,filt/prec", {"38.02", "76.03", "114.05", "114.05"}},
      {"R_c", {"304.13", "608.26", "1216.51", "2433.02"}},
      {"C_d,ant", {"1.58", "3.17", "4.75", "4.75"}},
      {"C_c", {"50.69", "202.75", "608.26", "1216.51"}},
      {"Lat (us)", {"0.83", "2.52", "7.71", "15.52"}},
      {"Lat/T_OFDM", {"0.10", "0.30", "0.92", "1.86"}},
      {"M_w (ant)", {"26.4", "52.8", "79.2", "79.2"}},
      {"M_buffer (RPU)", {"26.6", "114.1", "353.6", "718.5"}},
      {"M_H", {"844.8", "3379.2", "10137.6", "20275.2"}},
      {"M_inv", {"105.6", "422.4", "950.4", "950.4"}},
  };
  return cells;
}

/// Number of published cells that build_tables() does not reproduce exactly.
inline int table_mismatches(const std::vector<cost_table>& tables, std::string* first = nullptr) {
  int bad = 0;
  int seen = 0;
  for (const auto& t : tables)
    for (const auto& r : t.rows) {
      const auto it = published_table_cells().find(r.label);
      if (it == published_table_cells().end()) continue;
      ++seen;
      if (r.cells != it->second) {
        ++bad;
        if (first && first->empty()) *first = r.label;
      }
    }
  return bad + static_cast<int>(published_table_cells().size()) - seen;
}

/// Invariant suite: structural identities at machine precision plus statistical oracles.
inline std::vector<check_result> run_validation(const scenario_config& c) {
  std::vector<check_result> out;
  auto add = [&](std::string name, bool passed, double value, double threshold, std::string note = "") {
    out.push_back({std::move(name), passed, value, threshold, std::move(note)});
  };

  {
    std::string first;
    const int bad = table_mismatches(build_tables(default_scenarios()), &first);
    add("tables_exact", bad == 0, bad, 0, first.empty() ? "" : "first mismatch: " + first);
  }
  {
    const closed_form_inputs in{128, 16, 1.0, 0.0};
    const bool ok = round_half_up(to_db(analytic_sir(in)), 1) == "36.2" &&
                    round_half_up(to_db(analytic_sir_approx(in)), 1) == "34.7";
    add("sir_anchor", ok, to_db(analytic_sir(in)), 36.2);
    const closed_form_inputs in2{128, 16, 0.4, 1.0};
    const bool ok2 = round_half_up(to_db(analytic_sinr(in2)), 2) == "16.60" &&
                     round_half_up(to_db(analytic_sinr_approx(in2)), 2) == "16.66";
    add("sinr_anchor", ok2, to_db(analytic_sinr_approx(in2)), 16.66);
  }

  const counter_rng root(c.seed);
  double resid = 0.0, stream = 0.0, recip = 0.0, chain_diff = 0.0;
  bool monotone = true;
  for (int t = 0; t < 20; ++t) {
    counter_rng rng = root.split(1000 + t);
    const int k = 2 + static_cast<int>(rng() % 7);
    const int m = 4 * (1 + static_cast<int>(rng() % 16));
    const double mu = 2.0 * rng.uniform();
    channel_realization ch{cmatrix(m, k), 0};
    draw_iid_channel(ch.h, rng);
    const auto eq = cd_formulate(ch, mu);
    resid = std::max(resid, max_abs_diff(eq.residual, detail::residual_of(eq.w, ch.h)));
    cmatrix y(m, 1);
    fill_complex_normal(y, 1.0, rng);
    const cvector xs = kaczmarz_estimate_stream(ch, y, mu, antenna_order::reverse);
    stream = std::max(stream, max_abs_diff(xs, eq.w.adjoint() * y));
    const auto pre = precoder_from_equalizer(eq, 1e12);
    recip = std::max(recip, max_abs_diff(equivalent_channel_dl(ch, pre).e, equivalent_channel_ul(eq, ch).e.transpose()));

    cmatrix a = identity(k);
    cmatrix w = cmatrix::Zero(m, k);
    cvector h(k), scratch(k);
    double prev = a.norm();
    for (int i = 0; i < m; ++i) {
      h = ch.h.row(i).transpose();
      cd_step(a, w.row(i), h, eq.per_antenna_mu[i], scratch);
      monotone = monotone && a.norm() <= prev * (1.0 + 1e-12);
      prev = a.norm();
    }

    chain_config cc;
    cc.m = m;
    daisy_chain chain = build_chain(cc, ch);
    const auto f = run_formulation_pass(chain, mu);
    chain_diff = std::max(chain_diff, max_abs_diff(f.equalizers[0].w, eq.w));
    chain_diff = std::max(chain_diff, max_abs_diff(run_filtering_pass(chain, y).x_hat[0], apply_equalizer(eq, y)));
    cmatrix xs_in(k, 3);
    fill_complex_normal(xs_in, 1.0, rng);
    chain_diff = std::max(chain_diff, max_abs_diff(run_precoding_pass(chain, xs_in).y[0],
                                                   apply_precoder(precoder_set{eq.w.conjugate(), 1.0}, xs_in)));
  }
  add("residual_identity", resid <= 1e-10, resid, 1e-10);
  add("kaczmarz_stream", stream <= 1e-10, stream, 1e-10);
  add("reciprocity", recip <= 1e-10, recip, 1e-10);
  add("residual_monotone", monotone, monotone ? 1 : 0, 1);
  add("chain_equivalence", chain_diff <= 1e-12, chain_diff, 1e-12);
  {
    chain_config cc;
    daisy_chain chain = build_chain(cc, gen_iid_channel(32, 4, c.seed));
    const auto lat = run_formulation_pass(chain, 1.0).trace.latency;
    add("chain_latency_ps", lat == 828000, static_cast<double>(lat), 828000);
  }

  {
    const std::vector<double> d{1.0, 2.0, 3.0, 4.0};
    const cmatrix est = moment_oracle_q(d, 0.5, 4, 100000, c.seed, c.workers);
    const double err = entrywise_rel_error(est, expected_qdq(d, 0.5));
    add("moment_qdq", err <= 0.02, err, 0.02);
    const auto ra = moment_oracle_a(d, 0.5, 8, 4, 100000, c.seed + 1, c.workers);
    const double e1 = entrywise_rel_error(ra.ada, expected_ada(d, 0.5, 8));
    const double e2 = entrywise_rel_error(ra.a, expected_a(0.5, 8, 4));
    add("moment_ada", e1 <= 0.02, e1, 0.02);
    add("moment_a", e2 <= 0.02, e2, 0.02);
    const auto nm = estimate_normalized_moments(4, 100000, c.seed + 2, c.workers);
    const auto ref = expected_normalized_moments(4);
    const double e3 = std::max({entrywise_rel_error(nm.hh_norm2, ref.hh_norm2),
                                entrywise_rel_error(nm.hh_norm4, ref.hh_norm4),
                                entrywise_rel_error(nm.fourth, ref.fourth)});
    add("moment_normalized", e3 <= 0.02, e3, 0.02);
  }
  {
    sinr_experiment ex;
    ex.m = 64;
    ex.k = 8;
    ex.mu = 0.7;
    ex.trials = c.trials;
    ex.seed = c.seed;
    ex.workers = c.workers;
    const auto rep = simulate_sinr(ex).report(0.1);
    const double gap = std::abs(rep.mean_sinr_db() - to_db(analytic_sinr({64, 8, 0.7, 0.1})));
    add("sinr_closed_form_vs_monte_carlo", gap <= 0.3, gap, 0.3, "dB");
    const double wn = std::abs(rep.w_norm_sq / expected_w_norm({64, 8, 0.7, 0.0}) - 1.0);
    add("w_norm_closed_form_vs_monte_carlo", wn <= 0.02, wn, 0.02);
  }
  return out;
}

inline command_output cmd_validate(const scenario_config& c) {
  const auto checks = run_validation(c);
  csv_table csv(c, {"check", "status", "value", "threshold", "detail"});
  command_output out;
  for (const auto& ch : checks) {
    csv.row({ch.name, ch.passed ? "PASS" : "FAIL", fmt_num(ch.value), fmt_num(ch.threshold), ch.detail});
    out.text += std::string(ch.passed ? "PASS " : "FAIL ") + ch.name + " value=" + fmt_num(ch.value) +
                " threshold=" + fmt_num(ch.threshold) + (ch.detail.empty() ? "" : " " + ch.detail) + "\n";
    out.ok = out.ok && ch.passed;
    out.summary[ch.name] = ch.passed;
  }
  out.files.push_back({"validate.csv", csv.text()});
  return out;
}

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"sweep-mu", "sweep-ratio", "ber", "tables", "chain", "validate"};
  return names;
}

inline command_output dispatch(const std::string& command, const scenario_config& c) {
  if (command == "sweep-mu") return cmd_sweep_mu(c);
  if (command == "sweep-ratio") return cmd_sweep_ratio(c);
  if (command == "ber") return cmd_ber(c);
  if (command == "tables") return cmd_tables(c);
  if (command == "chain") return cmd_chain(c);
  if (command == "validate") return cmd_validate(c);
  throw config_error("unknown command '" + command + "'");
}

/// Runs a command, writes its files plus <command>.json (run record) under c.out, prints the summary.
/// Returns 0, or 1 when a validation check failed.
inline int run_command(const std::string& command, const scenario_config& c, std::ostream& os) {
  c.validate();
  const auto t0 = std::chrono::steady_clock::now();
  command_output res = dispatch(command, c);
  const double duration = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const output_dir dir(c.out);
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : res.files) {
    dir.write(f.name, f.content);
    files.push_back(f.name);
  }
  nlohmann::json record{{"command", command},   {"version", kVersion},         {"config", to_json(c)},
                        {"config_hash", config_hash(c)}, {"seed", c.seed},    {"duration_s", duration},
                        {"outputs", files},     {"passed", res.ok},            {"summary", res.summary}};
  std::string record_name = command + ".json";
  dir.write(record_name, record.dump(2) + "\n");
  os << res.text;
  return res.ok ? 0 : 1;
}

}  // namespace daisy
