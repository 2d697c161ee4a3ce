#pragma once

// Interconnect rate, complexity, latency and memory of a centralized
// base station versus a daisy-chain of remote processing units (RPUs).

#include "daisy/errors.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace daisy {

/// Strongly typed scalar; only same-unit addition and scaling are allowed.
template <class Tag>
struct quantity {
  double value = 0.0;

  constexpr quantity operator+(quantity o) const { return {value + o.value}; }
  constexpr quantity operator-(quantity o) const { return {value - o.value}; }
  constexpr quantity operator*(double s) const { return {value * s}; }
  constexpr double operator/(quantity o) const { return value / o.value; }
  constexpr auto operator<=>(const quantity&) const = default;
};

struct seconds_tag {};
struct bits_tag {};
struct ops_tag {};
struct bit_rate_tag {};
struct op_rate_tag {};

using seconds = quantity<seconds_tag>;
using bits = quantity<bits_tag>;
using ops = quantity<ops_tag>;                // complex multiplications
using bits_per_second = quantity<bit_rate_tag>;
using ops_per_second = quantity<op_rate_tag>;

inline bits_per_second operator/(bits b, seconds t) { return {b.value / t.value}; }
inline ops_per_second operator/(ops o, seconds t) { return {o.value / t.value}; }

struct numerology {
  int n_u = 3300;
  int n_prb = 275;
  int n_sc_prb = 12;
  seconds t_ofdm{1.0 / 120e3};

  /// 5G NR worst case at 120 kHz subcarrier spacing.
  static numerology nr_worst_case() { return {}; }

  [[nodiscard]] seconds t_prb() const { return {t_ofdm.value / n_prb}; }

  void validate() const {
    detail::require_param(n_u > 0 && n_prb > 0 && n_sc_prb > 0 && t_ofdm.value > 0.0,
                          "numerology parameters must be positive");
    detail::require_param(n_u == n_prb * n_sc_prb, "n_u must equal n_prb * n_sc_prb");
  }
};

struct hardware_params {
  int w = 12;    // centralized sample width
  int w_a = 12;  // formulation matrix entries
  int w_d = 12;  // filtering / precoding data
  int w_h = 12;  // stored CSI and weights
  seconds t_clk{1e-9};
  int n_mult = 8;
  seconds t_trans{100e-9};
  int m_rpu = 4;  // antennas per RPU
  // Express T_OFDM in whole clock cycles when sizing the filtering buffer.
  bool buffer_clock_quantized = true;

  void validate() const {
    detail::require_param(w > 0 && w_a > 0 && w_d > 0 && w_h > 0, "bit widths must be positive");
    detail::require_param(t_clk.value > 0.0 && t_trans.value >= 0.0, "timing parameters must be positive");
    detail::require_param(n_mult > 0 && m_rpu > 0, "n_mult and m_rpu must be positive");
  }
};

/// R_c = 2 w M N_u / T_OFDM on the shared bus.
inline bits_per_second rate_centralized(int m, int w, const numerology& nr) {
  detail::require_param(m > 0 && w > 0, "m and w must be positive");
  return bits{2.0 * w * m * nr.n_u} / nr.t_ofdm;
}

struct decentralized_rates {
  bits_per_second form;
  bits_per_second filt;  // also precoding
};

inline decentralized_rates rates_decentralized(int k, const hardware_params& hw, const numerology& nr) {
  detail::require_param(k > 0, "k must be positive");
  return {bits{2.0 * hw.w_a * k * k * nr.n_prb} / nr.t_ofdm, bits{2.0 * hw.w_d * k * nr.n_u} / nr.t_ofdm};
}

struct complexity {
  ops c_form;  // per antenna and PRB
  ops c_filt;  // per antenna, PRB and OFDM symbol
  ops c_prec;
  ops_per_second c_d_ant;
  ops_per_second c_c;
};

inline complexity complexity_report(int m, int k, const numerology& nr) {
  detail::require_param(m > 0 && k > 0, "m and k must be positive");
  complexity out;
  out.c_form = {2.0 * k * k};
  out.c_filt = {static_cast<double>(k) * nr.n_sc_prb};
  out.c_prec = out.c_filt;
  out.c_d_ant = ops{static_cast<double>(k) * nr.n_u} / nr.t_ofdm;
  out.c_c = ops{static_cast<double>(m) * k * nr.n_u} / nr.t_ofdm;
  return out;
}

struct latency {
  int n_rpu = 0;
  seconds t_proc_form;
  seconds lat_form;
  seconds lat_filt;
  double m_limit_transfer_only = 0.0;  // processing time -> 0
  double m_limit_compute_only = 0.0;   // transfer time -> 0
  double m_limit_combined = 0.0;
  double ratio_to_symbol = 0.0;  // Lat_form / T_OFDM
  bool breaches_symbol = false;  // Lat_form >= T_OFDM
};

inline latency latency_report(int m, int k, const hardware_params& hw, const numerology& nr) {
  detail::require_param(m > 0 && k > 0, "m and k must be positive");
  detail::require_param(m % hw.m_rpu == 0, "m must be a multiple of m_rpu");
  latency out;
  out.n_rpu = m / hw.m_rpu;
  out.t_proc_form = hw.t_clk * (2.0 * k * k / hw.n_mult);
  out.lat_filt = hw.t_trans * (out.n_rpu - 1.0);
  out.lat_form = out.t_proc_form * static_cast<double>(m) + out.lat_filt;
  out.m_limit_transfer_only = hw.m_rpu * (nr.t_ofdm / hw.t_trans);
  out.m_limit_compute_only = nr.t_ofdm / out.t_proc_form;
  out.m_limit_combined = nr.t_ofdm / (out.t_proc_form + hw.t_trans * (1.0 / hw.m_rpu));
  out.ratio_to_symbol = out.lat_form / nr.t_ofdm;
  out.breaches_symbol = out.ratio_to_symbol >= 1.0;
  return out;
}

struct memory {
  bits m_h;
  bits m_inv;
  bits m_w;       // per antenna
  bits m_buffer;  // per RPU
  bits m_central;
  bits m_daisy;
};

inline memory memory_report(int m, int k, const hardware_params& hw, const numerology& nr, seconds lat_filt) {
  detail::require_param(m > 0 && k > 0, "m and k must be positive");
  memory out;
  out.m_h = {2.0 * hw.w_h * m * k * nr.n_prb};
  out.m_inv = {2.0 * hw.w_h * k * k * nr.n_prb};
  out.m_w = {2.0 * hw.w_h * k * nr.n_prb};
  seconds symbol = nr.t_ofdm;
  if (hw.buffer_clock_quantized) symbol = hw.t_clk * std::floor(nr.t_ofdm / hw.t_clk);
  out.m_buffer = {2.0 * hw.w_d * k * nr.n_u * (lat_filt / symbol)};
  out.m_central = out.m_h + out.m_inv;
  out.m_daisy = out.m_w * static_cast<double>(m);
  return out;
}

struct cost_report {
  int m = 0;
  int k = 0;
  bits_per_second r_c;
  decentralized_rates r_d;
  complexity c;
  latency lat;
  memory mem;
};

inline cost_report evaluate_cost(int m, int k, const hardware_params& hw = {},
                                 const numerology& nr = numerology::nr_worst_case()) {
  hw.validate();
  nr.validate();
  cost_report out;
  out.m = m;
  out.k = k;
  out.r_c = rate_centralized(m, hw.w, nr);
  out.r_d = rates_decentralized(k, hw, nr);
  out.c = complexity_report(m, k, nr);
  out.lat = latency_report(m, k, hw, nr);
  out.mem = memory_report(m, k, hw, nr, out.lat.lat_filt);
  return out;
}

struct scenario {
  int m;
  int k;
};

inline std::vector<scenario> default_scenarios() { return {{32, 4}, {64, 8}, {128, 12}, {256, 12}}; }

/// Half-up rounding to a fixed number of decimals, rendered as text.
inline std::string round_half_up(double x, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // Absorb binary representation error so that e.g. 0.125 -> 0.13.
  const double r = std::floor(x * scale * (1.0 + 1e-12) + 0.5) / scale;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, r);
  return buf;
}

struct table_row {
  std::string label;
  std::vector<std::string> cells;
};

struct cost_table {
  std::string title;
  std::string unit;
  std::vector<table_row> rows;
};

/// The four comparison tables (rates, complexity, latency, memory) in display units.
inline std::vector<cost_table> build_tables(const std::vector<scenario>& scenarios, const hardware_params& hw = {},
                                            const numerology& nr = numerology::nr_worst_case()) {
  std::vector<cost_report> reports;
  for (const auto& s : scenarios) reports.push_back(evaluate_cost(s.m, s.k, hw, nr));

  auto row = [&](std::string label, int decimals, auto&& value) {
    table_row r{std::move(label), {}};
    for (const auto& rep : reports) r.cells.push_back(round_half_up(value(rep), decimals));
    return r;
  };
  auto header = [&] {
    table_row m_row{"M", {}};
    table_row k_row{"K", {}};
    for (const auto& s : scenarios) {
      m_row.cells.push_back(std::to_string(s.m));
      k_row.cells.push_back(std::to_string(s.k));
    }
    return std::vector<table_row>{m_row, k_row};
  };

  std::vector<cost_table> tables;

  cost_table rates{"Inter-connection data-rate", "Gb/s", header()};
  rates.rows.push_back(row("R_d,form", 2, [](const cost_report& r) { return r.r_d.form.value / 1e9; }));
  rates.rows.push_back(row("R_d,filt/prec", 2, [](const cost_report& r) { return r.r_d.filt.value / 1e9; }));
  rates.rows.push_back(row("R_c", 2, [](const cost_report& r) { return r.r_c.value / 1e9; }));
  tables.push_back(rates);

  cost_table comp{"Computational complexity", "GOPS", header()};
  comp.rows.push_back(row("C_d,ant", 2, [](const cost_report& r) { return r.c.c_d_ant.value / 1e9; }));
  comp.rows.push_back(row("C_c", 2, [](const cost_report& r) { return r.c.c_c.value / 1e9; }));
  tables.push_back(comp);

  cost_table lat{"Latency", "us", header()};
  lat.rows.push_back(row("Lat (us)", 2, [](const cost_report& r) { return r.lat.lat_form.value * 1e6; }));
  lat.rows.push_back(row("Lat/T_OFDM", 2, [](const cost_report& r) { return r.lat.ratio_to_symbol; }));
  tables.push_back(lat);

  cost_table mem{"Memory requirement", "kbits", header()};
  mem.rows.push_back(row("M_w (ant)", 1, [](const cost_report& r) { return r.mem.m_w.value / 1e3; }));
  mem.rows.push_back(row("M_buffer (RPU)", 1, [](const cost_report& r) { return r.mem.m_buffer.value / 1e3; }));
  mem.rows.push_back(row("M_H", 1, [](const cost_report& r) { return r.mem.m_h.value / 1e3; }));
  mem.rows.push_back(row("M_inv", 1, [](const cost_report& r) { return r.mem.m_inv.value / 1e3; }));
  tables.push_back(mem);

  return tables;
}

/// Aligned plain-text rendering.
inline std::string tables_to_text(const std::vector<cost_table>& tables) {
  std::string out;
  char buf[64];
  for (const auto& t : tables) {
    out += t.title + " [" + t.unit + "]\n";
    for (const auto& r : t.rows) {
      std::snprintf(buf, sizeof buf, "%-16s", r.label.c_str());
      out += buf;
      for (const auto& c : r.cells) {
        std::snprintf(buf, sizeof buf, "%10s", c.c_str());
        out += buf;
      }
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

}  // namespace detail

/// Long-format CSV: table,unit,quantity,m,k,value. Fields containing commas or quotes are quoted.
inline std::string tables_to_csv(const std::vector<cost_table>& tables) {
  using detail::csv_field;
  std::string out = "table,unit,quantity,m,k,value\n";
  for (const auto& t : tables) {
    const auto& ms = t.rows.at(0).cells;
    const auto& ks = t.rows.at(1).cells;
    for (std::size_t r = 2; r < t.rows.size(); ++r)
      for (std::size_t c = 0; c < t.rows[r].cells.size(); ++c)
        out += csv_field(t.title) + "," + csv_field(t.unit) + "," + csv_field(t.rows[r].label) + "," + ms[c] + "," +
               ks[c] + "," + t.rows[r].cells[c] + "\n";
  }
  return out;
}

}  // namespace daisy
