#pragma once

// Scenario configuration (flat JSON keys), run records and atomic output files.

#include "daisy/cost_model.hpp"
#include "daisy/equalizers.hpp"
#include "daisy/errors.hpp"
#include "daisy/qam.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace daisy {

#ifndef DAISY_MIMO_VERSION
#define DAISY_MIMO_VERSION "0.0.0+unknown"
#endif

inline constexpr const char* kVersion = DAISY_MIMO_VERSION;

/// Invalid configuration file, key, value or flag (CLI exit code 2).
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class csi_mode { ideal, noisy };

struct scenario_config {
  int m = 128;
  int k = 16;
  std::vector<double> snr_db{-10.0, 0.0, 10.0, 20.0};
  double mu = 1.0;
  std::string mu_policy = "optimal";  // fixed | recommended | optimal
  std::vector<double> mu_grid = default_mu_grid();
  std::vector<int> k_list{2, 4, 8, 12, 16, 24, 32, 48, 64};
  int n_iter = 1;
  long trials = 10000;
  std::uint64_t seed = 1;
  std::string csi = "ideal";
  int workers = 0;
  std::string out = "out";

  long bits_per_point = 100000;
  int qam_order = 16;
  int symbols_per_frame = 8;
  std::vector<std::string> detectors{"cd", "zf", "mrc"};

  int chain_prbs = 4;
  bool ring = false;
  double link_rate_bps = 400e9;

  numerology nr = numerology::nr_worst_case();
  hardware_params hw;

  static std::vector<double> default_mu_grid() {
    std::vector<double> g;
    for (int i = 0; i < 40; ++i) g.push_back(0.05 * i);
    return g;
  }

  [[nodiscard]] csi_mode csi_kind() const { return csi == "noisy" ? csi_mode::noisy : csi_mode::ideal; }

  [[nodiscard]] step_size_policy policy() const {
    if (mu_policy == "fixed") return step_size_policy::fixed(mu);
    if (mu_policy == "recommended") return step_size_policy::recommended();
    return step_size_policy::numeric_optimal();
  }

  void validate() const {
    auto need = [](bool ok, const std::string& what) {
      if (!ok) throw config_error(what);
    };
    need(k >= 1 && m >= k, "need m >= k >= 1");
    need(!snr_db.empty(), "snr_db must not be empty");
    for (double s : snr_db) need(std::isfinite(s), "snr_db entries must be finite");
    need(mu >= 0.0 && mu < 2.0, "mu must lie in [0, 2)");
    need(mu_policy == "fixed" || mu_policy == "recommended" || mu_policy == "optimal",
         "mu_policy must be fixed, recommended or optimal");
    need(!mu_grid.empty(), "mu_grid must not be empty");
    for (double g : mu_grid) need(g >= 0.0 && g < 2.0, "mu_grid entries must lie in [0, 2)");
    need(!k_list.empty(), "k_list must not be empty");
    for (int kk : k_list) need(kk >= 1, "k_list entries must be >= 1");
    need(n_iter >= 1, "n_iter must be >= 1");
    need(trials >= 1, "trials must be >= 1");
    need(csi == "ideal" || csi == "noisy", "csi must be ideal or noisy");
    need(workers >= 0, "workers must be >= 0 (0 = all cores)");
    need(!out.empty(), "out must not be empty");
    need(bits_per_point >= 1, "bits_per_point must be >= 1");
    need(symbols_per_frame >= 1, "symbols_per_frame must be >= 1");
    try {
      (void)qam_map(qam_order);
    } catch (const std::invalid_argument& e) {
      throw config_error(std::string("qam_order: ") + e.what());
    }
    need(!detectors.empty(), "detectors must not be empty");
    for (const auto& d : detectors) need(d == "cd" || d == "zf" || d == "mrc", "detectors must be cd, zf or mrc");
    need(chain_prbs >= 1, "chain_prbs must be >= 1");
    need(link_rate_bps > 0.0, "link_rate_bps must be positive");
    try {
      nr.validate();
      hw.validate();
    } catch (const std::invalid_argument& e) {
      throw config_error(e.what());
    }
  }
};

inline nlohmann::json to_json(const scenario_config& c) {
  return {
      {"m", c.m},
      {"k", c.k},
      {"snr_db", c.snr_db},
      {"mu", c.mu},
      {"mu_policy", c.mu_policy},
      {"mu_grid", c.mu_grid},
      {"k_list", c.k_list},
      {"n_iter", c.n_iter},
      {"trials", c.trials},
      {"seed", c.seed},
      {"csi", c.csi},
      {"workers", c.workers},
      {"out", c.out},
      {"bits_per_point", c.bits_per_point},
      {"qam_order", c.qam_order},
      {"symbols_per_frame", c.symbols_per_frame},
      {"detectors", c.detectors},
      {"chain_prbs", c.chain_prbs},
      {"ring", c.ring},
      {"link_rate_bps", c.link_rate_bps},
      {"n_u", c.nr.n_u},
      {"n_prb", c.nr.n_prb},
      {"n_sc_prb", c.nr.n_sc_prb},
      {"t_ofdm_s", c.nr.t_ofdm.value},
      {"w", c.hw.w},
      {"w_a", c.hw.w_a},
      {"w_d", c.hw.w_d},
      {"w_h", c.hw.w_h},
      {"t_clk_s", c.hw.t_clk.value},
      {"n_mult", c.hw.n_mult},
      {"t_trans_s", c.hw.t_trans.value},
      {"m_rpu", c.hw.m_rpu},
      {"buffer_clock_quantized", c.hw.buffer_clock_quantized},
  };
}

/// Overlays the keys present in `j` onto `c`. Unknown keys and type mismatches raise config_error.
inline void apply_json(scenario_config& c, const nlohmann::json& j) {
  if (!j.is_object()) throw config_error("config must be a JSON object");
  const auto known = to_json(scenario_config{});
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw config_error("unknown config key '" + key + "'");
    try {
      if (key == "m") c.m = value.get<int>();
      else if (key == "k") c.k = value.get<int>();
      else if (key == "snr_db") c.snr_db = value.is_array() ? value.get<std::vector<double>>()
                                                            : std::vector<double>{value.get<double>()};
      else if (key == "mu") c.mu = value.get<double>();
      else if (key == "mu_policy") c.mu_policy = value.get<std::string>();
      else if (key == "mu_grid") c.mu_grid = value.get<std::vector<double>>();
      else if (key == "k_list") c.k_list = value.get<std::vector<int>>();
      else if (key == "n_iter") c.n_iter = value.get<int>();
      else if (key == "trials") c.trials = value.get<long>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "csi") c.csi = value.get<std::string>();
      else if (key == "workers") c.workers = value.get<int>();
      else if (key == "out") c.out = value.get<std::string>();
      else if (key == "bits_per_point") c.bits_per_point = value.get<long>();
      else if (key == "qam_order") c.qam_order = value.get<int>();
      else if (key == "symbols_per_frame") c.symbols_per_frame = value.get<int>();
      else if (key == "detectors") c.detectors = value.get<std::vector<std::string>>();
      else if (key == "chain_prbs") c.chain_prbs = value.get<int>();
      else if (key == "ring") c.ring = value.get<bool>();
      else if (key == "link_rate_bps") c.link_rate_bps = value.get<double>();
      else if (key == "n_u") c.nr.n_u = value.get<int>();
      else if (key == "n_prb") c.nr.n_prb = value.get<int>();
      else if (key == "n_sc_prb") c.nr.n_sc_prb = value.get<int>();
      else if (key == "t_ofdm_s") c.nr.t_ofdm = seconds{value.get<double>()};
      else if (key == "w") c.hw.w = value.get<int>();
      else if (key == "w_a") c.hw.w_a = value.get<int>();
      else if (key == "w_d") c.hw.w_d = value.get<int>();
      else if (key == "w_h") c.hw.w_h = value.get<int>();
      else if (key == "t_clk_s") c.hw.t_clk = seconds{value.get<double>()};
      else if (key == "n_mult") c.hw.n_mult = value.get<int>();
      else if (key == "t_trans_s") c.hw.t_trans = seconds{value.get<double>()};
      else if (key == "m_rpu") c.hw.m_rpu = value.get<int>();
      else if (key == "buffer_clock_quantized") c.hw.buffer_clock_quantized = value.get<bool>();
    } catch (const nlohmann::json::exception& e) {
      throw config_error("config key '" + key + "': " + e.what());
    }
  }
}

inline scenario_config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw config_error("config file " + path.string() + ": " + e.what());
  }
  scenario_config c;
  apply_json(c, j);
  return c;
}

/// DAISY_MIMO_SEED, when set, replaces the configured seed.
inline void apply_seed_env(scenario_config& c) {
  const char* env = std::getenv("DAISY_MIMO_SEED");
  if (!env) return;
  const std::string s(env);
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size() || s.front() == '-') throw config_error("DAISY_MIMO_SEED must be an unsigned integer");
  c.seed = v;
}

/// 64-bit FNV-1a of the canonical JSON dump, as 16 hex digits.
inline std::string config_hash(const scenario_config& c) {
  auto j = to_json(c);
  j.erase("out");
  j.erase("workers");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// %.6g with inf / -inf / nan spelled out.
inline std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// CSV text whose first line records version, config hash and seed.
class csv_table {
 public:
  csv_table(const scenario_config& c, std::vector<std::string> columns) : columns_(std::move(columns)) {
    text_ = "# daisy_mimo " + std::string(kVersion) + " config_hash=" + config_hash(c) +
            " seed=" + std::to_string(c.seed) + "\n";
    append(columns_);
  }

  void row(const std::vector<std::string>& cells) {
    detail::require_dims(cells.size() == columns_.size(), "csv row width mismatch");
    append(cells);
    ++rows_;
  }

  [[nodiscard]] const std::string& text() const { return text_; }
  [[nodiscard]] std::size_t rows() const { return rows_; }

 private:
  void append(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }

  std::vector<std::string> columns_;
  std::string text_;
  std::size_t rows_ = 0;
};

/// Writes files into one directory only, each through a temporary file and a rename.
class output_dir {
 public:
  explicit output_dir(std::filesystem::path root) : root_(std::move(root)) {}

  [[nodiscard]] const std::filesystem::path& root() const { return root_; }

  std::filesystem::path write(const std::string& name, const std::string& content) const {
    const std::filesystem::path rel(name);
    if (name.empty() || rel.has_parent_path() || rel.is_absolute() || name == "." || name == "..")
      throw config_error("output name '" + name + "' must be a plain file name");
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) throw config_error("cannot create output directory " + root_.string() + ": " + ec.message());
    const auto target = root_ / rel;
    const auto tmp = root_ / ("." + name + ".tmp");
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) throw std::runtime_error("cannot write " + tmp.string());
      f << content;
      f.flush();
      if (!f) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
    return target;
  }

 private:
  std::filesystem::path root_;
};

}  // namespace daisy
