// daisy_mimo: experiment driver.
//
// Exit codes: 0 success, 1 validation failure, 2 configuration or usage error,
// 3 runtime failure.

#include "daisy/experiments.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>
#include <string>

namespace {

struct overrides {
  std::string config;
  std::optional<int> m, k, n_iter, workers;
  std::optional<std::vector<double>> snr_db;
  std::optional<double> mu;
  std::optional<std::string> mu_policy, csi, out;
  std::optional<long> trials;
  std::optional<std::uint64_t> seed;
};

void add_options(CLI::App& app, overrides& o) {
  app.add_option("--config", o.config, "JSON scenario file")->check(CLI::ExistingFile);
  app.add_option("--m", o.m, "number of base-station antennas");
  app.add_option("--k", o.k, "number of users");
  app.add_option("--snr-db", o.snr_db, "SNR points in dB (repeatable)");
  app.add_option("--mu", o.mu, "fixed relaxation parameter");
  app.add_option("--mu-policy", o.mu_policy, "step-size policy")
      ->check(CLI::IsMember({"fixed", "recommended", "optimal"}));
  app.add_option("--n-iter", o.n_iter, "passes around the ring");
  app.add_option("--trials", o.trials, "Monte Carlo trials");
  app.add_option("--seed", o.seed, "master seed (overrides DAISY_MIMO_SEED)");
  app.add_option("--csi", o.csi, "CSI model")->check(CLI::IsMember({"ideal", "noisy"}));
  app.add_option("--workers", o.workers, "worker threads (0 = all cores)");
  app.add_option("--out", o.out, "output directory");
}

daisy::scenario_config resolve(const overrides& o) {
  daisy::scenario_config c = o.config.empty() ? daisy::scenario_config{} : daisy::load_config(o.config);
  daisy::apply_seed_env(c);
  if (o.m) c.m = *o.m;
  if (o.k) c.k = *o.k;
  if (o.snr_db) c.snr_db = *o.snr_db;
  if (o.mu) {
    c.mu = *o.mu;
    if (!o.mu_policy) c.mu_policy = "fixed";
  }
  if (o.mu_policy) c.mu_policy = *o.mu_policy;
  if (o.n_iter) c.n_iter = *o.n_iter;
  if (o.trials) c.trials = *o.trials;
  if (o.seed) c.seed = *o.seed;
  if (o.csi) c.csi = *o.csi;
  if (o.workers) c.workers = *o.workers;
  if (o.out) c.out = *o.out;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Daisy-chain massive MIMO equalization experiments"};
  app.set_version_flag("--version", std::string(daisy::kVersion));
  app.require_subcommand(1);

  overrides o;
  for (const auto& name : daisy::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    add_options(*sub, o);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const auto cfg = resolve(o);
    return daisy::run_command(command, cfg, std::cout);
  } catch (const daisy::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid parameter: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
