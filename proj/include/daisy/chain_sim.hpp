#pragma once

// Discrete-event model of RPUs connected in a daisy chain (optionally closed
// into a ring) with the CPU attached after the last RPU.
//
// Node ids 0..N-1 are RPUs in chain order; id N is the CPU. Time is kept in
// integer picoseconds. A directed link delivers a message T_trans after it
// starts sending; a link serializes its messages (occupancy = bits / rate),
// so busy intervals on one link never overlap.

#include "daisy/channel.hpp"
#include "daisy/cost_model.hpp"
#include "daisy/equalizers.hpp"
#include "daisy/errors.hpp"
#include "daisy/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <span>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

namespace daisy {

using picoseconds = std::int64_t;

inline picoseconds to_ps(seconds s) { return static_cast<picoseconds>(std::llround(s.value * 1e12)); }

struct chain_config {
  int m = 32;
  int antennas_per_rpu = 4;
  bool ring = false;
  seconds t_trans{100e-9};
  seconds t_clk{1e-9};
  int n_mult = 8;
  int w_a = 12;
  int w_d = 12;
  double link_rate = 400e9;          // bits per second on every link
  seconds t_prb{1.0 / 120e3 / 275};  // spacing between consecutive PRBs entering the chain

  [[nodiscard]] int n_rpu() const { return m / antennas_per_rpu; }

  static chain_config from_hardware(int m, const hardware_params& hw, const numerology& nr = {}) {
    chain_config c;
    c.m = m;
    c.antennas_per_rpu = hw.m_rpu;
    c.t_trans = hw.t_trans;
    c.t_clk = hw.t_clk;
    c.n_mult = hw.n_mult;
    c.w_a = hw.w_a;
    c.w_d = hw.w_d;
    c.t_prb = nr.t_prb();
    return c;
  }

  void validate() const {
    detail::require_param(m >= 1 && antennas_per_rpu >= 1, "m and antennas_per_rpu must be >= 1");
    detail::require_dims(m % antennas_per_rpu == 0, "m must be divisible by antennas_per_rpu");
    detail::require_param(t_trans.value >= 0.0 && t_clk.value > 0.0 && n_mult >= 1, "invalid timing parameters");
    detail::require_param(w_a >= 1 && w_d >= 1 && link_rate > 0.0 && t_prb.value >= 0.0, "invalid link parameters");
  }
};

// Message payloads. None of them can carry channel rows.
struct formulation_matrix {
  cmatrix a;  // K x K
};
struct partial_sum {
  cmatrix acc;  // K x S
};
struct broadcast_data {
  cmatrix x;  // K x S
};
using chain_payload = std::variant<formulation_matrix, partial_sum, broadcast_data>;

struct chain_message {
  chain_payload payload;
  int prb = 0;
  picoseconds sent = 0;
  picoseconds received = 0;
};

inline std::int64_t payload_bits(const chain_payload& p, const chain_config& cfg) {
  return std::visit(
      [&](const auto& v) -> std::int64_t {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, formulation_matrix>)
          return 2LL * cfg.w_a * v.a.rows() * v.a.cols();
        else if constexpr (std::is_same_v<T, partial_sum>)
          return 2LL * cfg.w_d * v.acc.rows() * v.acc.cols();
        else
          return 2LL * cfg.w_d * v.x.rows() * v.x.cols();
      },
      p);
}

struct node_state {
  int id = 0;
  int first_antenna = 0;
  std::vector<cmatrix> h_local;              // per PRB, M_RPU x K
  std::vector<cmatrix> w;                    // per PRB, M_RPU x K
  std::vector<std::vector<double>> steps;    // per PRB, mu_m of the local rows
  std::int64_t bits_in = 0;
  std::int64_t bits_out = 0;
};

enum class chain_phase { formulation = 0, filtering = 1, precoding = 2 };

inline const char* to_string(chain_phase p) {
  switch (p) {
    case chain_phase::formulation: return "formulation";
    case chain_phase::filtering: return "filtering";
    case chain_phase::precoding: return "precoding";
  }
  return "?";
}

struct link_record {
  int from = 0;
  int to = 0;
  std::array<std::int64_t, 3> bits{};
  std::array<std::int64_t, 3> messages{};
  std::vector<std::pair<picoseconds, picoseconds>> busy;  // [start, end)
  picoseconds busy_until = 0;
};

struct chain_event {
  picoseconds time = 0;
  int node = 0;
  std::string event;
  int prb = 0;
  std::int64_t bits = 0;
};

struct chain_trace {
  chain_phase phase = chain_phase::formulation;
  int n_rpu = 0;
  int n_prb = 0;
  std::vector<link_record> links;
  picoseconds completion = 0;  // last delivery, including the hop to the CPU
  picoseconds latency = 0;     // worst PRB, first RPU start to last RPU done
  std::vector<chain_event> events;

  [[nodiscard]] const link_record* find_link(int from, int to) const {
    for (const auto& l : links)
      if (l.from == from && l.to == to) return &l;
    return nullptr;
  }

  /// Links between consecutive RPUs in chain order (root and ring excluded).
  [[nodiscard]] std::vector<const link_record*> chain_links() const {
    std::vector<const link_record*> out;
    for (const auto& l : links)
      if (l.from < n_rpu && l.to < n_rpu && std::abs(l.from - l.to) == 1) out.push_back(&l);
    return out;
  }

  /// time_ps,node,event,prb,bits sorted by time then node.
  [[nodiscard]] std::string to_csv() const {
    std::vector<const chain_event*> sorted;
    sorted.reserve(events.size());
    for (const auto& e : events) sorted.push_back(&e);
    std::stable_sort(sorted.begin(), sorted.end(), [](const chain_event* a, const chain_event* b) {
      return std::tie(a->time, a->node) < std::tie(b->time, b->node);
    });
    std::string out = "time_ps,node,event,prb,bits\n";
    for (const auto* e : sorted)
      out += std::to_string(e->time) + "," + std::to_string(e->node) + "," + e->event + "," + std::to_string(e->prb) +
             "," + std::to_string(e->bits) + "\n";
    return out;
  }
};

struct daisy_chain {
  chain_config config;
  std::vector<node_state> nodes;
  std::vector<cmatrix> residual;  // per PRB, A_M as delivered to the CPU
  bool formulated = false;
  double mu_used = 0.0;
  int iterations = 0;

  [[nodiscard]] int n_rpu() const { return static_cast<int>(nodes.size()); }
  [[nodiscard]] int n_prb() const { return nodes.empty() ? 0 : static_cast<int>(nodes.front().h_local.size()); }
  [[nodiscard]] int users() const { return nodes.empty() ? 0 : static_cast<int>(nodes.front().h_local.front().cols()); }
  [[nodiscard]] int cpu() const { return n_rpu(); }
};

/// Splits every PRB channel into contiguous row blocks, one per RPU.
inline daisy_chain build_chain(const chain_config& config, std::span<const channel_realization> prbs) {
  config.validate();
  detail::require_param(!prbs.empty(), "at least one PRB channel is required");
  daisy_chain chain;
  chain.config = config;
  const int k = prbs.front().users();
  for (const auto& ch : prbs)
    detail::require_dims(ch.antennas() == config.m && ch.users() == k, "every PRB channel must be M x K");
  const int n = config.n_rpu();
  const int rows = config.antennas_per_rpu;
  chain.nodes.resize(n);
  for (int i = 0; i < n; ++i) {
    node_state& node = chain.nodes[i];
    node.id = i;
    node.first_antenna = i * rows;
    for (const auto& ch : prbs) {
      node.h_local.emplace_back(ch.h.middleRows(node.first_antenna, rows));
      node.w.emplace_back(cmatrix::Zero(rows, k));
      node.steps.emplace_back();
    }
  }
  return chain;
}

inline daisy_chain build_chain(const chain_config& config, const channel_realization& h) {
  return build_chain(config, std::span<const channel_realization>(&h, 1));
}

namespace detail {

class event_queue {
 public:
  void at(picoseconds t, int node, std::function<void()> fn) { q_.push({t, node, seq_++, std::move(fn)}); }
  void run() {
    while (!q_.empty()) {
      auto fn = std::move(const_cast<entry&>(q_.top()).fn);
      q_.pop();
      fn();
    }
  }

 private:
  struct entry {
    picoseconds t;
    int node;
    std::uint64_t seq;
    std::function<void()> fn;
    bool operator>(const entry& o) const { return std::tie(t, node, seq) > std::tie(o.t, o.node, o.seq); }
  };
  std::priority_queue<entry, std::vector<entry>, std::greater<>> q_;
  std::uint64_t seq_ = 0;
};

/// Shared link/transport bookkeeping for one phase.
class chain_runner {
 public:
  chain_runner(daisy_chain& chain, chain_phase phase) : chain_(chain) {
    trace.phase = phase;
    trace.n_rpu = chain.n_rpu();
    trace.n_prb = chain.n_prb();
  }

  void log(picoseconds t, int node, std::string what, int prb, std::int64_t bits = 0) {
    trace.events.push_back({t, node, std::move(what), prb, bits});
  }

  /// Sends payload from -> to no earlier than `ready`; calls on_arrive(message) at delivery.
  void send(int from, int to, chain_payload payload, int prb, picoseconds ready,
            std::function<void(chain_message&&)> on_arrive) {
    link_record& link = link_for(from, to);
    const std::int64_t nbits = payload_bits(payload, chain_.config);
    const auto occupancy = static_cast<picoseconds>(std::ceil(nbits * 1e12 / chain_.config.link_rate));
    const picoseconds start = std::max(ready, link.busy_until);
    link.busy_until = start + occupancy;
    link.busy.emplace_back(start, start + occupancy);
    link.bits[static_cast<int>(trace.phase)] += nbits;
    link.messages[static_cast<int>(trace.phase)] += 1;
    if (from < chain_.n_rpu()) chain_.nodes[from].bits_out += nbits;
    if (to < chain_.n_rpu()) chain_.nodes[to].bits_in += nbits;
    const picoseconds arrival = start + std::max(to_ps(chain_.config.t_trans), occupancy);
    log(start, from, "send", prb, nbits);
    chain_message msg{std::move(payload), prb, start, arrival};
    queue.at(arrival, to, [this, to, nbits, m = std::move(msg), cb = std::move(on_arrive)]() mutable {
      log(m.received, to, "recv", m.prb, nbits);
      trace.completion = std::max(trace.completion, m.received);
      cb(std::move(m));
    });
  }

  picoseconds prb_start(int prb) const {
    return static_cast<picoseconds>(std::llround(prb * chain_.config.t_prb.value * 1e12));
  }

  event_queue queue;
  chain_trace trace;

 private:
  link_record& link_for(int from, int to) {
    for (auto& l : trace.links)
      if (l.from == from && l.to == to) return l;
    link_record rec;
    rec.from = from;
    rec.to = to;
    trace.links.push_back(std::move(rec));
    return trace.links.back();
  }

  daisy_chain& chain_;
};

}  // namespace detail

struct formulation_result {
  std::vector<equalizer_set> equalizers;  // per PRB, rows gathered from the RPUs
  chain_trace trace;
};

/// Concatenated w rows held by the RPUs for one PRB.
inline equalizer_set collect_equalizer(const daisy_chain& chain, int prb) {
  equalizer_set out;
  out.kind = equalizer_kind::cd;
  const int rows = chain.config.antennas_per_rpu;
  out.w = cmatrix(chain.config.m, chain.users());
  for (const auto& node : chain.nodes) {
    out.w.middleRows(node.first_antenna, rows) = node.w[prb];
    out.per_antenna_mu.insert(out.per_antenna_mu.end(), node.steps[prb].begin(), node.steps[prb].end());
  }
  if (chain.formulated) out.residual = chain.residual[prb];
  out.mu_used = chain.mu_used;
  out.iterations = chain.iterations;
  return out;
}

/// Passes A through the chain n_iter times per PRB; PRB p enters RPU 0 at p * t_prb.
inline formulation_result run_formulation_pass(daisy_chain& chain, double mu, int n_iter = 1) {
  detail::require_param(n_iter >= 1, "n_iter must be >= 1");
  detail::require_param(mu >= 0.0 && mu <= 2.0, "mu must lie in [0, 2]");
  if (n_iter > 1 && !chain.config.ring) throw state_error("n_iter > 1 needs the ring closure link");
  const int n = chain.n_rpu();
  const int k = chain.users();
  const int rows = chain.config.antennas_per_rpu;
  const picoseconds t_proc =
      to_ps(chain.config.t_clk * (2.0 * k * k / chain.config.n_mult));

  for (auto& node : chain.nodes)
    for (std::size_t p = 0; p < node.h_local.size(); ++p) {
      node.w[p].setZero();
      node.steps[p] = detail::antenna_steps(node.h_local[p], mu);
    }
  chain.residual.assign(chain.n_prb(), cmatrix());
  chain.formulated = false;

  detail::chain_runner run(chain, chain_phase::formulation);
  std::vector<picoseconds> node_free(n, 0);
  std::vector<picoseconds> started(chain.n_prb(), 0);

  struct token {
    int prb;
    int pass;
    cmatrix a;
  };
  std::function<void(int, token, picoseconds)> process = [&](int node_id, token tok, picoseconds t) {
    node_state& node = chain.nodes[node_id];
    const picoseconds start = std::max(t, node_free[node_id]);
    const picoseconds done = start + rows * t_proc;
    node_free[node_id] = done;
    run.log(start, node_id, "compute_start", tok.prb);
    cvector h(k);
    cvector scratch(k);
    for (int r = 0; r < rows; ++r) {
      h = node.h_local[tok.prb].row(r).transpose();
      cd_step(tok.a, node.w[tok.prb].row(r), h, node.steps[tok.prb][r], scratch);
    }
    run.queue.at(done, node_id, [&, node_id, done, tok = std::move(tok)]() mutable {
      run.log(done, node_id, "compute_done", tok.prb);
      const int prb = tok.prb;
      if (node_id + 1 < n) {
        run.send(node_id, node_id + 1, formulation_matrix{std::move(tok.a)}, prb, done,
                 [&, node_id, pass = tok.pass, prb](chain_message&& msg) {
                   process(node_id + 1, token{prb, pass, std::get<formulation_matrix>(msg.payload).a}, msg.received);
                 });
      } else if (tok.pass < n_iter) {
        run.send(node_id, 0, formulation_matrix{std::move(tok.a)}, prb, done,
                 [&, pass = tok.pass, prb](chain_message&& msg) {
                   process(0, token{prb, pass + 1, std::get<formulation_matrix>(msg.payload).a}, msg.received);
                 });
      } else {
        run.trace.latency = std::max(run.trace.latency, done - started[prb]);
        run.trace.completion = std::max(run.trace.completion, done);
        run.send(node_id, chain.cpu(), formulation_matrix{std::move(tok.a)}, prb, done,
                 [&, prb](chain_message&& msg) {
                   chain.residual[prb] = std::get<formulation_matrix>(std::move(msg.payload)).a;
                   run.log(msg.received, chain.cpu(), "residual_stored", prb);
                 });
      }
    });
  };

  for (int p = 0; p < chain.n_prb(); ++p) {
    started[p] = run.prb_start(p);
    run.queue.at(started[p], 0, [&, p] { process(0, token{p, 1, identity(k)}, started[p]); });
  }
  run.queue.run();

  chain.formulated = true;
  chain.mu_used = mu;
  chain.iterations = n_iter;
  formulation_result out;
  for (int p = 0; p < chain.n_prb(); ++p) out.equalizers.push_back(collect_equalizer(chain, p));
  out.trace = std::move(run.trace);
  return out;
}

inline formulation_result run_formulation_pass(daisy_chain& chain, const step_size_policy& policy, double snr,
                                               int n_iter = 1) {
  return run_formulation_pass(chain, policy.resolve(chain.config.m, chain.users(), snr), n_iter);
}

struct filtering_result {
  std::vector<cmatrix> x_hat;  // per PRB, K x S
  chain_trace trace;
};

/// Uplink: every RPU adds sum_m w_m^* y_m of its rows to the running sum.
inline filtering_result run_filtering_pass(daisy_chain& chain, std::span<const cmatrix> y_per_prb) {
  if (!chain.formulated) throw state_error("filtering requires a completed formulation pass");
  detail::require_dims(static_cast<int>(y_per_prb.size()) == chain.n_prb(), "one y block per PRB required");
  const int n = chain.n_rpu();
  const int k = chain.users();
  const int rows = chain.config.antennas_per_rpu;
  for (const auto& y : y_per_prb) detail::require_dims(y.rows() == chain.config.m, "y must be M x S");

  detail::chain_runner run(chain, chain_phase::filtering);
  filtering_result out;
  out.x_hat.resize(y_per_prb.size());

  std::function<void(int, int, cmatrix, picoseconds, picoseconds)> visit = [&](int node_id, int prb, cmatrix acc,
                                                                              picoseconds t, picoseconds t0) {
    const node_state& node = chain.nodes[node_id];
    const cmatrix& y = y_per_prb[prb];
    for (int r = 0; r < rows; ++r) acc.noalias() += node.w[prb].row(r).adjoint() * y.row(node.first_antenna + r);
    run.log(t, node_id, "accumulate", prb);
    if (node_id + 1 < n) {
      run.send(node_id, node_id + 1, partial_sum{std::move(acc)}, prb, t, [&, node_id, prb, t0](chain_message&& m) {
        visit(node_id + 1, prb, std::get<partial_sum>(std::move(m.payload)).acc, m.received, t0);
      });
    } else {
      run.trace.latency = std::max(run.trace.latency, t - t0);
      run.trace.completion = std::max(run.trace.completion, t);
      run.send(node_id, chain.cpu(), partial_sum{std::move(acc)}, prb, t, [&, prb](chain_message&& m) {
        out.x_hat[prb] = std::get<partial_sum>(std::move(m.payload)).acc;
        run.log(m.received, chain.cpu(), "estimate_ready", prb);
      });
    }
  };

  for (int p = 0; p < chain.n_prb(); ++p) {
    const picoseconds t0 = run.prb_start(p);
    run.queue.at(t0, 0, [&, p, t0] { visit(0, p, cmatrix::Zero(k, y_per_prb[p].cols()), t0, t0); });
  }
  run.queue.run();
  out.trace = std::move(run.trace);
  return out;
}

inline filtering_result run_filtering_pass(daisy_chain& chain, const cmatrix& y) {
  return run_filtering_pass(chain, std::span<const cmatrix>(&y, 1));
}

struct precoding_result {
  std::vector<cmatrix> y;  // per PRB, M x S
  chain_trace trace;
};

/// Downlink: the CPU hands x to the last RPU and it is forwarded towards RPU 0;
/// every RPU emits p_m^T x with p_m = power_scale * conj(w_m).
inline precoding_result run_precoding_pass(daisy_chain& chain, std::span<const cmatrix> x_per_prb,
                                           double power_scale = 1.0) {
  if (!chain.formulated) throw state_error("precoding requires a completed formulation pass");
  detail::require_dims(static_cast<int>(x_per_prb.size()) == chain.n_prb(), "one x block per PRB required");
  detail::require_param(power_scale > 0.0, "power scale must be positive");
  const int n = chain.n_rpu();
  const int k = chain.users();
  const int rows = chain.config.antennas_per_rpu;
  for (const auto& x : x_per_prb) detail::require_dims(x.rows() == k, "x must be K x S");

  detail::chain_runner run(chain, chain_phase::precoding);
  precoding_result out;
  for (const auto& x : x_per_prb) out.y.emplace_back(chain.config.m, x.cols());

  std::vector<picoseconds> entered(chain.n_prb(), 0);
  std::function<void(int, int, cmatrix, picoseconds)> visit = [&](int node_id, int prb, cmatrix x, picoseconds t) {
    const node_state& node = chain.nodes[node_id];
    if (node_id == n - 1) entered[prb] = t;
    if (node_id > 0)
      run.send(node_id, node_id - 1, broadcast_data{x}, prb, t, [&, node_id, prb](chain_message&& m) {
        visit(node_id - 1, prb, std::get<broadcast_data>(std::move(m.payload)).x, m.received);
      });
    for (int r = 0; r < rows; ++r) {
      const auto p_row = (power_scale * node.w[prb].row(r).conjugate()).eval();
      out.y[prb].row(node.first_antenna + r).noalias() = p_row * x;
    }
    run.log(t, node_id, "precode", prb);
    if (node_id == 0) {
      run.trace.latency = std::max(run.trace.latency, t - entered[prb]);
      run.trace.completion = std::max(run.trace.completion, t);
    }
  };

  for (int p = 0; p < chain.n_prb(); ++p) {
    const picoseconds t0 = run.prb_start(p);
    run.queue.at(t0, chain.cpu(), [&, p, t0] {
      run.send(chain.cpu(), n - 1, broadcast_data{x_per_prb[p]}, p, t0, [&, p](chain_message&& m) {
        visit(n - 1, p, std::get<broadcast_data>(std::move(m.payload)).x, m.received);
      });
    });
  }
  run.queue.run();
  out.trace = std::move(run.trace);
  return out;
}

inline precoding_result run_precoding_pass(daisy_chain& chain, const cmatrix& x, double power_scale = 1.0) {
  return run_precoding_pass(chain, std::span<const cmatrix>(&x, 1), power_scale);
}

struct link_rate {
  int from = 0;
  int to = 0;
  bits_per_second rate;
};

/// Average rate of every link: bits carried per OFDM symbol over T_OFDM.
/// `symbols` is the number of OFDM symbols the traced run represents.
inline std::vector<link_rate> link_statistics(const chain_trace& trace, const numerology& nr, double symbols = 1.0) {
  detail::require_param(symbols > 0.0, "symbols must be positive");
  std::vector<link_rate> out;
  for (const auto& l : trace.links) {
    const std::int64_t b = l.bits[static_cast<int>(trace.phase)];
    if (b > 0) out.push_back({l.from, l.to, bits{b / symbols} / nr.t_ofdm});
  }
  detail::require_param(!out.empty(), "trace carries no traffic");
  return out;
}

}  // namespace daisy
