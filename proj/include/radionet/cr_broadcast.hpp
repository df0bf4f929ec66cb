#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "radionet/bc.hpp"
#include "radionet/graph.hpp"
#include "radionet/sim.hpp"

namespace radionet::cr {

// Which exponents drive the per-round transmit probability 2^-e.
enum class Schedule {
  Full,       // e = BC[slot]
  LogNCycle,  // e = BC[3*slot + 2] = slot mod log_n (the P3 subsequence)
};

struct CrConfig {
  std::vector<NodeId> active;     // A
  std::vector<NodeId> receptive;  // R, disjoint from A
  std::int64_t delta = 1;
  std::int64_t phases = 1;
  bc::BcParams bc;
  Schedule schedule = Schedule::Full;
};

template <class Msg>
struct CrReception {
  NodeId node;
  NodeId from;
  const Msg& msg;
  std::int64_t phase;   // 1-based
  std::uint64_t round;  // 1-based, within this run
};

struct FirstReception {
  std::int64_t phase;
  std::uint64_t round;
  NodeId sender;
  friend bool operator==(const FirstReception&, const FirstReception&) = default;
};

template <class Msg>
struct CrOptions {
  // Literal protocol: every reception replaces the held message. When false a
  // node keeps the message it adopted on its first reception.
  bool overwrite = true;
  // Message a node adopts on first reception (default: the received one).
  std::function<Msg(NodeId, const CrReception<Msg>&)> adopt;
  // Observer for every reception, including passive nodes.
  std::function<void(const CrReception<Msg>&)> on_receive;
  // Header bits of the message body (the sender id is charged separately).
  std::function<std::uint32_t(const Msg&)> header_bits;
  // End the run once every node of A or R holds a message.
  bool stop_when_reached = false;
  RunOptions run{StepOptions{}, false, "cr-broadcast"};
};

template <class Msg>
struct CrResult {
  std::vector<std::optional<Msg>> message;
  std::vector<std::optional<FirstReception>> first_reception;
  std::vector<std::optional<std::int64_t>> joined_at_phase;
  std::uint64_t rounds = 0;            // rounds simulated
  std::uint64_t scheduled_rounds = 0;  // phases * delta
  RoundTrace trace;

  // Latest first-reception round over all nodes that received (0 if none).
  std::uint64_t completion_round() const {
    std::uint64_t r = 0;
    for (const auto& f : first_reception) {
      if (f) r = std::max(r, f->round);
    }
    return r;
  }
};

// T = ceil((c1*D*(log(n/D) + delta) + c2*log^2 n) / delta), logs as in BcParams.
inline std::int64_t cr_phase_count(std::int64_t graph_d, std::int64_t n, std::int64_t delta, std::int64_t c1,
                                   std::int64_t c2) {
  if (delta < 1) throw InputError("cr_phase_count needs delta >= 1");
  if (n < 1) throw InputError("cr_phase_count needs n >= 1");
  const auto p = bc::BcParams::from(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(std::max<std::int64_t>(graph_d, 1)));
  const std::int64_t num = c1 * graph_d * (p.log_nD + delta) + c2 * p.log_n * p.log_n;
  return std::max<std::int64_t>(1, (num + delta - 1) / delta);
}

template <class Msg>
struct CrPacket {
  std::uint64_t id;
  Msg msg;
};

namespace detail {

template <class Msg>
class CrMachine {
 public:
  using packet_type = CrPacket<Msg>;

  CrMachine(NodeId self, std::uint64_t id, const CrConfig& cfg, const CrOptions<Msg>& opts, std::uint32_t id_bits,
            bool in_a, bool in_r, std::optional<Msg> initial)
      : self_(self), id_(id), cfg_(&cfg), opts_(&opts), id_bits_(id_bits), in_a_(in_a), in_r_(in_r), msg_(std::move(initial)) {}

  NodeAction<packet_type> act(std::uint64_t round, RngStream& rng) {
    if (!in_a_ || !msg_) return NodeAction<packet_type>::listen();
    const auto delta = static_cast<std::uint64_t>(cfg_->delta);
    const std::uint64_t phase = (round - 1) / delta + 1;
    const std::uint64_t j = (round - 1) % delta + 1;
    const std::uint64_t slot = phase * delta + j;
    const std::int64_t e = cfg_->schedule == Schedule::Full
                               ? bc::bc_value(slot, cfg_->bc)
                               : static_cast<std::int64_t>(slot % static_cast<std::uint64_t>(cfg_->bc.log_n));
    if (!rng.with_prob_pow2(static_cast<std::uint64_t>(e))) return NodeAction<packet_type>::listen();
    std::uint32_t bits = id_bits_ + (opts_->header_bits ? opts_->header_bits(*msg_) : 0);
    return NodeAction<packet_type>::transmit(packet_type{id_, *msg_}, bits);
  }

  void receive(std::uint64_t round, const std::optional<Reception<packet_type>>& rx) {
    const auto delta = static_cast<std::uint64_t>(cfg_->delta);
    const auto phase = static_cast<std::int64_t>((round - 1) / delta + 1);
    if (rx) {
      CrReception<Msg> info{self_, rx->from, rx->packet.msg, phase, round};
      if (opts_->on_receive) opts_->on_receive(info);
      if (!first_) {
        first_ = FirstReception{phase, round, rx->from};
        msg_ = opts_->adopt ? opts_->adopt(self_, info) : rx->packet.msg;
      } else if (opts_->overwrite) {
        msg_ = rx->packet.msg;
      }
    }
    if ((round - 1) % delta + 1 == delta && in_r_ && !in_a_ && msg_) {
      in_a_ = true;
      joined_ = phase;
    }
  }

  bool terminated() const noexcept { return opts_->stop_when_reached && (msg_.has_value() || (!in_a_ && !in_r_)); }

  const std::optional<Msg>& message() const noexcept { return msg_; }
  const std::optional<FirstReception>& first() const noexcept { return first_; }
  std::optional<std::int64_t> joined() const noexcept { return joined_; }

 private:
  NodeId self_;
  std::uint64_t id_;
  const CrConfig* cfg_;
  const CrOptions<Msg>* opts_;
  std::uint32_t id_bits_;
  bool in_a_;
  bool in_r_;
  std::optional<Msg> msg_;
  std::optional<FirstReception> first_;
  std::optional<std::int64_t> joined_;
};

}  // namespace detail

// Phase-structured randomized flooding. In phase i, round j, every active
// node with a message transmits with probability 2^-BC[i*delta + j]; nodes of
// R join A at the end of the first phase in which they received.
template <class Msg>
CrResult<Msg> cr_broadcast(const RadioGraph& g, const CrConfig& cfg, const std::vector<std::optional<Msg>>& messages,
                           Seed seed, const CrOptions<Msg>& opts = {}) {
  const std::size_t n = g.node_count();
  if (cfg.delta < 1 || cfg.phases < 1) throw InputError("cr_broadcast needs delta >= 1 and phases >= 1");
  cfg.bc.check();
  if (messages.size() != n) throw InputError("cr_broadcast needs a message slot per node");
  std::vector<char> in_a(n, 0), in_r(n, 0);
  for (NodeId v : cfg.active) {
    if (!g.contains(v)) throw InputError("active node out of range");
    in_a[v] = 1;
  }
  for (NodeId v : cfg.receptive) {
    if (!g.contains(v)) throw InputError("receptive node out of range");
    if (in_a[v]) throw InputError("A and R must be disjoint (node " + std::to_string(v) + ")");
    in_r[v] = 1;
  }
  std::vector<detail::CrMachine<Msg>> machines;
  machines.reserve(n);
  const auto bits = id_bits(n);
  for (NodeId v = 0; v < n; ++v) {
    std::optional<Msg> initial;
    if (in_a[v]) {
      if (!messages[v]) throw InputError("active node " + std::to_string(v) + " has no message");
      initial = messages[v];
    }
    machines.emplace_back(v, random_id(seed, v), cfg, opts, bits, in_a[v] != 0, in_r[v] != 0, std::move(initial));
  }
  const auto scheduled = static_cast<std::uint64_t>(cfg.phases) * static_cast<std::uint64_t>(cfg.delta);
  auto run = run_protocol(g, machines, scheduled, seed, opts.run);

  CrResult<Msg> out;
  out.rounds = run.rounds;
  out.scheduled_rounds = scheduled;
  out.trace = std::move(run.trace);
  out.message.reserve(n);
  for (const auto& m : machines) {
    out.message.push_back(m.message());
    out.first_reception.push_back(m.first());
    out.joined_at_phase.push_back(m.joined());
  }
  return out;
}

// Single-source convenience: A = {source}, R = everything else.
inline CrConfig single_source_config(const RadioGraph& g, NodeId source, std::int64_t delta, std::int64_t phases) {
  CrConfig cfg;
  cfg.active = {source};
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (v != source) cfg.receptive.push_back(v);
  }
  cfg.delta = delta;
  cfg.phases = phases;
  cfg.bc = bc::BcParams::from(g.node_count(), static_cast<std::uint64_t>(std::max<std::int64_t>(g.diameter(), 1)));
  return cfg;
}

}  // namespace radionet::cr
