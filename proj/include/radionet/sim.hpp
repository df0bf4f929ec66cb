#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "radionet/errors.hpp"
#include "radionet/graph.hpp"
#include "radionet/rng.hpp"

namespace radionet {

// Header budget is header_factor * max(ceil(log2 n), min_log) bits for
// standard packets.
struct StepOptions {
  std::int64_t header_factor = 8;
  std::int64_t min_log = 4;
};

inline std::int64_t header_budget_bits(std::size_t n, const StepOptions& opts = {}) {
  return opts.header_factor * std::max(clog2(static_cast<std::uint64_t>(n)), opts.min_log);
}

// Bits charged for one simulated random node id (4 log n).
inline std::uint32_t id_bits(std::size_t n) {
  return static_cast<std::uint32_t>(4 * clog2(static_cast<std::uint64_t>(n)));
}

// Bits needed to write a non-negative integer value.
constexpr std::uint32_t value_bits(std::uint64_t v) noexcept {
  std::uint32_t b = 1;
  while (v >>= 1) ++b;
  return b;
}

// Random node ids: a keyed bijection of the index, so ids are unique.
constexpr std::uint64_t random_id(Seed seed, NodeId v) noexcept {
  std::uint64_t z = static_cast<std::uint64_t>(v) ^ derive_seed(seed, "node-id");
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <class Packet>
struct NodeAction {
  std::optional<Packet> packet;  // empty: listen
  std::uint32_t header_bits = 0;
  bool header_exempt = false;

  static NodeAction listen() { return {}; }
  static NodeAction transmit(Packet p, std::uint32_t bits, bool exempt = false) {
    return NodeAction{std::move(p), bits, exempt};
  }
  bool transmits() const noexcept { return packet.has_value(); }
};

template <class Packet>
struct Reception {
  NodeId from;
  Packet packet;
};

template <class Packet>
struct RoundOutcome {
  std::vector<std::optional<Reception<Packet>>> receptions;  // indexed by node
  std::vector<NodeId> collisions;                            // ascending
};

namespace detail {

// Reusable buffers for evaluating rounds without per-round allocation.
class StepWorkspace {
 public:
  template <class Packet>
  void evaluate(const RadioGraph& g, std::span<const NodeAction<Packet>> actions,
                const StepOptions& opts, RoundOutcome<Packet>& out) {
    const std::size_t n = g.node_count();
    if (actions.size() != n) {
      throw InputError("step needs exactly one action per node (got " + std::to_string(actions.size()) +
                       " for " + std::to_string(n) + " nodes)");
    }
    const auto budget = header_budget_bits(n, opts);
    hits_.assign(n, 0);
    last_sender_.resize(n);
    out.receptions.assign(n, std::nullopt);
    out.collisions.clear();
    for (NodeId u = 0; u < n; ++u) {
      const auto& a = actions[u];
      if (!a.transmits()) continue;
      if (!a.header_exempt && a.header_bits > budget) {
        throw HeaderBudgetError("node " + std::to_string(u) + " sent a " + std::to_string(a.header_bits) +
                                "-bit header; budget is " + std::to_string(budget));
      }
      for (NodeId v : g.neighbors(u)) {
        if (hits_[v] < 2) ++hits_[v];
        last_sender_[v] = u;
      }
    }
    for (NodeId v = 0; v < n; ++v) {
      if (actions[v].transmits() || hits_[v] == 0) continue;
      if (hits_[v] == 1) {
        NodeId from = last_sender_[v];
        out.receptions[v].emplace(Reception<Packet>{from, *actions[from].packet});
      } else {
        out.collisions.push_back(v);
      }
    }
  }

 private:
  std::vector<std::uint8_t> hits_;
  std::vector<NodeId> last_sender_;
};

}  // namespace detail

// One synchronous round: a listener receives iff exactly one neighbor
// transmits; transmitters receive nothing; collisions look like silence.
template <class Packet>
RoundOutcome<Packet> step(const RadioGraph& g, std::span<const NodeAction<Packet>> actions,
                          const StepOptions& opts = {}) {
  detail::StepWorkspace ws;
  RoundOutcome<Packet> out;
  ws.evaluate(g, actions, opts, out);
  return out;
}

template <class Packet>
RoundOutcome<Packet> step(const RadioGraph& g, const std::vector<NodeAction<Packet>>& actions,
                          const StepOptions& opts = {}) {
  return step(g, std::span<const NodeAction<Packet>>(actions), opts);
}

// Sparse form: every node must appear exactly once.
template <class Packet>
RoundOutcome<Packet> step(const RadioGraph& g, const std::map<NodeId, NodeAction<Packet>>& actions,
                          const StepOptions& opts = {}) {
  std::vector<NodeAction<Packet>> dense(g.node_count());
  for (const auto& [id, action] : actions) {
    if (!g.contains(id)) throw InputError("unknown node id " + std::to_string(id) + " in actions");
    dense[id] = action;
  }
  if (actions.size() != g.node_count()) throw InputError("every node needs exactly one action");
  return step(g, std::span<const NodeAction<Packet>>(dense), opts);
}

struct RoundRecord {
  std::uint64_t round = 0;
  std::vector<std::pair<NodeId, std::uint32_t>> transmitters;  // (id, header bits)
  std::vector<std::pair<NodeId, NodeId>> receptions;           // (id, from)
  std::vector<NodeId> collisions;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

struct RoundTrace {
  Seed seed = 0;
  std::string protocol;
  std::vector<RoundRecord> rounds;

  std::size_t size() const noexcept { return rounds.size(); }
  friend bool operator==(const RoundTrace&, const RoundTrace&) = default;
};

template <class Packet>
RoundRecord make_record(std::uint64_t round, std::span<const NodeAction<Packet>> actions,
                        const RoundOutcome<Packet>& outcome) {
  RoundRecord rec;
  rec.round = round;
  for (NodeId v = 0; v < actions.size(); ++v) {
    if (actions[v].transmits()) rec.transmitters.emplace_back(v, actions[v].header_bits);
    if (outcome.receptions[v]) rec.receptions.emplace_back(v, outcome.receptions[v]->from);
  }
  rec.collisions = outcome.collisions;
  return rec;
}

// JSON lines: {"round":r,"transmitters":[[id,bits],...],"receptions":[[id,from],...],"collisions":[id,...]}
inline void write_record_json(std::ostream& out, const RoundRecord& rec) {
  out << "{\"round\":" << rec.round << ",\"transmitters\":[";
  for (std::size_t i = 0; i < rec.transmitters.size(); ++i) {
    out << (i ? ",[" : "[") << rec.transmitters[i].first << ',' << rec.transmitters[i].second << ']';
  }
  out << "],\"receptions\":[";
  for (std::size_t i = 0; i < rec.receptions.size(); ++i) {
    out << (i ? ",[" : "[") << rec.receptions[i].first << ',' << rec.receptions[i].second << ']';
  }
  out << "],\"collisions\":[";
  for (std::size_t i = 0; i < rec.collisions.size(); ++i) out << (i ? "," : "") << rec.collisions[i];
  out << "]}\n";
}

inline void write_trace_jsonl(std::ostream& out, const RoundTrace& trace) {
  for (const auto& rec : trace.rounds) write_record_json(out, rec);
}

// Appends src with its round numbers shifted by offset.
inline void append_trace(RoundTrace& dst, const RoundTrace& src, std::uint64_t offset) {
  for (auto rec : src.rounds) {
    rec.round += offset;
    dst.rounds.push_back(std::move(rec));
  }
}

struct RunOptions {
  StepOptions step;
  bool record_trace = true;
  std::string protocol = "custom";
};

struct RunResult {
  RoundTrace trace;
  std::uint64_t rounds = 0;   // rounds actually executed
  bool all_terminated = false;
};

// A per-node protocol state machine. act() picks this round's action from
// local state and the node's random stream; receive() delivers what the node
// heard (nothing on silence, collision, or when it transmitted).
template <class M>
concept ProtocolMachine = requires(M m, const M cm, std::uint64_t round, RngStream& rng,
                                   const std::optional<Reception<typename M::packet_type>>& rx) {
  typename M::packet_type;
  { m.act(round, rng) } -> std::same_as<NodeAction<typename M::packet_type>>;
  m.receive(round, rx);
  { cm.terminated() } -> std::convertible_to<bool>;
};

struct NoRoundObserver {
  template <class M>
  void operator()(std::uint64_t, std::span<const M>) const noexcept {}
};

// Runs rounds 1..max_rounds, stopping early once every machine reports
// termination. Machine i is node i. Exceptions from machines are rethrown as
// ProtocolFault naming the node and round.
template <ProtocolMachine M, class Observer = NoRoundObserver>
RunResult run_protocol(const RadioGraph& g, std::span<M> machines, std::uint64_t max_rounds, Seed seed,
                       const RunOptions& opts = {}, Observer&& after_round = {}) {
  using Packet = typename M::packet_type;
  if (machines.size() != g.node_count()) throw InputError("need one machine per node");
  if (max_rounds == 0) throw InputError("max_rounds must be positive");

  RunResult result;
  result.trace.seed = seed;
  result.trace.protocol = opts.protocol;
  detail::StepWorkspace ws;
  std::vector<NodeAction<Packet>> actions(g.node_count());
  RoundOutcome<Packet> outcome;

  auto all_done = [&] {
    for (const auto& m : machines) {
      if (!m.terminated()) return false;
    }
    return true;
  };

  for (std::uint64_t round = 1; round <= max_rounds; ++round) {
    if (all_done()) {
      result.all_terminated = true;
      return result;
    }
    for (NodeId v = 0; v < machines.size(); ++v) {
      RngStream rng(seed, v, round);
      try {
        actions[v] = machines[v].act(round, rng);
      } catch (const ProtocolFault&) {
        throw;
      } catch (const std::exception& e) {
        throw ProtocolFault(v, round, e.what());
      }
    }
    ws.evaluate(g, std::span<const NodeAction<Packet>>(actions), opts.step, outcome);
    if (opts.record_trace) {
      result.trace.rounds.push_back(make_record(round, std::span<const NodeAction<Packet>>(actions), outcome));
    }
    for (NodeId v = 0; v < machines.size(); ++v) {
      try {
        machines[v].receive(round, outcome.receptions[v]);
      } catch (const ProtocolFault&) {
        throw;
      } catch (const std::exception& e) {
        throw ProtocolFault(v, round, e.what());
      }
    }
    result.rounds = round;
    after_round(round, std::span<const M>(machines.data(), machines.size()));
  }
  result.all_terminated = all_done();
  return result;
}

template <ProtocolMachine M, class Observer = NoRoundObserver>
RunResult run_protocol(const RadioGraph& g, std::vector<M>& machines, std::uint64_t max_rounds, Seed seed,
                       const RunOptions& opts = {}, Observer&& after_round = {}) {
  return run_protocol(g, std::span<M>(machines), max_rounds, seed, opts, std::forward<Observer>(after_round));
}

}  // namespace radionet
