#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "radionet/errors.hpp"
#include "radionet/graph.hpp"
#include "radionet/layering.hpp"
#include "radionet/rng.hpp"
#include "radionet/sim.hpp"

namespace radionet::gathering {

using Message = std::uint64_t;

struct GatherPacket {
  Message message = 0;
  NodeId destination = 0;
  std::int64_t wave = 0;
  std::int64_t delay = 0;
  friend bool operator==(const GatherPacket&, const GatherPacket&) = default;
};

// Radio frame: a data packet in the transmit slot or a bare ack in the ack slot.
struct Frame {
  bool ack = false;
  GatherPacket packet;
};

struct GatherConfig {
  layering::Layering layering;  // colored; destination is its source
  std::int64_t c_g = 4;
  std::optional<std::int64_t> wave_cap;  // default 4 * log n
  bool check_layering = true;
  bool check_conservation = true;  // per-round no-duplication / no-loss audit
  RunOptions run{StepOptions{}, false, "gather"};
};

struct Delivery {
  Message message;
  std::int64_t arrival_epoch;
  std::int64_t waves_used;
  std::uint64_t round;
};

// One successful hop: `to` accepted `message` sent by `from`.
struct HopEvent {
  std::uint64_t round;
  std::int64_t epoch;
  NodeId from;
  NodeId to;
  Message message;
  std::int64_t wave;
  std::int64_t delay;
};

struct GatherResult {
  std::size_t k = 0;
  std::vector<Delivery> delivered;
  std::vector<Message> failed;                           // exceeded the wave cap
  std::vector<std::pair<NodeId, Message>> undelivered;  // still pending at exhaustion
  std::vector<HopEvent> hops;
  std::int64_t epoch_bound = 0;
  std::uint64_t rounds = 0;
  std::uint64_t scheduled_rounds = 0;
  std::uint64_t conservation_violations = 0;
  std::string first_violation;
  RoundTrace trace;

  bool success() const noexcept { return delivered.size() == k; }
  std::uint64_t completion_round() const {
    std::uint64_t r = 0;
    for (const auto& d : delivered) r = std::max(r, d.round);
    return r;
  }
};

// c_g * (D' + 16k + 4 log^2 n).
inline std::int64_t gather_epoch_bound(std::int64_t d_prime, std::int64_t k, std::int64_t n, std::int64_t c_g) {
  const auto ln = clog2(static_cast<std::uint64_t>(std::max<std::int64_t>(n, 1)));
  return c_g * (d_prime + 16 * k + 4 * ln * ln);
}

// Delay window of wave w: 8 * max(k 2^-w, 4 log n).
inline std::int64_t delay_window(std::int64_t k, std::int64_t log_n, std::int64_t wave) {
  const std::int64_t shrunk = wave >= 62 ? 0 : (k >> wave) + ((k & ((std::int64_t{1} << wave) - 1)) != 0 ? 1 : 0);
  return 8 * std::max(shrunk, 4 * log_n);
}

// Start of the wave-(w+1) delay range: the windows of waves 0..w stacked.
inline std::int64_t max_previous_delay(std::int64_t k, std::int64_t log_n, std::int64_t wave) {
  std::int64_t s = 0;
  for (std::int64_t i = 0; i <= wave; ++i) s += delay_window(k, log_n, i);
  return s;
}

// Each line of `placement` lists the messages starting at that node.
using Placement = std::vector<std::vector<Message>>;

// k messages (tokens 0..k-1) at uniformly random nodes.
inline Placement random_placement(std::size_t n, std::size_t k, Seed seed) {
  Placement p(n);
  RngStream rng(derive_seed(seed, "placement"), 0, 0);
  for (Message m = 0; m < k; ++m) p[rng.below(n)].push_back(m);
  return p;
}

namespace detail {

struct Shared {
  std::int64_t colors;
  std::int64_t depth;
  std::int64_t k;
  std::int64_t log_n;
  std::int64_t wave_cap;
  std::uint32_t dest_bits;
  Seed seed;
  std::vector<Delivery>* delivered;
  std::vector<Message>* failed;
  std::vector<HopEvent>* hops;
};

class GatherMachine {
 public:
  using packet_type = Frame;

  GatherMachine(NodeId self, const layering::Layering& lay, Shared* shared)
      : self_(self),
        layer_(lay.layer[self]),
        color_(lay.color[self]),
        parent_(lay.parent[self].value_or(self)),
        is_source_(self == lay.source),
        shared_(shared) {}

  void seed_packet(Message m, std::int64_t delay) { pending_.push_back({m, parent_, 0, delay}); }

  NodeAction<Frame> act(std::uint64_t round, RngStream&) {
    const auto [epoch, cycle, ack_slot] = position(round);
    if (ack_slot) {
      if (!ack_pending_) return NodeAction<Frame>::listen();
      return NodeAction<Frame>::transmit(Frame{true, {}}, 1);
    }
    sending_.reset();
    if (cycle != color_) return NodeAction<Frame>::listen();
    std::optional<std::size_t> only;
    std::size_t matches = 0;
    for (std::size_t i = 0; i < pending_.size(); ++i) {
      if (due(pending_[i], epoch)) {
        ++matches;
        only = i;
      }
    }
    if (matches != 1) return NodeAction<Frame>::listen();
    sending_ = pending_[*only].message;
    const auto& p = pending_[*only];
    const auto bits = shared_->dest_bits + value_bits(static_cast<std::uint64_t>(p.wave)) +
                      value_bits(static_cast<std::uint64_t>(p.delay));
    return NodeAction<Frame>::transmit(Frame{false, p}, bits);
  }

  void receive(std::uint64_t round, const std::optional<Reception<Frame>>& rx) {
    const auto [epoch, cycle, ack_slot] = position(round);
    if (!ack_slot) {
      if (cycle == color_ || !rx || rx->packet.ack || rx->packet.packet.destination != self_) return;
      const auto& p = rx->packet.packet;
      shared_->hops->push_back({round, epoch, rx->from, self_, p.message, p.wave, p.delay});
      if (is_source_) {
        shared_->delivered->push_back({p.message, epoch, p.wave, round});
      } else {
        pending_.push_back({p.message, parent_, p.wave, p.delay});
      }
      ack_pending_ = true;
      return;
    }
    ack_pending_ = false;
    if (cycle != color_) return;
    if (sending_ && rx && rx->packet.ack) {
      auto it = std::find_if(pending_.begin(), pending_.end(), [&](const GatherPacket& p) { return p.message == *sending_; });
      pending_.erase(it);
    }
    sending_.reset();
    RngStream rng(shared_->seed, self_, round);
    std::vector<GatherPacket> kept;
    kept.reserve(pending_.size());
    for (auto& p : pending_) {
      if (!due(p, epoch)) {
        kept.push_back(p);
        continue;
      }
      const auto next = p.wave + 1;
      if (next > shared_->wave_cap) {
        shared_->failed->push_back(p.message);
        continue;
      }
      const auto window = delay_window(shared_->k, shared_->log_n, next);
      const auto delay = max_previous_delay(shared_->k, shared_->log_n, p.wave) +
                         static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(window)));
      kept.push_back({p.message, p.destination, next, delay});
    }
    pending_ = std::move(kept);
  }

  bool terminated() const noexcept { return pending_.empty() && !ack_pending_; }

  const std::vector<GatherPacket>& pending() const noexcept { return pending_; }

 private:
  struct Position {
    std::int64_t epoch;
    std::int64_t cycle;
    bool ack_slot;
  };

  Position position(std::uint64_t round) const {
    const auto idx = round - 1;
    const auto c = static_cast<std::uint64_t>(shared_->colors);
    return {static_cast<std::int64_t>(idx / (2 * c)), static_cast<std::int64_t>((idx / 2) % c), idx % 2 == 1};
  }

  bool due(const GatherPacket& p, std::int64_t epoch) const { return epoch == shared_->depth - layer_ + p.delay; }

  NodeId self_;
  std::int64_t layer_;
  std::int64_t color_;
  NodeId parent_;
  bool is_source_;
  Shared* shared_;
  std::vector<GatherPacket> pending_;
  std::optional<Message> sending_;
  bool ack_pending_ = false;
};

}  // namespace detail

// Convergecast of the placed messages to the layering source. Every epoch has
// one data slot and one ack slot per color; a node sends in its color's slot
// when exactly one of its packets is due at D' - l(u) + delay.
inline GatherResult gather(const RadioGraph& g, const GatherConfig& cfg, const Placement& placement, Seed seed) {
  const auto& lay = cfg.layering;
  const auto n = g.node_count();
  if (placement.size() != n) throw InputError("placement needs one entry per node");
  if (lay.size() != n) throw InputError("layering size does not match graph");
  if (!lay.colored()) throw InputError("gather needs a colored layering");
  if (cfg.c_g < 1) throw InputError("c_g must be positive");
  if (cfg.check_layering) {
    auto rep = layering::validate(g, lay);
    if (!rep.valid || !rep.collision_free.value_or(false)) throw InputError("gather needs a collision-free layering");
  }
  std::vector<Message> all;
  for (const auto& ms : placement) all.insert(all.end(), ms.begin(), ms.end());
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end()) throw InputError("message tokens must be distinct");

  GatherResult out;
  out.k = all.size();
  const auto depth = lay.depth();
  const auto log_n = g.log_n();
  const auto k = static_cast<std::int64_t>(out.k);
  out.epoch_bound = gather_epoch_bound(depth, k, static_cast<std::int64_t>(n), cfg.c_g);
  out.scheduled_rounds = static_cast<std::uint64_t>(out.epoch_bound + 1) * 2 * static_cast<std::uint64_t>(lay.color_count);
  const auto wave_cap = cfg.wave_cap.value_or(4 * log_n);
  if (wave_cap < 0) throw InputError("wave_cap must be non-negative");

  detail::Shared shared{lay.color_count, depth, k, log_n, wave_cap, id_bits(n), derive_seed(seed, "rewave"),
                        &out.delivered, &out.failed, &out.hops};
  std::vector<detail::GatherMachine> machines;
  machines.reserve(n);
  for (NodeId v = 0; v < n; ++v) machines.emplace_back(v, lay, &shared);

  const Seed init = derive_seed(seed, "initial-delay");
  for (NodeId v = 0; v < n; ++v) {
    for (std::size_t i = 0; i < placement[v].size(); ++i) {
      const auto m = placement[v][i];
      if (v == lay.source) {
        out.delivered.push_back({m, 0, 0, 0});
        continue;
      }
      RngStream rng(init, v, i);
      machines[v].seed_packet(m, static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(delay_window(k, log_n, 0)))));
    }
  }

  auto audit = [&](std::uint64_t round, std::span<const detail::GatherMachine> ms) {
    // A hop is in flight between the data slot and its ack slot.
    if (!cfg.check_conservation || round % 2 == 1) return;
    std::vector<int> seen(all.size(), 0);
    auto mark = [&](Message m) {
      auto it = std::lower_bound(all.begin(), all.end(), m);
      if (it == all.end() || *it != m) {
        ++out.conservation_violations;
        if (out.first_violation.empty()) out.first_violation = "round " + std::to_string(round) + ": phantom message";
        return;
      }
      ++seen[static_cast<std::size_t>(it - all.begin())];
    };
    for (const auto& m : ms) {
      for (const auto& p : m.pending()) mark(p.message);
    }
    for (const auto& d : out.delivered) mark(d.message);
    for (auto m : out.failed) mark(m);
    for (std::size_t i = 0; i < seen.size(); ++i) {
      if (seen[i] != 1) {
        ++out.conservation_violations;
        if (out.first_violation.empty()) {
          out.first_violation = "round " + std::to_string(round) + ": message " + std::to_string(all[i]) + " held " +
                                std::to_string(seen[i]) + " times";
        }
      }
    }
  };

  if (out.scheduled_rounds > 0) {
    auto run = run_protocol(g, machines, out.scheduled_rounds, seed, cfg.run, audit);
    out.rounds = run.rounds;
    out.trace = std::move(run.trace);
  }
  for (NodeId v = 0; v < n; ++v) {
    for (const auto& p : machines[v].pending()) out.undelivered.emplace_back(v, p.message);
  }
  return out;
}

}  // namespace radionet::gathering
