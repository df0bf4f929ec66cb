#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "radionet/bc.hpp"
#include "radionet/gf2.hpp"
#include "radionet/graph.hpp"
#include "radionet/layering.hpp"
#include "radionet/sim.hpp"

namespace radionet::nc {

using gf2::BitVector;
using gf2::CodedPacket;
using gf2::PacketStore;

struct NcConfig {
  layering::Layering layering;  // colored; source holds the messages
  std::int64_t c_nc = 8;
  bool check_layering = true;   // validate collision-freeness up front
  bool verify_combinations = false;  // recompute every sent payload from its coefficients
  RunOptions run{StepOptions{}, false, "nc-broadcast"};
  // Called after every round with each node's current rank.
  std::function<void(std::uint64_t, const std::vector<std::size_t>&)> on_round;
};

struct NcResult {
  std::size_t k = 0;
  std::vector<std::optional<std::uint64_t>> decode_round;  // 0 for the source
  std::vector<std::size_t> packets_received;
  std::vector<std::size_t> rank;
  std::vector<bool> decoded_correctly;  // full rank and decode equals the originals
  std::uint64_t iterations = 0;
  std::uint64_t rounds = 0;            // rounds simulated
  std::uint64_t scheduled_rounds = 0;  // iterations * C
  std::uint64_t over_budget_transmissions = 0;
  RoundTrace trace;

  bool all_decoded() const {
    for (const auto& r : decode_round) {
      if (!r) return false;
    }
    return true;
  }
  std::uint64_t completion_round() const {
    std::uint64_t m = 0;
    for (const auto& r : decode_round) {
      if (r) m = std::max(m, *r);
    }
    return m;
  }
  std::vector<NodeId> undecoded() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < decode_round.size(); ++v) {
      if (!decode_round[v]) out.push_back(v);
    }
    return out;
  }
};

// c_nc * (D' log(n/D') + k log n + log^2 n), logs as in BcParams.
inline std::uint64_t nc_iteration_count(std::int64_t depth, std::size_t n, std::size_t k, std::int64_t c_nc) {
  const auto p = bc::BcParams::from(n, static_cast<std::uint64_t>(std::max<std::int64_t>(depth, 1)));
  const auto ln = static_cast<std::uint64_t>(p.log_n);
  return static_cast<std::uint64_t>(c_nc) *
         (static_cast<std::uint64_t>(std::max<std::int64_t>(depth, 1)) * static_cast<std::uint64_t>(p.log_nD) + k * ln +
          ln * ln);
}

// k pseudo-random messages of `bits` bits each.
inline std::vector<BitVector> random_messages(std::size_t k, std::size_t bits, Seed seed) {
  std::vector<BitVector> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    RngStream rng(derive_seed(seed, "nc-messages"), static_cast<NodeId>(i), 0);
    BitVector m(bits);
    for (std::size_t b = 0; b < bits; ++b) m.set(b, rng.coin());
    out.push_back(std::move(m));
  }
  return out;
}

namespace detail {

struct NcShared {
  std::int64_t colors;
  bc::BcParams bc;
  std::uint32_t header_bits;
  std::int64_t budget;
  bool verify;
  const std::vector<BitVector>* messages;
  std::uint64_t over_budget = 0;
};

class NcMachine {
 public:
  using packet_type = CodedPacket;

  NcMachine(PacketStore store, std::int64_t color, NcShared* shared)
      : store_(std::move(store)), color_(color), shared_(shared) {}

  NodeAction<CodedPacket> act(std::uint64_t round, RngStream& rng) {
    const auto c = static_cast<std::uint64_t>(shared_->colors);
    const std::uint64_t iteration = (round - 1) / c + 1;
    if (static_cast<std::int64_t>((round - 1) % c) != color_ || store_.empty()) return NodeAction<CodedPacket>::listen();
    if (!rng.with_prob_pow2(static_cast<std::uint64_t>(bc::bc_value(iteration, shared_->bc)))) {
      return NodeAction<CodedPacket>::listen();
    }
    auto pkt = store_.random_combination([&] { return rng.coin(); });
    if (shared_->verify) check(pkt);
    if (static_cast<std::int64_t>(shared_->header_bits) > shared_->budget) ++shared_->over_budget;
    return NodeAction<CodedPacket>::transmit(std::move(pkt), shared_->header_bits, true);
  }

  void receive(std::uint64_t round, const std::optional<Reception<CodedPacket>>& rx) {
    if (!rx) return;
    if (store_.add(rx->packet) && store_.rank() == store_.k()) decode_round_ = round;
  }

  bool terminated() const noexcept { return store_.rank() == store_.k(); }

  const PacketStore& store() const noexcept { return store_; }
  std::optional<std::uint64_t> decode_round() const noexcept { return decode_round_; }
  void mark_decoded(std::uint64_t r) { decode_round_ = r; }

 private:
  void check(const CodedPacket& p) const {
    BitVector expect(p.payload.size());
    for (std::size_t i = 0; i < p.coeffs.size(); ++i) {
      if (p.coeffs.get(i)) expect ^= (*shared_->messages)[i];
    }
    if (expect != p.payload) throw IntegrityError("transmitted payload is not the combination its coefficients name");
  }

  PacketStore store_;
  std::int64_t color_;
  NcShared* shared_;
  std::optional<std::uint64_t> decode_round_;
};

}  // namespace detail

// Random linear network coding over GF(2) from the layering source. Each
// iteration has one round per color; in its color's round a node sends, with
// probability 2^-BC[iteration], a random subset-XOR of its stored packets.
inline NcResult nc_broadcast(const RadioGraph& g, const NcConfig& cfg, const std::vector<BitVector>& messages, Seed seed) {
  const auto& lay = cfg.layering;
  const auto n = g.node_count();
  if (messages.empty()) throw InputError("nc_broadcast needs k >= 1 messages");
  for (const auto& m : messages) {
    if (m.size() != messages[0].size()) throw InputError("all messages must have the same length");
  }
  if (!lay.colored()) throw InputError("nc_broadcast needs a colored layering");
  if (lay.size() != n) throw InputError("layering size does not match graph");
  if (cfg.c_nc < 1) throw InputError("c_nc must be positive");
  const auto depth = lay.depth();
  if (cfg.check_layering) {
    auto rep = layering::validate(g, lay);
    if (!rep.valid || !rep.collision_free.value_or(false)) throw InputError("nc_broadcast needs a collision-free layering");
  }
  const std::size_t k = messages.size();

  detail::NcShared shared{lay.color_count,
                          bc::BcParams::from(n, static_cast<std::uint64_t>(std::max<std::int64_t>(depth, 1))),
                          id_bits(n) + static_cast<std::uint32_t>(k),
                          header_budget_bits(n, cfg.run.step),
                          cfg.verify_combinations,
                          &messages};
  std::vector<detail::NcMachine> machines;
  machines.reserve(n);
  for (NodeId v = 0; v < n; ++v) {
    auto store = v == lay.source ? PacketStore::source(messages) : PacketStore(k, messages[0].size());
    machines.emplace_back(std::move(store), lay.color[v], &shared);
  }
  machines[lay.source].mark_decoded(0);

  NcResult out;
  out.k = k;
  out.iterations = nc_iteration_count(depth, n, k, cfg.c_nc);
  out.scheduled_rounds = out.iterations * static_cast<std::uint64_t>(lay.color_count);
  std::vector<std::size_t> ranks(n);
  auto observer = [&](std::uint64_t round, std::span<const detail::NcMachine> ms) {
    if (!cfg.on_round) return;
    for (NodeId v = 0; v < n; ++v) ranks[v] = ms[v].store().rank();
    cfg.on_round(round, ranks);
  };
  auto run = run_protocol(g, machines, out.scheduled_rounds, seed, cfg.run, observer);
  out.rounds = run.rounds;
  out.trace = std::move(run.trace);
  out.over_budget_transmissions = shared.over_budget;
  for (const auto& m : machines) {
    out.decode_round.push_back(m.decode_round());
    out.packets_received.push_back(m.store().received());
    out.rank.push_back(m.store().rank());
    auto dec = gf2::decode(m.store(), k);
    out.decoded_correctly.push_back(dec && *dec == messages);
  }
  return out;
}

}  // namespace radionet::nc
