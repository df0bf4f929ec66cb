#include <gtest/gtest.h>

#include <map>

#include "radionet/gathering.hpp"
#include "radionet/generators.hpp"
#include "radionet/layering_build.hpp"

using namespace radionet;
using namespace radionet::gathering;

namespace {

GatherConfig bfs_config(const RadioGraph& g, NodeId src = 0) {
  GatherConfig cfg;
  cfg.layering = layering::with_mod_coloring(layering::bfs_layering(g, src), 3);
  cfg.run.record_trace = true;
  return cfg;
}

}  // namespace

TEST(EpochBound, Examples) {
  EXPECT_EQ(gather_epoch_bound(10, 0, 2, 1), 14);
  EXPECT_EQ(gather_epoch_bound(20, 8, 256, 4), 1616);
}

TEST(EpochBound, MonotoneInEachArgument) {
  for (std::int64_t d = 0; d < 20; d += 3) {
    for (std::int64_t k = 0; k < 20; k += 4) {
      for (std::int64_t n = 1; n < 300; n += 37) {
        for (std::int64_t c = 1; c < 5; ++c) {
          const auto b = gather_epoch_bound(d, k, n, c);
          EXPECT_LE(b, gather_epoch_bound(d + 1, k, n, c));
          EXPECT_LE(b, gather_epoch_bound(d, k + 1, n, c));
          EXPECT_LE(b, gather_epoch_bound(d, k, n + 1, c));
          EXPECT_LE(b, gather_epoch_bound(d, k, n, c + 1));
        }
      }
    }
  }
}

TEST(DelayWindows, StackWithoutOverlap) {
  for (std::int64_t k : {1, 7, 64, 1000}) {
    for (std::int64_t w = 0; w < 12; ++w) {
      const auto lo = w == 0 ? 0 : max_previous_delay(k, 5, w - 1);
      EXPECT_EQ(lo + delay_window(k, 5, w), max_previous_delay(k, 5, w));
      EXPECT_GE(delay_window(k, 5, w), 8 * 4 * 5);
      EXPECT_LE(delay_window(k, 5, w + 1), delay_window(k, 5, w));
    }
  }
}

TEST(Gather, NoMessages) {
  auto g = generate_graph("path:4", 0);
  auto res = gather(g, bfs_config(g), Placement(4), 0);
  EXPECT_TRUE(res.success());
  EXPECT_TRUE(res.delivered.empty());
  EXPECT_EQ(res.rounds, 0u);
}

TEST(Gather, MessagesAlreadyAtSource) {
  auto g = generate_graph("path:4", 0);
  Placement p(4);
  p[0] = {5, 6, 7};
  auto res = gather(g, bfs_config(g), p, 0);
  EXPECT_TRUE(res.success());
  EXPECT_EQ(res.delivered.size(), 3u);
  EXPECT_TRUE(res.trace.rounds.empty());
  for (const auto& d : res.delivered) EXPECT_EQ(d.waves_used, 0);
}

TEST(Gather, PathFollowsScheduleEquation) {
  auto g = generate_graph("path:5", 0);
  auto cfg = bfs_config(g);
  Placement p(5);
  p[4] = {100, 200};
  auto res = gather(g, cfg, p, 0);
  ASSERT_TRUE(res.success()) << res.first_violation;
  EXPECT_EQ(res.conservation_violations, 0u);
  const auto depth = cfg.layering.depth();
  ASSERT_FALSE(res.hops.empty());
  for (const auto& h : res.hops) {
    EXPECT_EQ(h.epoch, depth - cfg.layering.layer[h.from] + h.delay);
    EXPECT_EQ(cfg.layering.parent[h.from], std::optional<NodeId>(h.to));
  }
  std::map<Message, int> hops_per_message;
  for (const auto& h : res.hops) ++hops_per_message[h.message];
  EXPECT_EQ(hops_per_message[100], 4);
  EXPECT_EQ(hops_per_message[200], 4);
}

TEST(Gather, ColorDisciplineAndWaveMonotonicity) {
  auto g = generate_graph("grid:6x6", 0);
  auto cfg = bfs_config(g, 0);
  const std::int64_t c = cfg.layering.color_count;
  auto p = random_placement(36, 40, 3);
  auto res = gather(g, cfg, p, 3);
  EXPECT_TRUE(res.success());
  EXPECT_EQ(res.conservation_violations, 0u) << res.first_violation;
  for (const auto& rec : res.trace.rounds) {
    const auto idx = rec.round - 1;
    if (idx % 2 == 1) continue;
    const auto cycle = static_cast<std::int64_t>((idx / 2) % static_cast<std::uint64_t>(c));
    for (auto [u, bits] : rec.transmitters) EXPECT_EQ(cfg.layering.color[u], cycle);
  }
  const auto ln = g.log_n();
  std::map<Message, std::pair<std::int64_t, std::int64_t>> last;  // wave, delay
  for (const auto& h : res.hops) {
    EXPECT_LT(h.delay, max_previous_delay(40, ln, h.wave));
    if (h.wave > 0) EXPECT_GE(h.delay, max_previous_delay(40, ln, h.wave - 1));
    auto it = last.find(h.message);
    if (it != last.end()) {
      EXPECT_GE(h.wave, it->second.first);
      if (h.wave > it->second.first) EXPECT_GT(h.delay, it->second.second);
    }
    last[h.message] = {h.wave, h.delay};
  }
}

TEST(Gather, WaveCapReportsInsteadOfLosing) {
  auto g = generate_graph("star:20", 0);
  auto cfg = bfs_config(g, 0);
  cfg.wave_cap = 0;
  // Many messages at one leaf: same-node collisions force re-waves.
  Placement p(20);
  for (Message m = 0; m < 200; ++m) p[1 + m % 19].push_back(m);
  auto res = gather(g, cfg, p, 1);
  EXPECT_EQ(res.conservation_violations, 0u) << res.first_violation;
  EXPECT_FALSE(res.failed.empty());
  EXPECT_EQ(res.delivered.size() + res.failed.size() + res.undelivered.size(), 200u);
}

TEST(Gather, PseudoBfsGrid) {
  auto g = generate_graph("grid:16x16", 0);
  layering::BuildOptions quiet;
  quiet.warn = nullptr;
  for (Seed s = 0; s < 3; ++s) {
    GatherConfig cfg;
    cfg.layering = layering::build_pseudo_bfs(g, 0, 0.5, s, quiet);
    auto res = gather(g, cfg, random_placement(256, 64, s), s);
    EXPECT_TRUE(res.success()) << "seed " << s;
    EXPECT_EQ(res.conservation_violations, 0u);
    for (const auto& d : res.delivered) EXPECT_LE(d.arrival_epoch, res.epoch_bound);
  }
}

TEST(Gather, RejectsBadInput) {
  auto g = generate_graph("path:4", 0);
  Placement dup(4);
  dup[1] = {3};
  dup[2] = {3};
  EXPECT_THROW(gather(g, bfs_config(g), dup, 0), InputError);
  EXPECT_THROW(gather(g, bfs_config(g), Placement(3), 0), InputError);
  GatherConfig cfg;
  cfg.layering = layering::bfs_layering(g, 0);
  EXPECT_THROW(gather(g, cfg, Placement(4), 0), InputError);
}
