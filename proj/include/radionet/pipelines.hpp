#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "radionet/coded_broadcast.hpp"
#include "radionet/gathering.hpp"
#include "radionet/layering_build.hpp"

namespace radionet::pipelines {

struct StageRounds {
  std::string name;
  std::uint64_t rounds = 0;     // rounds until the stage's goal was reached
  std::uint64_t scheduled = 0;  // fixed protocol length
};

struct PipelineOptions {
  double eps = 0.5;
  layering::BuildOptions build;
  std::int64_t c_g = 4;
  std::optional<std::int64_t> wave_cap;
  std::int64_t c_nc = 8;
  bool record_trace = false;
  PipelineOptions() { build.warn = nullptr; }
};

struct PipelineResult {
  std::vector<StageRounds> stages;
  std::uint64_t total_rounds = 0;
  bool success = false;
  std::optional<std::string> failure_stage;
  std::optional<std::string> failure_detail;
  std::size_t k = 0;
  std::int64_t layering_depth = 0;
  std::int64_t colors = 0;
  // Per-node decoded messages (empty for nodes that did not decode).
  std::vector<std::vector<gathering::Message>> decoded;
  RoundTrace trace;  // stages back to back, round numbers continuing across stages

  std::uint64_t stage(const std::string& name) const {
    for (const auto& s : stages) {
      if (s.name == name) return s.rounds;
    }
    return 0;
  }
};

namespace detail {

inline void add_stage(PipelineResult& r, std::string name, std::uint64_t rounds, std::uint64_t scheduled) {
  r.stages.push_back({std::move(name), rounds, scheduled});
  r.total_rounds += rounds;
}

inline std::uint64_t trace_offset(const PipelineResult& r) {
  std::uint64_t s = 0;
  for (const auto& st : r.stages) s += st.scheduled;
  return s;
}

}  // namespace detail

// Pseudo-BFS from the leader, gather every placed message to it, then
// network-coded broadcast of the gathered set. Success iff every node decodes
// exactly the initial message set.
inline PipelineResult multi_source_broadcast(const RadioGraph& g, const gathering::Placement& sources, NodeId leader,
                                             Seed seed, const PipelineOptions& opts = {}) {
  const auto n = g.node_count();
  if (!g.contains(leader)) throw InputError("leader out of range");
  if (sources.size() != n) throw InputError("placement needs one entry per node");
  std::vector<gathering::Message> initial;
  for (const auto& ms : sources) initial.insert(initial.end(), ms.begin(), ms.end());
  std::sort(initial.begin(), initial.end());
  if (initial.empty()) throw InputError("need k >= 1 messages");

  PipelineResult out;
  out.k = initial.size();
  out.decoded.assign(n, {});

  layering::Layering lay;
  {
    layering::BuildStats stats;
    auto build = opts.build;
    RoundTrace stage_trace;
    if (opts.record_trace) build.trace = &stage_trace;
    try {
      lay = layering::build_pseudo_bfs(g, leader, opts.eps, derive_seed(seed, "layering"), build, &stats);
    } catch (const ConstructionError& e) {
      out.failure_stage = "layering";
      out.failure_detail = e.what();
      return out;
    }
    append_trace(out.trace, stage_trace, 0);
    detail::add_stage(out, "layering", stats.total_rounds(), stats.total_rounds());
    out.layering_depth = lay.depth();
    out.colors = lay.color_count;
  }

  std::vector<gathering::Message> gathered;
  {
    gathering::GatherConfig cfg;
    cfg.layering = lay;
    cfg.c_g = opts.c_g;
    cfg.wave_cap = opts.wave_cap;
    cfg.check_layering = false;
    cfg.run.record_trace = opts.record_trace;
    auto res = gathering::gather(g, cfg, sources, derive_seed(seed, "gather"));
    append_trace(out.trace, res.trace, detail::trace_offset(out));
    detail::add_stage(out, "gather", res.completion_round(), res.scheduled_rounds);
    if (!res.success() || res.conservation_violations > 0) {
      out.failure_stage = "gather";
      out.failure_detail = std::to_string(res.delivered.size()) + " of " + std::to_string(res.k) +
                           " messages delivered, " + std::to_string(res.failed.size()) + " over the wave cap" +
                           (res.first_violation.empty() ? "" : "; " + res.first_violation);
      return out;
    }
    for (const auto& d : res.delivered) gathered.push_back(d.message);
    std::sort(gathered.begin(), gathered.end());
  }

  {
    std::vector<gf2::BitVector> msgs;
    for (auto m : gathered) msgs.push_back(gf2::BitVector::from_word(m, 64));
    nc::NcConfig cfg;
    cfg.layering = lay;
    cfg.c_nc = opts.c_nc;
    cfg.check_layering = false;
    cfg.run.record_trace = opts.record_trace;
    auto res = nc::nc_broadcast(g, cfg, msgs, derive_seed(seed, "broadcast"));
    append_trace(out.trace, res.trace, detail::trace_offset(out));
    detail::add_stage(out, "broadcast", res.completion_round(), res.scheduled_rounds);
    for (NodeId v = 0; v < n; ++v) {
      if (res.decoded_correctly[v]) out.decoded[v] = gathered;
    }
    if (!res.all_decoded()) {
      out.failure_stage = "broadcast";
      out.failure_detail = std::to_string(res.undecoded().size()) + " node(s) did not decode";
      return out;
    }
    if (std::count(res.decoded_correctly.begin(), res.decoded_correctly.end(), false) > 0) {
      out.failure_stage = "broadcast";
      out.failure_detail = "a node decoded the wrong messages";
      return out;
    }
  }
  out.success = gathered == initial;
  if (!out.success) {
    out.failure_stage = "gather";
    out.failure_detail = "gathered set differs from the initial messages";
  }
  return out;
}

// All-to-all broadcast: node v starts with message v.
inline PipelineResult gossip(const RadioGraph& g, NodeId leader, Seed seed, const PipelineOptions& opts = {}) {
  gathering::Placement p(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) p[v] = {v};
  return multi_source_broadcast(g, p, leader, seed, opts);
}

}  // namespace radionet::pipelines
