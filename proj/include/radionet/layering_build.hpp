#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "radionet/cr_broadcast.hpp"
#include "radionet/errors.hpp"
#include "radionet/graph.hpp"
#include "radionet/layering.hpp"

namespace radionet::layering {

enum class Refinement { Lra, Recursive };

struct BuildOptions {
  std::int64_t c1 = 8;         // cr_phase_count constants for the basic layering
  std::int64_t c2 = 8;
  std::int64_t alpha_lra = 4;  // single-phase length alpha * log^2 n
  std::int64_t c_delta = 4;    // recursive refinement: delta_i = c_delta * log^(2-(i-1)/r) n
  std::int64_t c_width = 16;   // recursive refinement: strip width c_width * log^2 n / delta_i
  Refinement small_diameter = Refinement::Recursive;
  StepOptions step;
  RoundTrace* trace = nullptr;  // when set, every radio stage is appended here
  std::function<void(const std::string&)> warn = [](const std::string& m) { std::cerr << "warning: " << m << '\n'; };
};

// Round accounting for one construction; scheduled rounds are the fixed
// protocol lengths, simulated rounds stop once nothing is left to do.
struct BuildStats {
  std::uint64_t basic_rounds = 0;
  std::uint64_t refine_rounds = 0;
  std::uint64_t simulated_rounds = 0;
  std::int64_t basic_depth = 0;
  std::int64_t basic_stretch = 0;
  std::int64_t d = 0;

  std::uint64_t total_rounds() const noexcept { return basic_rounds + refine_rounds; }
};

namespace detail {

inline std::vector<NodeId> select(std::size_t n, const std::function<bool(NodeId)>& pred) {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < n; ++v) {
    if (pred(v)) out.push_back(v);
  }
  return out;
}

inline std::vector<NodeId> starved(const Layering& lay, const std::vector<char>& scope) {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < lay.size(); ++v) {
    if (scope[v] && lay.layer[v] == kNoLayer) out.push_back(v);
  }
  return out;
}

inline std::int64_t single_phase(const RadioGraph& g, const BuildOptions& o) {
  return std::max<std::int64_t>(1, o.alpha_lra * g.log_n() * g.log_n());
}

inline std::uint32_t pair_bits(const std::pair<std::int64_t, std::int64_t>& m) {
  return value_bits(static_cast<std::uint64_t>(m.first)) + value_bits(static_cast<std::uint64_t>(m.second));
}

inline std::uint32_t int_bits(const std::int64_t& m) { return value_bits(static_cast<std::uint64_t>(m)); }

template <class Msg>
struct Stage {
  const RadioGraph& g;
  BuildStats* stats;
  const BuildOptions& opts;

  // One CR run. With nobody active nothing can happen, so the rounds are
  // charged without simulating them.
  cr::CrResult<Msg> run(const cr::CrConfig& cfg, const std::vector<std::optional<Msg>>& msgs, Seed seed,
                        cr::CrOptions<Msg> o) {
    if (cfg.active.empty()) {
      if (stats) stats->refine_rounds += static_cast<std::uint64_t>(cfg.phases) * static_cast<std::uint64_t>(cfg.delta);
      cr::CrResult<Msg> empty;
      empty.message.assign(g.node_count(), std::nullopt);
      empty.first_reception.assign(g.node_count(), std::nullopt);
      empty.joined_at_phase.assign(g.node_count(), std::nullopt);
      return empty;
    }
    o.run.step = opts.step;
    o.run.record_trace = opts.trace != nullptr;
    auto res = cr::cr_broadcast(g, cfg, msgs, seed, o);
    if (opts.trace) append_trace(*opts.trace, res.trace, stats ? stats->total_rounds() : 0);
    if (stats) {
      stats->refine_rounds += res.scheduled_rounds;
      stats->simulated_rounds += res.rounds;
    }
    return res;
  }
};

}  // namespace detail

// Layer = phase of first reception in a CR flood from the source; parent =
// first sender.
inline Layering basic_layering(const RadioGraph& g, NodeId source, std::int64_t delta, Seed seed,
                               const BuildOptions& opts = {}, BuildStats* stats = nullptr) {
  if (!g.contains(source)) throw InputError("source out of range");
  const auto n = g.node_count();
  const auto D = g.diameter();
  const auto p = bc::BcParams::from(n, static_cast<std::uint64_t>(std::max<std::int64_t>(D, 1)));
  const std::int64_t lo = p.log_nD, hi = p.log_n * p.log_n;
  if (delta < lo || delta > hi) {
    const auto clamped = std::clamp(delta, lo, hi);
    if (opts.warn) {
      opts.warn("basic_layering delta " + std::to_string(delta) + " outside [" + std::to_string(lo) + ", " +
                std::to_string(hi) + "]; using " + std::to_string(clamped));
    }
    delta = clamped;
  }
  Layering lay(n, source);
  lay.layer[source] = 0;
  if (n == 1) return lay;

  auto cfg = cr::single_source_config(g, source, delta, cr::cr_phase_count(D, n, delta, opts.c1, opts.c2));
  std::vector<std::optional<std::int64_t>> msgs(n);
  msgs[source] = 0;
  cr::CrOptions<std::int64_t> o;
  o.header_bits = detail::int_bits;
  o.stop_when_reached = true;
  o.run.step = opts.step;
  o.run.record_trace = opts.trace != nullptr;
  auto res = cr::cr_broadcast(g, cfg, msgs, derive_seed(seed, "basic-layering"), o);
  if (opts.trace) append_trace(*opts.trace, res.trace, stats ? stats->total_rounds() : 0);
  if (stats) {
    stats->basic_rounds += res.scheduled_rounds;
    stats->simulated_rounds += res.rounds;
  }
  std::vector<NodeId> missing;
  for (NodeId v = 0; v < n; ++v) {
    if (v == source) continue;
    if (const auto& f = res.first_reception[v]) {
      lay.layer[v] = f->phase;
      lay.parent[v] = f->sender;
    } else {
      missing.push_back(v);
    }
  }
  if (!missing.empty()) {
    throw ConstructionError("basic layering: " + std::to_string(missing.size()) + " node(s) never received", missing);
  }
  return lay;
}

// Layer refinement: strips of 5d input layers separated by boundary bands,
// each strip flooded from its start-line. Output is 5-colored.
inline Layering refine_lra(const RadioGraph& g, const Layering& in, std::int64_t d, Seed seed,
                           const BuildOptions& opts = {}, BuildStats* stats = nullptr) {
  const auto n = g.node_count();
  if (d < 1) throw InputError("refine_lra needs d >= 1");
  const auto rep = validate(g, in);
  if (!rep.valid) throw InputError("refine_lra input layering is invalid");
  if (rep.stretch > d) {
    throw InputError("refine_lra input stretch " + std::to_string(rep.stretch) + " exceeds d = " + std::to_string(d));
  }
  const NodeId src = in.source;
  Layering out(n, src);
  out.color_count = 5;
  out.color.assign(n, kNoColor);
  out.layer[src] = 0;
  out.color[src] = 0;
  if (n == 1) return out;

  const auto& l = in.layer;
  auto cls = [&](NodeId v) { return (l[v] + d - 1) / d; };
  auto nominal = [&](NodeId v) { return 2 * d * (cls(v) + 1); };
  std::vector<char> band(n, 0), boundary(n, 0), orphan(n, 0), start(n, 0);
  for (NodeId v = 0; v < n; ++v) band[v] = cls(v) % 5 == 1;
  boundary[src] = 1;

  const auto phase = detail::single_phase(g, opts);
  const auto bcp = bc::BcParams::from(n, static_cast<std::uint64_t>(std::max<std::int64_t>(rep.depth, 1)));
  auto one_phase = [&](std::vector<NodeId> active) {
    cr::CrConfig c;
    c.active = std::move(active);
    c.delta = phase;
    c.phases = 1;
    c.bc = bcp;
    c.schedule = cr::Schedule::LogNCycle;
    return c;
  };

  // Stage 1: the band announces its layers; nodes just below become boundary.
  {
    detail::Stage<std::int64_t> st{g, stats, opts};
    std::vector<std::optional<std::int64_t>> msgs(n);
    for (NodeId v = 0; v < n; ++v) {
      if (band[v]) msgs[v] = l[v];
    }
    cr::CrOptions<std::int64_t> o;
    o.header_bits = detail::int_bits;
    o.on_receive = [&](const cr::CrReception<std::int64_t>& r) {
      if (!band[r.node] && r.msg > l[r.node]) boundary[r.node] = 1;
    };
    st.run(one_phase(detail::select(n, [&](NodeId v) { return band[v] != 0; })), msgs,
           derive_seed(seed, "lra-band"), o);
  }
  // Orphan check: a boundary node with no strip below it is not a boundary.
  {
    detail::Stage<std::int64_t> st{g, stats, opts};
    std::vector<std::optional<std::int64_t>> msgs(n);
    auto below = [&](NodeId v) { return !band[v] && !boundary[v]; };
    for (NodeId v = 0; v < n; ++v) {
      if (below(v)) msgs[v] = 0;
    }
    std::vector<char> anchored(n, 0);
    cr::CrOptions<std::int64_t> o;
    o.header_bits = detail::int_bits;
    o.on_receive = [&](const cr::CrReception<std::int64_t>& r) { anchored[r.node] = 1; };
    st.run(one_phase(detail::select(n, below)), msgs, derive_seed(seed, "lra-orphan"), o);
    for (NodeId v = 0; v < n; ++v) {
      if (v != src && boundary[v] && !anchored[v]) {
        boundary[v] = 0;
        orphan[v] = 1;
      }
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    if (v != src && boundary[v]) {
      out.layer[v] = nominal(v);
      out.color[v] = 0;
    }
  }
  // Stage 2: boundary nodes announce (l, l'); band nodes above them start strips.
  // Stage 3: flood each strip from its start-line for the given number of phases.
  auto strips = [&](const std::vector<char>& loose, std::int64_t phases, const char* tag) {
    std::fill(start.begin(), start.end(), 0);
    {
      detail::Stage<std::pair<std::int64_t, std::int64_t>> st{g, stats, opts};
      std::vector<std::optional<std::pair<std::int64_t, std::int64_t>>> msgs(n);
      for (NodeId v = 0; v < n; ++v) {
        if (boundary[v]) msgs[v] = std::pair{l[v], v == src ? 2 * d : nominal(v)};
      }
      cr::CrOptions<std::pair<std::int64_t, std::int64_t>> o;
      o.header_bits = detail::pair_bits;
      o.on_receive = [&](const cr::CrReception<std::pair<std::int64_t, std::int64_t>>& r) {
        const NodeId v = r.node;
        if (boundary[v] || start[v]) return;
        if (!loose[v] && (!(band[v] || orphan[v]) || r.msg.first >= l[v])) return;
        start[v] = 1;
        out.layer[v] = r.msg.second + 1;
        out.color[v] = 1;
        out.parent[v] = r.from;
      };
      st.run(one_phase(detail::select(n, [&](NodeId v) { return boundary[v] != 0; })), msgs,
             derive_seed(seed, std::string("lra-boundary") + tag), o);
    }
    detail::Stage<std::pair<std::int64_t, std::int64_t>> st{g, stats, opts};
    cr::CrConfig c;
    c.active = detail::select(n, [&](NodeId v) { return start[v] != 0; });
    c.receptive = detail::select(n, [&](NodeId v) { return !start[v] && !boundary[v]; });
    c.delta = phase;
    c.phases = static_cast<std::uint64_t>(phases);
    c.bc = bcp;
    std::vector<char> interior(n, 0);
    for (NodeId v : c.receptive) interior[v] = 1;
    std::vector<std::optional<std::pair<std::int64_t, std::int64_t>>> msgs(n);
    for (NodeId v : c.active) msgs[v] = std::pair{out.layer[v], out.color[v]};
    cr::CrOptions<std::pair<std::int64_t, std::int64_t>> o;
    o.overwrite = false;
    o.header_bits = detail::pair_bits;
    o.adopt = [&](NodeId v, const cr::CrReception<std::pair<std::int64_t, std::int64_t>>& r) {
      if (!interior[v]) return msgs[v].value_or(r.msg);
      out.layer[v] = r.msg.first + 1;
      out.color[v] = 2 + (r.msg.second - 1) % 3;
      out.parent[v] = r.from;
      return std::pair{out.layer[v], out.color[v]};
    };
    o.on_receive = [&](const cr::CrReception<std::pair<std::int64_t, std::int64_t>>& r) {
      const NodeId v = r.node;
      if (v != src && boundary[v] && !out.parent[v] && r.msg.first < out.layer[v]) out.parent[v] = r.from;
    };
    st.run(c, msgs, derive_seed(seed, std::string("lra-strips") + tag), o);
  };
  strips(std::vector<char>(n, 0), 5 * d, "");

  // Second pass. A boundary node that heard no lower layer only touches nodes
  // cut off from the strip below; it stops being a boundary, and it and every
  // unreached node may start a strip next to any remaining boundary node. All
  // strips are then laid out again.
  std::vector<char> loose(n, 0);
  for (NodeId v = 0; v < n; ++v) {
    if (v == src) continue;
    if (boundary[v] && !out.parent[v]) {
      boundary[v] = 0;
      loose[v] = 1;
    }
    if (!boundary[v]) {
      loose[v] = loose[v] || out.layer[v] == kNoLayer;
      out.layer[v] = kNoLayer;
      out.color[v] = kNoColor;
    }
    out.parent[v].reset();
  }
  strips(loose, 6 * d, "-again");

  std::vector<char> all(n, 1);
  if (auto missing = detail::starved(out, all); !missing.empty()) {
    throw ConstructionError("refine_lra: " + std::to_string(missing.size()) + " node(s) left unlayered", missing);
  }
  auto orphans = detail::select(n, [&](NodeId v) { return v != src && !out.parent[v]; });
  if (!orphans.empty()) {
    throw ConstructionError("refine_lra: " + std::to_string(orphans.size()) + " boundary node(s) without a parent",
                            orphans);
  }
  return out;
}

namespace detail {

struct RecursiveCtx {
  const RadioGraph& g;
  std::int64_t r;
  Seed seed;
  const BuildOptions& opts;
  BuildStats* stats;
  bc::BcParams bcp;
  Layering& out;
  std::uint64_t calls = 0;

  double log_n() const { return static_cast<double>(g.log_n()); }

  std::int64_t delta(std::int64_t i) const {
    const double e = 2.0 - static_cast<double>(i - 1) / static_cast<double>(r);
    return std::max<std::int64_t>(1, std::llround(static_cast<double>(opts.c_delta) * std::pow(log_n(), e)));
  }
  std::int64_t width(std::int64_t i) const {
    const auto l2 = g.log_n() * g.log_n();
    return std::max<std::int64_t>(1, (opts.c_width * l2 + delta(i) - 1) / delta(i));
  }
  std::int64_t phases(std::int64_t i, std::int64_t h) const {
    return cr::cr_phase_count(h, static_cast<std::int64_t>(g.node_count()), delta(i), opts.c1, opts.c2);
  }
  // Layer spacing between consecutive boundary classes at level i.
  std::int64_t spacing(std::int64_t i) const { return (depth_bound(i - 1, 5 * width(i)) + 1) / 5 + 1; }

  // Largest layer offset A_i can assign above its roots for region depth h.
  std::int64_t depth_bound(std::int64_t i, std::int64_t h) const {
    if (i == 1) return h;
    const auto w = width(i);
    return spacing(i) * ((phases(i, h) + w - 1) / w) + 1 + depth_bound(i - 1, 5 * w);
  }
};

inline cr::CrConfig one_phase(const RecursiveCtx& ctx, std::vector<NodeId> active) {
  cr::CrConfig c;
  c.active = std::move(active);
  c.delta = single_phase(ctx.g, ctx.opts);
  c.phases = 1;
  c.bc = ctx.bcp;
  c.schedule = cr::Schedule::LogNCycle;
  return c;
}

// Layers every node of region that is not a root; roots are already layered.
inline void refine_level(RecursiveCtx& ctx, std::int64_t i, const std::vector<NodeId>& roots,
                         const std::vector<char>& region, std::int64_t h) {
  const auto& g = ctx.g;
  const auto n = g.node_count();
  auto& out = ctx.out;
  const Seed seed = derive_seed(ctx.seed, ++ctx.calls);
  std::vector<char> is_root(n, 0);
  for (NodeId v : roots) is_root[v] = 1;
  auto inner = [&](NodeId v) { return region[v] && !is_root[v]; };
  if (detail::select(n, inner).empty()) return;

  if (i == 1) {
    detail::Stage<std::int64_t> st{g, ctx.stats, ctx.opts};
    cr::CrConfig c;
    c.active = roots;
    c.receptive = detail::select(n, inner);
    c.delta = single_phase(g, ctx.opts);
    c.phases = std::max<std::int64_t>(h, 1);
    c.bc = ctx.bcp;
    std::vector<std::optional<std::int64_t>> msgs(n);
    for (NodeId v : roots) msgs[v] = out.layer[v];
    cr::CrOptions<std::int64_t> o;
    o.overwrite = false;
    o.header_bits = detail::int_bits;
    o.stop_when_reached = true;
    auto res = st.run(c, msgs, seed, o);
    for (NodeId v : c.receptive) {
      if (const auto& f = res.first_reception[v]) {
        out.layer[v] = *res.message[v] + f->phase;
        out.color[v] = f->phase % 3;
        out.parent[v] = f->sender;
      }
    }
    return;
  }

  // l*: CR distance estimate from the roots inside the region.
  std::vector<std::int64_t> star(n, kNoLayer), base(n, kNoLayer);
  {
    detail::Stage<std::int64_t> st{g, ctx.stats, ctx.opts};
    cr::CrConfig c;
    c.active = roots;
    c.receptive = detail::select(n, inner);
    c.delta = ctx.delta(i);
    c.phases = ctx.phases(i, h);
    c.bc = ctx.bcp;
    std::vector<std::optional<std::int64_t>> msgs(n);
    for (NodeId v : roots) msgs[v] = out.layer[v];
    cr::CrOptions<std::int64_t> o;
    o.overwrite = false;
    o.header_bits = detail::int_bits;
    o.stop_when_reached = true;
    auto res = st.run(c, msgs, derive_seed(seed, "estimate"), o);
    for (NodeId v : roots) {
      star[v] = 0;
      base[v] = out.layer[v];
    }
    std::vector<NodeId> missing;
    for (NodeId v : c.receptive) {
      if (const auto& f = res.first_reception[v]) {
        star[v] = f->phase;
        base[v] = *res.message[v];
      } else {
        missing.push_back(v);
      }
    }
    if (!missing.empty()) {
      throw ConstructionError("refine_recursive: " + std::to_string(missing.size()) + " node(s) never estimated",
                              missing);
    }
  }

  const auto w = ctx.width(i);
  const auto s = ctx.spacing(i);
  auto cls = [&](NodeId v) { return (star[v] + w - 1) / w; };
  std::vector<char> band(n, 0), boundary(n, 0), orphan(n, 0), start(n, 0);
  for (NodeId v = 0; v < n; ++v) band[v] = inner(v) && cls(v) % 5 == 1;

  {
    detail::Stage<std::int64_t> st{g, ctx.stats, ctx.opts};
    std::vector<std::optional<std::int64_t>> msgs(n);
    for (NodeId v = 0; v < n; ++v) {
      if (band[v]) msgs[v] = star[v];
    }
    cr::CrOptions<std::int64_t> o;
    o.header_bits = detail::int_bits;
    o.on_receive = [&](const cr::CrReception<std::int64_t>& rx) {
      if (inner(rx.node) && !band[rx.node] && rx.msg > star[rx.node]) boundary[rx.node] = 1;
    };
    st.run(one_phase(ctx, detail::select(n, [&](NodeId v) { return band[v] != 0; })), msgs,
           derive_seed(seed, "band"), o);
  }
  {
    detail::Stage<std::int64_t> st{g, ctx.stats, ctx.opts};
    auto below = [&](NodeId v) { return inner(v) && !band[v] && !boundary[v]; };
    std::vector<std::optional<std::int64_t>> msgs(n);
    for (NodeId v = 0; v < n; ++v) {
      if (below(v)) msgs[v] = 0;
    }
    std::vector<char> anchored(n, 0);
    cr::CrOptions<std::int64_t> o;
    o.header_bits = detail::int_bits;
    o.on_receive = [&](const cr::CrReception<std::int64_t>& rx) { anchored[rx.node] = 1; };
    st.run(one_phase(ctx, detail::select(n, below)), msgs, derive_seed(seed, "orphan"), o);
    for (NodeId v = 0; v < n; ++v) {
      if (boundary[v] && !anchored[v]) {
        boundary[v] = 0;
        orphan[v] = 1;
      }
    }
  }
  std::vector<std::int64_t> nominal(n, kNoLayer);
  for (NodeId v : roots) nominal[v] = out.layer[v];
  for (NodeId v = 0; v < n; ++v) {
    if (boundary[v]) {
      nominal[v] = base[v] + s * cls(v);
      out.layer[v] = nominal[v];
      out.color[v] = 2 * i;
    }
  }
  {
    detail::Stage<std::pair<std::int64_t, std::int64_t>> st{g, ctx.stats, ctx.opts};
    auto speaks = [&](NodeId v) { return boundary[v] || is_root[v]; };
    std::vector<std::optional<std::pair<std::int64_t, std::int64_t>>> msgs(n);
    for (NodeId v = 0; v < n; ++v) {
      if (speaks(v)) msgs[v] = std::pair{star[v], nominal[v]};
    }
    cr::CrOptions<std::pair<std::int64_t, std::int64_t>> o;
    o.header_bits = detail::pair_bits;
    o.on_receive = [&](const cr::CrReception<std::pair<std::int64_t, std::int64_t>>& rx) {
      const NodeId v = rx.node;
      if (!inner(v) || boundary[v] || start[v] || !(band[v] || orphan[v]) || rx.msg.first >= star[v]) return;
      start[v] = 1;
      out.layer[v] = rx.msg.second + 1;
      out.color[v] = 2 * i - 1;
      out.parent[v] = rx.from;
    };
    st.run(one_phase(ctx, detail::select(n, speaks)), msgs, derive_seed(seed, "boundary"), o);
  }

  std::vector<char> sub(n, 0);
  for (NodeId v = 0; v < n; ++v) sub[v] = inner(v) && !boundary[v];
  refine_level(ctx, i - 1, detail::select(n, [&](NodeId v) { return start[v] != 0; }), sub, 5 * w);

  // Boundary nodes pick a parent among the now-layered strip below.
  {
    detail::Stage<std::int64_t> st{g, ctx.stats, ctx.opts};
    auto layered = [&](NodeId v) { return sub[v] && out.layer[v] != kNoLayer; };
    std::vector<std::optional<std::int64_t>> msgs(n);
    for (NodeId v = 0; v < n; ++v) {
      if (layered(v)) msgs[v] = out.layer[v];
    }
    cr::CrOptions<std::int64_t> o;
    o.header_bits = detail::int_bits;
    o.on_receive = [&](const cr::CrReception<std::int64_t>& rx) {
      const NodeId v = rx.node;
      if (boundary[v] && !out.parent[v] && rx.msg < out.layer[v]) out.parent[v] = rx.from;
    };
    st.run(one_phase(ctx, detail::select(n, layered)), msgs, derive_seed(seed, "parents"), o);
  }
}

}  // namespace detail

// Recursive refinement A_r: a (2r+1)-colored layering whose strips nest r
// levels deep. r = 1 is a single CR pass colored by phase mod 3.
inline Layering refine_recursive(const RadioGraph& g, const Layering& in, std::int64_t r, Seed seed,
                                 const BuildOptions& opts = {}, BuildStats* stats = nullptr) {
  if (r < 1) throw InputError("refine_recursive needs r >= 1");
  const auto rep = validate(g, in);
  if (!rep.valid) throw InputError("refine_recursive input layering is invalid");
  const auto n = g.node_count();
  Layering out(n, in.source);
  out.color_count = 2 * r + 1;
  out.color.assign(n, kNoColor);
  out.layer[in.source] = 0;
  out.color[in.source] = r == 1 ? 0 : 2 * r;
  if (n == 1) return out;

  detail::RecursiveCtx ctx{g, r, seed, opts, stats,
                           bc::BcParams::from(n, static_cast<std::uint64_t>(std::max<std::int64_t>(rep.depth, 1))),
                           out};
  std::vector<char> all(n, 1);
  detail::refine_level(ctx, r, {in.source}, all, std::max<std::int64_t>(rep.depth, 1));

  if (auto missing = detail::starved(out, all); !missing.empty()) {
    throw ConstructionError("refine_recursive: " + std::to_string(missing.size()) + " node(s) left unlayered",
                            missing);
  }
  auto orphans = detail::select(n, [&](NodeId v) { return v != in.source && !out.parent[v]; });
  if (!orphans.empty()) {
    throw ConstructionError("refine_recursive: " + std::to_string(orphans.size()) + " node(s) without a parent",
                            orphans);
  }
  return out;
}

// Pseudo-BFS layering: basic layering, then a refinement that makes it
// O(1)-collision-free with O(1) stretch.
inline Layering build_pseudo_bfs(const RadioGraph& g, NodeId source, double eps, Seed seed,
                                 const BuildOptions& opts = {}, BuildStats* stats = nullptr) {
  if (!(eps > 0)) throw InputError("build_pseudo_bfs needs eps > 0");
  if (!g.contains(source)) throw InputError("source out of range");
  const auto n = g.node_count();
  const auto D = g.diameter();
  const auto r = static_cast<std::int64_t>(std::ceil(1.0 / eps - 1e-12));
  const bool small_d = static_cast<double>(D) < std::pow(static_cast<double>(n), 0.1);
  const bool recursive = small_d && opts.small_diameter == Refinement::Recursive;

  if (n == 1) {
    Layering lay(1, source);
    lay.layer[0] = 0;
    lay.color_count = recursive ? 2 * r + 1 : 5;
    lay.color = {0};
    return lay;
  }
  const auto p = bc::BcParams::from(n, static_cast<std::uint64_t>(std::max<std::int64_t>(D, 1)));
  const std::int64_t delta = small_d ? p.log_n : p.log_nD;
  BuildStats local;
  BuildStats& st = stats ? *stats : local;
  auto basic = basic_layering(g, source, delta, derive_seed(seed, "basic"), opts, &st);
  const auto rep = validate(g, basic);
  st.basic_depth = rep.depth;
  st.basic_stretch = rep.stretch;
  if (recursive) return refine_recursive(g, basic, r, derive_seed(seed, "refine"), opts, &st);
  st.d = std::max<std::int64_t>(rep.stretch, 1);
  return refine_lra(g, basic, st.d, derive_seed(seed, "refine"), opts, &st);
}

}  // namespace radionet::layering
