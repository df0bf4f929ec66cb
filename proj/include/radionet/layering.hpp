#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "radionet/errors.hpp"
#include "radionet/graph.hpp"

namespace radionet::layering {

inline constexpr std::int64_t kNoLayer = -1;
inline constexpr std::int64_t kNoColor = -1;

// Integer layer per node with a unique layer-0 source; every other node has a
// lower-layered neighbor recorded as its parent. Optionally C-colored.
struct Layering {
  NodeId source = 0;
  std::vector<std::int64_t> layer;
  std::vector<std::optional<NodeId>> parent;
  std::vector<std::int64_t> color;  // empty when uncolored
  std::int64_t color_count = 0;     // 0 when uncolored

  Layering() = default;
  explicit Layering(std::size_t n, NodeId src = 0)
      : source(src), layer(n, kNoLayer), parent(n) {}

  std::size_t size() const noexcept { return layer.size(); }
  bool colored() const noexcept { return color_count > 0; }

  std::int64_t depth() const {
    std::int64_t d = 0;
    for (auto l : layer) d = std::max(d, l);
    return d;
  }

  std::vector<NodeId> unassigned() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < layer.size(); ++v) {
      if (layer[v] == kNoLayer) out.push_back(v);
    }
    return out;
  }

  friend bool operator==(const Layering&, const Layering&) = default;
};

enum class ViolationKind {
  MultipleSources,
  SourceNotAtZero,
  SourceHasParent,
  MissingParent,
  ParentNotAdjacent,
  ParentNotLower,
  ColorOutOfRange,
  ColorCollision,
};

inline const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::MultipleSources: return "multiple-sources";
    case ViolationKind::SourceNotAtZero: return "source-not-at-zero";
    case ViolationKind::SourceHasParent: return "source-has-parent";
    case ViolationKind::MissingParent: return "missing-parent";
    case ViolationKind::ParentNotAdjacent: return "parent-not-adjacent";
    case ViolationKind::ParentNotLower: return "parent-not-lower";
    case ViolationKind::ColorOutOfRange: return "color-out-of-range";
    case ViolationKind::ColorCollision: return "color-collision";
  }
  return "unknown";
}

struct Violation {
  ViolationKind kind;
  std::vector<NodeId> nodes;
};

struct LayeringReport {
  bool valid = true;
  std::int64_t depth = 0;
  std::int64_t stretch = 0;
  std::optional<bool> collision_free;  // set only for colored layerings
  std::vector<Violation> violations;
  std::size_t color_collisions = 0;     // total count; the list keeps a sample

  bool has(ViolationKind k) const {
    return std::any_of(violations.begin(), violations.end(), [k](const Violation& v) { return v.kind == k; });
  }
};

// Exhaustive check of the layering, parent, and distance-2 coloring rules.
// Throws InputError when the layering does not cover every node.
inline LayeringReport validate(const RadioGraph& g, const Layering& lay, std::size_t max_listed = 64) {
  const std::size_t n = g.node_count();
  if (lay.layer.size() != n || lay.parent.size() != n) throw InputError("layering size does not match graph");
  if (auto missing = lay.unassigned(); !missing.empty()) {
    throw InputError("layering leaves " + std::to_string(missing.size()) + " node(s) without a layer, e.g. node " +
                     std::to_string(missing.front()));
  }
  if (!g.contains(lay.source)) throw InputError("layering source out of range");
  if (lay.colored() && lay.color.size() != n) throw InputError("coloring size does not match graph");

  LayeringReport rep;
  auto flag = [&](ViolationKind k, std::vector<NodeId> nodes) {
    if (rep.violations.size() < max_listed) rep.violations.push_back({k, std::move(nodes)});
    rep.valid = false;
  };

  std::vector<NodeId> zeros;
  for (NodeId v = 0; v < n; ++v) {
    if (lay.layer[v] == 0) zeros.push_back(v);
    rep.depth = std::max(rep.depth, lay.layer[v]);
  }
  if (zeros.size() > 1) flag(ViolationKind::MultipleSources, zeros);
  if (lay.layer[lay.source] != 0) flag(ViolationKind::SourceNotAtZero, {lay.source});
  if (lay.parent[lay.source]) flag(ViolationKind::SourceHasParent, {lay.source});

  for (NodeId v = 0; v < n; ++v) {
    if (v == lay.source) continue;
    if (!lay.parent[v]) {
      flag(ViolationKind::MissingParent, {v});
      continue;
    }
    NodeId p = *lay.parent[v];
    if (!g.contains(p) || !g.adjacent(v, p)) {
      flag(ViolationKind::ParentNotAdjacent, {v, p});
    } else if (lay.layer[p] >= lay.layer[v]) {
      flag(ViolationKind::ParentNotLower, {v, p});
    }
  }
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v : g.neighbors(u)) {
      rep.stretch = std::max(rep.stretch, std::abs(lay.layer[u] - lay.layer[v]));
    }
  }

  if (lay.colored()) {
    bool in_range = true;
    for (NodeId v = 0; v < n; ++v) {
      if (lay.color[v] < 0 || lay.color[v] >= lay.color_count) {
        flag(ViolationKind::ColorOutOfRange, {v});
        in_range = false;
      }
    }
    std::size_t collisions = 0;
    std::vector<NodeId> seen_by(n, static_cast<NodeId>(-1));
    auto consider = [&](NodeId u, NodeId w) {
      if (w <= u || seen_by[w] == u) return;
      seen_by[w] = u;
      if (lay.layer[u] != lay.layer[w] && lay.color[u] == lay.color[w]) {
        ++collisions;
        flag(ViolationKind::ColorCollision, {u, w});
      }
    };
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v : g.neighbors(u)) {
        consider(u, v);
        for (NodeId w : g.neighbors(v)) consider(u, w);
      }
    }
    rep.color_collisions = collisions;
    rep.collision_free = in_range && collisions == 0;
  }
  return rep;
}

// Hop distances from the source; parent is the lowest-id BFS predecessor.
inline Layering bfs_layering(const RadioGraph& g, NodeId source) {
  if (!g.contains(source)) throw InputError("source out of range");
  Layering lay(g.node_count(), source);
  lay.layer = bfs_distances(g.adjacency(), source);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (v == source) continue;
    for (NodeId u : g.neighbors(v)) {
      if (lay.layer[u] + 1 == lay.layer[v]) {
        lay.parent[v] = u;
        break;
      }
    }
  }
  return lay;
}

// c(u) = l(u) mod C; makes a d-stretch layering (2d+1)-collision-free.
inline Layering with_mod_coloring(Layering lay, std::int64_t colors) {
  if (colors < 1) throw InputError("color count must be positive");
  lay.color_count = colors;
  lay.color.resize(lay.layer.size());
  for (std::size_t v = 0; v < lay.layer.size(); ++v) lay.color[v] = lay.layer[v] % colors;
  return lay;
}

// Text format: "layering n C" then n lines "id layer parent color"
// (parent -1 for the source, color -1 when uncolored, C = 0 when uncolored).
inline void write_layering(std::ostream& out, const Layering& lay) {
  out << "layering " << lay.size() << ' ' << lay.color_count << '\n';
  for (NodeId v = 0; v < lay.size(); ++v) {
    out << v << ' ' << lay.layer[v] << ' ';
    if (lay.parent[v]) out << *lay.parent[v];
    else out << -1;
    out << ' ' << (lay.colored() ? lay.color[v] : kNoColor) << '\n';
  }
}

inline Layering read_layering(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> std::optional<std::string> {
    while (std::getline(in, line)) {
      ++lineno;
      auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return line;
    }
    return std::nullopt;
  };
  auto header = next_line();
  if (!header) throw InputError("layering file is empty");
  std::istringstream hs(*header);
  std::string tag;
  long long n = -1, c = -1;
  if (!(hs >> tag >> n >> c) || tag != "layering" || n < 1 || c < 0) {
    throw InputError("layering header must be \"layering n C\"");
  }
  Layering lay(static_cast<std::size_t>(n));
  lay.color_count = c;
  if (c > 0) lay.color.assign(static_cast<std::size_t>(n), kNoColor);
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  bool have_source = false;
  for (long long i = 0; i < n; ++i) {
    auto l = next_line();
    if (!l) throw InputError("layering file ends after " + std::to_string(i) + " of " + std::to_string(n) + " nodes");
    std::istringstream ss(*l);
    long long id, layer, parent, color;
    if (!(ss >> id >> layer >> parent >> color) || id < 0 || id >= n || layer < 0) {
      throw InputError("layering file line " + std::to_string(lineno) + ": expected \"id layer parent color\"");
    }
    if (seen[id]) throw InputError("layering file lists node " + std::to_string(id) + " twice");
    seen[id] = 1;
    lay.layer[id] = layer;
    if (parent >= 0) lay.parent[id] = static_cast<NodeId>(parent);
    if (c > 0) lay.color[id] = color;
    if (layer == 0 && !have_source) {
      lay.source = static_cast<NodeId>(id);
      have_source = true;
    }
  }
  return lay;
}

inline Layering read_layering_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open layering file " + path);
  return read_layering(in);
}

}  // namespace radionet::layering
