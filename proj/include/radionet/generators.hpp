#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "radionet/errors.hpp"
#include "radionet/graph.hpp"
#include "radionet/rng.hpp"

namespace radionet {

enum class Family { Path, Cycle, Grid, Star, Tree, Gnp, RingOfCliques };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::Path: return "path";
    case Family::Cycle: return "cycle";
    case Family::Grid: return "grid";
    case Family::Star: return "star";
    case Family::Tree: return "tree";
    case Family::Gnp: return "gnp";
    case Family::RingOfCliques: return "ring_of_cliques";
  }
  return "unknown";
}

inline Family parse_family(const std::string& s) {
  for (auto f : {Family::Path, Family::Cycle, Family::Grid, Family::Star, Family::Tree, Family::Gnp,
                 Family::RingOfCliques}) {
    if (s == to_string(f)) return f;
  }
  throw InputError("unknown graph family \"" + s + "\"");
}

// Family parameters. n is the node count except for grids (width x height).
// gnp without p uses 3 ln n / n; ring_of_cliques uses cliques of `clique` nodes.
struct GraphSpec {
  Family family = Family::Path;
  std::size_t n = 1;
  std::size_t width = 0;
  std::size_t height = 0;
  std::optional<double> p;
  std::size_t clique = 8;

  std::size_t node_count() const { return family == Family::Grid ? width * height : n; }

  // "path:32", "grid:8x8", "gnp:128", "gnp:64:0.2", "ring_of_cliques:64" (optionally ":size").
  static GraphSpec parse(const std::string& text) {
    GraphSpec s;
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() < 2) throw InputError("graph spec \"" + text + "\" must look like family:size");
    s.family = parse_family(parts[0]);
    try {
      if (s.family == Family::Grid) {
        auto x = parts[1].find('x');
        if (x == std::string::npos) throw InputError("grid spec needs WxH");
        s.width = std::stoul(parts[1].substr(0, x));
        s.height = std::stoul(parts[1].substr(x + 1));
      } else {
        s.n = std::stoul(parts[1]);
      }
      if (parts.size() > 2) {
        if (s.family == Family::Gnp) s.p = std::stod(parts[2]);
        else if (s.family == Family::RingOfCliques) s.clique = std::stoul(parts[2]);
        else throw InputError("family " + parts[0] + " takes no extra parameter");
      }
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const InputError*>(&e)) throw;
      throw InputError("graph spec \"" + text + "\" has a malformed number");
    }
    return s;
  }

  std::string to_string() const {
    std::ostringstream out;
    out << radionet::to_string(family) << ':';
    if (family == Family::Grid) out << width << 'x' << height;
    else out << n;
    if (family == Family::Gnp && p) out << ':' << *p;
    if (family == Family::RingOfCliques && clique != 8) out << ':' << clique;
    return out.str();
  }
};

inline constexpr int kGnpRetryCap = 1000;

namespace detail {

inline bool connected(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::vector<NodeId>> adj(n);
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (auto d : bfs_distances(adj, 0)) {
    if (d == kUnreachable) return false;
  }
  return true;
}

}  // namespace detail

inline RadioGraph generate_graph(const GraphSpec& s, Seed seed) {
  const std::size_t n = s.node_count();
  if (n == 0) throw InputError("graph must have at least one node");
  std::vector<Edge> e;
  auto id = [](std::size_t x) { return static_cast<NodeId>(x); };
  switch (s.family) {
    case Family::Path:
      for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(id(i), id(i + 1));
      break;
    case Family::Cycle:
      if (n < 3) throw InputError("cycle needs n >= 3");
      for (std::size_t i = 0; i < n; ++i) e.emplace_back(id(i), id((i + 1) % n));
      break;
    case Family::Grid:
      for (std::size_t r = 0; r < s.height; ++r) {
        for (std::size_t c = 0; c < s.width; ++c) {
          const auto v = r * s.width + c;
          if (c + 1 < s.width) e.emplace_back(id(v), id(v + 1));
          if (r + 1 < s.height) e.emplace_back(id(v), id(v + s.width));
        }
      }
      break;
    case Family::Star:
      for (std::size_t i = 1; i < n; ++i) e.emplace_back(0, id(i));
      break;
    case Family::Tree: {
      RngStream rng(derive_seed(seed, "tree"), 0, 0);
      for (std::size_t i = 1; i < n; ++i) e.emplace_back(id(rng.below(i)), id(i));
      break;
    }
    case Family::Gnp: {
      const double p = s.p.value_or(n > 1 ? 3.0 * std::log(static_cast<double>(n)) / static_cast<double>(n) : 1.0);
      if (!(p >= 0.0 && p <= 1.0)) throw InputError("gnp needs 0 <= p <= 1");
      for (int attempt = 0; attempt < kGnpRetryCap; ++attempt) {
        e.clear();
        RngStream rng(derive_seed(seed, "gnp"), 0, static_cast<std::uint64_t>(attempt));
        for (std::size_t u = 0; u < n; ++u) {
          for (std::size_t v = u + 1; v < n; ++v) {
            if (rng.uniform01() < p) e.emplace_back(id(u), id(v));
          }
        }
        if (detail::connected(n, e)) return RadioGraph(n, e);
      }
      throw InputError("gnp(" + std::to_string(n) + ", " + std::to_string(p) + ") stayed disconnected after " +
                       std::to_string(kGnpRetryCap) + " samples");
    }
    case Family::RingOfCliques: {
      const std::size_t k = s.clique;
      if (k < 2 || n % k != 0) throw InputError("ring_of_cliques needs n to be a multiple of the clique size");
      const std::size_t m = n / k;
      for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t a = 0; a < k; ++a) {
          for (std::size_t b = a + 1; b < k; ++b) e.emplace_back(id(c * k + a), id(c * k + b));
        }
      }
      // Node 0 of each clique bridges to node 1 of the next.
      if (m == 2) e.emplace_back(0, id(k + 1));
      if (m > 2) {
        for (std::size_t c = 0; c < m; ++c) e.emplace_back(id(c * k), id(((c + 1) % m) * k + 1));
      }
      break;
    }
  }
  return RadioGraph(n, e);
}

inline RadioGraph generate_graph(const std::string& spec, Seed seed) { return generate_graph(GraphSpec::parse(spec), seed); }

}  // namespace radionet
