// Acceptance suite: one PASS/FAIL line per criterion; nonzero exit on any FAIL.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "radionet/radionet.hpp"

namespace fs = std::filesystem;
using namespace radionet;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

void fail(Outcome& o, const std::string& why) {
  if (o.ok) o.detail = why;
  o.ok = false;
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(3);
  s << x;
  return s.str();
}

// Criterion 1: step() against a brute-force count of transmitting neighbours.
Outcome model_soundness() {
  Outcome o;
  constexpr std::uint64_t kRounds = 100000;
  constexpr std::uint64_t kPerGraph = 250;
  std::uint64_t violations = 0;
  std::vector<std::vector<char>> adj;
  RadioGraph g;
  std::vector<NodeAction<std::uint32_t>> actions;
  for (std::uint64_t r = 0; r < kRounds; ++r) {
    RngStream rng(derive_seed(1, "fuzz"), 0, r);
    if (r % kPerGraph == 0) {
      const auto n = static_cast<std::size_t>(1 + rng.below(64));
      const double p = rng.uniform01() * 0.5;
      std::vector<Edge> edges;
      adj.assign(n, std::vector<char>(n, 0));
      for (NodeId v = 1; v < n; ++v) {
        const auto u = static_cast<NodeId>(rng.below(v));
        edges.emplace_back(u, v);
        adj[u][v] = adj[v][u] = 1;
      }
      for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
          if (!adj[u][v] && rng.uniform01() < p) {
            edges.emplace_back(u, v);
            adj[u][v] = adj[v][u] = 1;
          }
        }
      }
      g = RadioGraph(n, edges);
    }
    const std::size_t n = g.node_count();
    const double q = rng.uniform01();
    actions.assign(n, NodeAction<std::uint32_t>::listen());
    for (NodeId v = 0; v < n; ++v) {
      if (rng.uniform01() < q) actions[v] = NodeAction<std::uint32_t>::transmit(1000 + v, 1);
    }
    const auto out = step(g, actions);
    const auto rec = make_record(r + 1, std::span<const NodeAction<std::uint32_t>>(actions), out);
    bool bad = !audit_record(g, rec).empty();
    std::set<NodeId> collided(out.collisions.begin(), out.collisions.end());
    for (NodeId v = 0; v < n; ++v) {
      std::size_t hits = 0;
      NodeId from = 0;
      for (NodeId u = 0; u < n; ++u) {
        if (adj[v][u] && actions[u].transmits()) {
          ++hits;
          from = u;
        }
      }
      const auto& rx = out.receptions[v];
      if (actions[v].transmits()) {
        bad |= rx.has_value() || collided.count(v);
      } else if (hits == 1) {
        bad |= !rx || rx->from != from || rx->packet != 1000 + from || collided.count(v);
      } else {
        bad |= rx.has_value() || (collided.count(v) != 0) != (hits >= 2);
      }
    }
    violations += bad;
  }
  if (violations) fail(o, std::to_string(violations) + " violating rounds");
  o.detail = std::to_string(kRounds) + " fuzz rounds, " + std::to_string(violations) + " violations" +
             (o.ok ? "" : " (" + o.detail + ")");
  return o;
}

// Criterion 2: the three density properties over 10^5 windows.
Outcome bc_density() {
  Outcome o;
  const std::pair<std::size_t, std::uint64_t> cases[] = {{256, 4}, {1024, 16}, {1024, 512}};
  for (auto [n, d] : cases) {
    const auto rep = bc::check_density(bc::BcParams::from(n, d), 100000);
    if (!rep.all_ok()) {
      fail(o, "(n=" + std::to_string(n) + ", D=" + std::to_string(d) + ") property " +
                  (!rep.property1_ok ? "1" : !rep.property2_ok ? "2" : "3") + " fails");
    }
  }
  if (o.ok) o.detail = "(256,4) (1024,16) (1024,512) over 1e5 windows";
  return o;
}

const char* kCoreGraphs[] = {"path:32", "grid:8x8", "gnp:128"};

harness::ExperimentSpec spec_of(const std::string& json) {
  return harness::ExperimentSpec::from_json(nlohmann::json::parse(json));
}

// Independent collision-freeness check: all-pairs BFS up to distance 2.
bool collision_free_oracle(const RadioGraph& g, const layering::Layering& lay) {
  for (NodeId u = 0; u < g.node_count(); ++u) {
    const auto dist = bfs_distances(g.adjacency(), u);
    for (NodeId v = 0; v < g.node_count(); ++v) {
      if (v != u && dist[v] != kUnreachable && dist[v] <= 2 && lay.layer[u] != lay.layer[v] &&
          lay.color[u] == lay.color[v]) {
        return false;
      }
    }
  }
  return true;
}

// Criterion 3: single-source CR delivery and its round scaling.
Outcome cr_delivery() {
  Outcome o;
  std::vector<harness::MetricsRow> all;
  std::string counts;
  for (const char* gs : kCoreGraphs) {
    const auto rows = harness::run_experiment(spec_of(std::string(R"({"protocol": "crbc", "sweep": [")") + gs +
                                                      R"("], "seeds": {"count": 100}, "constants": {"c1": 8, "c2": 8}})"));
    const auto ok = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.success; });
    counts += std::string(counts.empty() ? "" : " ") + gs + "=" + std::to_string(ok) + "/100";
    if (ok < 99) fail(o, std::string(gs) + " delivered in " + std::to_string(ok) + "/100");
    all.insert(all.end(), rows.begin(), rows.end());
  }
  const auto fit = harness::fit_scaling(all, "D*log(n/D) + log(n)^2");
  if (fit.max_ratio > 4) fail(o, "max residual ratio " + fmt(fit.max_ratio) + " > 4");
  const std::string summary = counts + "; c=" + fmt(fit.c) + " max_ratio=" + fmt(fit.max_ratio);
  o.detail = o.ok ? summary : o.detail + " (" + summary + ")";
  return o;
}

// Criterion 4: build_pseudo_bfs validity, exhaustive collision-freeness, depth bound.
Outcome pseudo_bfs() {
  Outcome o;
  const harness::ExperimentSpec defaults;
  std::string counts;
  for (const char* gs : kCoreGraphs) {
    int valid = 0;
    for (Seed s = 0; s < 100; ++s) {
      const auto g = generate_graph(gs, s);
      layering::Layering lay;
      try {
        lay = layering::build_pseudo_bfs(g, 0, harness::eps_of(defaults), derive_seed(s, "layering"),
                                         harness::build_options(defaults));
      } catch (const ConstructionError&) {
        continue;
      }
      const auto rep = layering::validate(g, lay);
      const bool cf = rep.collision_free.value_or(false);
      if (cf != collision_free_oracle(g, lay)) fail(o, std::string(gs) + " seed " + std::to_string(s) + ": validator and oracle disagree");
      if (!rep.valid || !cf) continue;
      ++valid;
      const auto bound = 16 * g.diameter() + 16 * g.log_n();
      if (lay.depth() > bound) {
        fail(o, std::string(gs) + " seed " + std::to_string(s) + ": depth " + std::to_string(lay.depth()) + " > " +
                    std::to_string(bound));
      }
    }
    counts += std::string(counts.empty() ? "" : " ") + gs + "=" + std::to_string(valid) + "/100";
    if (valid < 99) fail(o, std::string(gs) + " valid in " + std::to_string(valid) + "/100");
  }
  o.detail = o.ok ? counts + " valid, depth within 16D+16log n" : o.detail + " (" + counts + ")";
  return o;
}

// Criterion 5: LRA bounds on BFS inputs, for d = 1 and for larger declared d.
Outcome lra_bounds() {
  Outcome o;
  const char* graphs[] = {"path:32", "grid:8x8", "gnp:128", "grid:16x16", "cycle:15", "star:12",
                          "tree:40", "gnp:40", "ring_of_cliques:64", "path:200"};
  layering::BuildOptions quiet;
  quiet.warn = nullptr;
  int runs = 0;
  for (const char* gs : graphs) {
    const auto g = generate_graph(gs, 4);
    const auto in = layering::bfs_layering(g, 0);
    for (std::int64_t d : {1, 2, 3}) {
      for (Seed s = 0; s < 5; ++s) {
        ++runs;
        const std::string where = std::string(gs) + " d=" + std::to_string(d) + " seed " + std::to_string(s);
        layering::Layering out;
        try {
          out = layering::refine_lra(g, in, d, s, quiet);
        } catch (const ConstructionError& e) {
          fail(o, where + ": " + e.what());
          continue;
        }
        const auto rep = layering::validate(g, out);
        if (!rep.valid) fail(o, where + ": invalid layering");
        if (rep.depth > 2 * in.depth() + 7 * d) fail(o, where + ": depth " + std::to_string(rep.depth));
        if (rep.stretch > 10 * d) fail(o, where + ": stretch " + std::to_string(rep.stretch));
      }
    }
  }
  if (o.ok) o.detail = std::to_string(runs) + " refinements within depth 2D'+7d and stretch 10d";
  return o;
}

layering::Layering default_layering(const RadioGraph& g, Seed s) {
  const harness::ExperimentSpec defaults;
  return layering::build_pseudo_bfs(g, 0, harness::eps_of(defaults), derive_seed(s, "layering"),
                                    harness::build_options(defaults));
}

// Criterion 6: gathering on grid 16x16 with per-round conservation audit.
Outcome gathering_grid() {
  Outcome o;
  std::string counts;
  for (std::size_t k : {16, 64}) {
    int ok = 0;
    for (Seed s = 0; s < 100; ++s) {
      const std::string where = "k=" + std::to_string(k) + " seed " + std::to_string(s);
      const auto g = generate_graph("grid:16x16", s);
      gathering::GatherConfig cfg;
      try {
        cfg.layering = default_layering(g, s);
      } catch (const ConstructionError&) {
        continue;
      }
      cfg.c_g = 4;
      cfg.check_layering = false;
      const auto placement = gathering::random_placement(g.node_count(), k, derive_seed(s, "placement"));
      const auto res = gathering::gather(g, cfg, placement, derive_seed(s, "gather"));
      if (res.conservation_violations) fail(o, where + ": " + res.first_violation);
      // No duplication, no loss: every placed message ends in exactly one bucket.
      std::multiset<gathering::Message> placed, seen;
      for (const auto& msgs : placement) placed.insert(msgs.begin(), msgs.end());
      for (const auto& d : res.delivered) seen.insert(d.message);
      seen.insert(res.failed.begin(), res.failed.end());
      for (const auto& [node, m] : res.undelivered) seen.insert(m);
      if (seen != placed) fail(o, where + ": delivered/failed/pending messages differ from the placement");
      const bool in_time = std::all_of(res.delivered.begin(), res.delivered.end(),
                                       [&](const auto& d) { return d.arrival_epoch <= res.epoch_bound; });
      ok += res.success() && in_time;
    }
    counts += std::string(counts.empty() ? "" : " ") + "k=" + std::to_string(k) + ":" + std::to_string(ok) + "/100";
    if (ok < 99) fail(o, "k=" + std::to_string(k) + " gathered in " + std::to_string(ok) + "/100");
  }
  o.detail = o.ok ? counts + " within the epoch bound, 0 conservation violations" : o.detail + " (" + counts + ")";
  return o;
}

// Rank via subset enumeration: the span of r independent rows has 2^r elements.
std::size_t subset_rank(const std::vector<gf2::BitVector>& rows, std::size_t bits) {
  std::set<std::vector<std::uint64_t>> span;
  for (std::uint64_t mask = 0; mask < (1ULL << rows.size()); ++mask) {
    gf2::BitVector acc(bits);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if ((mask >> i) & 1U) acc ^= rows[i];
    }
    span.insert(acc.words());
  }
  std::size_t r = 0;
  while ((std::size_t{1} << r) < span.size()) ++r;
  return r;
}

// Criterion 7: coded broadcast delivery, bit-exact decoding, GF(2) rank oracle.
Outcome coded_broadcast() {
  Outcome o;
  std::string counts;
  for (const char* gs : {"path:32", "grid:8x8"}) {
    int ok = 0;
    for (Seed s = 0; s < 100; ++s) {
      const std::string where = std::string(gs) + " seed " + std::to_string(s);
      const auto g = generate_graph(gs, s);
      nc::NcConfig cfg;
      try {
        cfg.layering = default_layering(g, s);
      } catch (const ConstructionError&) {
        continue;
      }
      cfg.c_nc = 8;
      cfg.check_layering = false;
      cfg.verify_combinations = true;
      const auto res = nc::nc_broadcast(g, cfg, nc::random_messages(8, 64, derive_seed(s, "messages")),
                                        derive_seed(s, "broadcast"));
      bool all = true;
      for (NodeId v = 0; v < g.node_count(); ++v) {
        if (res.decode_round[v] && !res.decoded_correctly[v]) fail(o, where + ": node " + std::to_string(v) + " decoded wrong bits");
        all &= res.decode_round[v].has_value() && *res.decode_round[v] <= res.scheduled_rounds;
      }
      ok += all;
    }
    counts += std::string(counts.empty() ? "" : " ") + gs + "=" + std::to_string(ok) + "/100";
    if (ok < 99) fail(o, std::string(gs) + " decoded everywhere in " + std::to_string(ok) + "/100");
  }

  // Rank and store oracle over random systems with k <= 8.
  std::size_t cases = 0;
  for (Seed s = 0; s < 3000; ++s) {
    RngStream rng(derive_seed(s, "rank-oracle"), 0, 0);
    const auto k = static_cast<std::size_t>(1 + rng.below(8));
    const auto m = static_cast<std::size_t>(rng.below(11));
    std::vector<gf2::BitVector> msgs, coeffs;
    for (std::size_t i = 0; i < k; ++i) msgs.push_back(gf2::BitVector::from_word(rng.next(), 16));
    gf2::PacketStore store(k, 16);
    std::vector<gf2::BitVector> prefix;
    for (std::size_t j = 0; j < m; ++j) {
      gf2::BitVector c(k);
      for (std::size_t i = 0; i < k; ++i) c.set(i, rng.below(4) == 0);
      gf2::CodedPacket p{c, gf2::BitVector(16)};
      for (std::size_t i = 0; i < k; ++i) {
        if (c.get(i)) p.payload ^= msgs[i];
      }
      store.add(p);
      prefix.push_back(c);
      ++cases;
      const auto want = subset_rank(prefix, k);
      if (gf2::gf2_rank(prefix) != want || store.rank() != want) {
        fail(o, "rank oracle mismatch at case seed " + std::to_string(s));
      }
    }
    if (store.rank() == k) {
      const auto dec = gf2::decode(store, k);
      if (!dec || *dec != msgs) fail(o, "store decode differs from messages at case seed " + std::to_string(s));
    }
  }
  o.detail = o.ok ? counts + " bit-exact; " + std::to_string(cases) + " rank checks vs subset-XOR oracle"
                  : o.detail + " (" + counts + ")";
  return o;
}

// Criterion 8: gossip on rings of cliques; medians fitted against n log n.
Outcome gossip_scaling() {
  Outcome o;
  std::vector<harness::MetricsRow> medians;
  std::string counts;
  for (int n : {64, 128, 256}) {
    const std::string gs = "ring_of_cliques:" + std::to_string(n);
    auto rows = harness::run_experiment(spec_of(R"({"protocol": "gossip", "sweep": [")" + gs + R"("], "seeds": {"count": 20}})"));
    const auto ok = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.success; });
    if (ok < 19) fail(o, gs + " succeeded in " + std::to_string(ok) + "/20");
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.rounds < b.rounds; });
    auto mid = rows[rows.size() / 2];
    if (rows.size() % 2 == 0) mid.rounds = (rows[rows.size() / 2 - 1].rounds + rows[rows.size() / 2].rounds) / 2;
    medians.push_back(mid);
    counts += std::string(counts.empty() ? "" : " ") + "n=" + std::to_string(n) + ":" + std::to_string(ok) +
              "/20 median=" + std::to_string(mid.rounds);
  }
  const auto fit = harness::fit_scaling(medians, "n*log(n)");
  if (fit.max_ratio > 3) fail(o, "max residual ratio " + fmt(fit.max_ratio) + " > 3");
  const std::string summary = counts + "; c=" + fmt(fit.c) + " max_ratio=" + fmt(fit.max_ratio);
  o.detail = o.ok ? summary : o.detail + " (" + summary + ")";
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::pair<int, std::string> cli(const std::string& args) {
  const std::string cmd = std::string(RADIONET_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  std::string out;
  char buf[4096];
  while (auto n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int st = pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

template <class F>
std::string trace_text(F run) {
  std::ostringstream s;
  write_trace_jsonl(s, run());
  return s.str();
}

// Criterion 9: same seed, same bytes, in-process and through the CLI.
Outcome determinism() {
  Outcome o;
  auto same = [&](const std::string& what, const std::string& a, const std::string& b) {
    if (a.empty()) fail(o, what + ": empty output");
    if (a != b) fail(o, what + ": reruns differ");
  };
  const auto crbc = spec_of(R"({"protocol": "crbc", "sweep": ["path:32", "grid:8x8", "gnp:128"], "seeds": {"count": 20}})");
  std::ostringstream c1, c2;
  harness::write_metrics_csv(c1, harness::run_experiment(crbc));
  harness::write_metrics_csv(c2, harness::run_experiment(crbc));
  same("crbc metrics", c1.str(), c2.str());

  const auto grid = generate_graph("grid:16x16", 3);
  auto gather_trace = [&] {
    gathering::GatherConfig cfg;
    cfg.layering = default_layering(grid, 3);
    cfg.check_layering = false;
    cfg.run.record_trace = true;
    return gathering::gather(grid, cfg, gathering::random_placement(256, 16, 5), 7).trace;
  };
  same("gather trace", trace_text(gather_trace), trace_text(gather_trace));
  const auto small = generate_graph("grid:8x8", 3);
  auto nc_trace = [&] {
    nc::NcConfig cfg;
    cfg.layering = default_layering(small, 3);
    cfg.check_layering = false;
    cfg.run.record_trace = true;
    return nc::nc_broadcast(small, cfg, nc::random_messages(8, 64, 5), 7).trace;
  };
  same("ncbc trace", trace_text(nc_trace), trace_text(nc_trace));
  const auto ring = generate_graph("ring_of_cliques:64", 2);
  auto gossip_trace = [&] {
    pipelines::PipelineOptions opts;
    opts.record_trace = true;
    return pipelines::gossip(ring, 0, 11, opts).trace;
  };
  same("gossip trace", trace_text(gossip_trace), trace_text(gossip_trace));

  const fs::path root = fs::temp_directory_path() / "radionet_acceptance";
  const std::vector<std::string> commands = {
      "gen grid:8x8 --seed 3 --out {}g.txt",
      "crbc --graph {}g.txt --source 0 --seed 4 --emit-trace {}t.jsonl --metrics {}m.csv",
      "layer build --graph {}g.txt --seed 5 --emit-trace {}t.jsonl --metrics {}m.csv --out {}l.txt",
      "gather --graph {}g.txt --layering {}l.txt --place random:12 --seed 6 --emit-trace {}t.jsonl --metrics {}m.csv",
      "ncbc --graph {}g.txt --layering {}l.txt --k 8 --seed 7 --emit-trace {}t.jsonl --metrics {}m.csv",
      "gossip --graph {}g.txt --leader 0 --seed 8 --emit-trace {}t.jsonl --metrics {}m.csv",
      "msbc --graph {}g.txt --leader 0 --place random:9 --seed 9 --emit-trace {}t.jsonl --metrics {}m.csv",
      "exp run {}spec.json --out {}m.csv",
  };
  std::vector<std::string> outputs[2];
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path dir = root / std::to_string(pass);
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string prefix = dir.string() + "/";
    std::ofstream(prefix + "spec.json") << R"({"protocol": "layer", "sweep": ["grid:8x8"], "seeds": {"count": 5}})";
    for (const auto& tmpl : commands) {
      std::string cmd = tmpl;
      for (auto pos = cmd.find("{}"); pos != std::string::npos; pos = cmd.find("{}", pos)) cmd.replace(pos, 2, prefix);
      const auto [code, out] = cli(cmd);
      if (code != 0) fail(o, "`" + tmpl.substr(0, tmpl.find(" --")) + "` exited " + std::to_string(code));
      std::string text = out;
      for (const char* f : {"g.txt", "l.txt", "t.jsonl", "m.csv"}) {
        if (tmpl.find(std::string("{}") + f) != std::string::npos) text += "\n--" + std::string(f) + "\n" + slurp(prefix + f);
      }
      outputs[pass].push_back(text);
    }
  }
  for (std::size_t i = 0; i < commands.size(); ++i) same("cli " + commands[i].substr(0, commands[i].find(" --")), outputs[0][i], outputs[1][i]);
  fs::remove_all(root);
  if (o.ok) o.detail = "in-process metrics/traces and " + std::to_string(commands.size()) + " CLI commands byte-identical on rerun";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, model_soundness},
      {2, bc_density},
      {3, cr_delivery},
      {4, pseudo_bfs},
      {5, lra_bounds},
      {6, gathering_grid},
      {7, coded_broadcast},
      {8, gossip_scaling},
      {9, determinism},
  };
  bool all = true;
  for (const auto& [id, run] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.ok ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail << " [" << fmt(secs) << "s]"
              << std::endl;
    all &= o.ok;
  }
  return all ? 0 : 1;
}
