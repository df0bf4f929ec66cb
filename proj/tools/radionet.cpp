#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "radionet/radionet.hpp"

using namespace radionet;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kProtocolFailed = 1;
constexpr int kBadInput = 2;
constexpr int kConstructionFailed = 3;

struct Common {
  std::string graph;
  Seed seed = 0;
  std::string trace;
  std::string metrics;
  std::string out;
};

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw IoError("cannot write " + path);
    }
  }
  std::ostream& get() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

void write_trace(const std::string& path, const RoundTrace& t) {
  if (path.empty()) return;
  Output o(path);
  write_trace_jsonl(o.get(), t);
}

void write_metrics(const std::string& path, const harness::MetricsRow& row) {
  if (!path.empty()) harness::save_metrics_csv(path, {row});
}

harness::MetricsRow base_row(const std::string& protocol, const RadioGraph& g, Seed seed) {
  harness::MetricsRow r;
  r.protocol = protocol;
  r.n = g.node_count();
  r.D = g.diameter();
  r.seed = seed;
  return r;
}

NodeId node_arg(const RadioGraph& g, std::int64_t v, const char* what) {
  if (v < 0 || !g.contains(static_cast<NodeId>(v))) throw InputError(std::string(what) + " " + std::to_string(v) + " is not a node");
  return static_cast<NodeId>(v);
}

// "random:k" or a file of "node count" lines; tokens are numbered in file order.
gathering::Placement read_placement(const std::string& spec, std::size_t n, Seed seed) {
  if (spec.rfind("random:", 0) == 0) {
    const auto k = std::stoull(spec.substr(7));
    return gathering::random_placement(n, k, derive_seed(seed, "placement"));
  }
  std::ifstream in(spec);
  if (!in) throw InputError("cannot open placement file " + spec);
  gathering::Placement p(n);
  gathering::Message next = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::int64_t node = -1, count = -1;
    if (!(ls >> node >> count) || node < 0 || static_cast<std::size_t>(node) >= n || count < 0) {
      throw InputError("bad placement line '" + line + "'");
    }
    for (std::int64_t i = 0; i < count; ++i) p[static_cast<std::size_t>(node)].push_back(next++);
  }
  return p;
}

void add_common(CLI::App* c, Common& o, bool graph = true) {
  if (graph) c->add_option("--graph", o.graph, "graph file")->required();
  c->add_option("--seed", o.seed, "random seed");
  c->add_option("--emit-trace", o.trace, "write the round trace as JSON lines");
  c->add_option("--metrics", o.metrics, "write a metrics CSV row");
  c->add_option("--out", o.out, "output file (default stdout)");
}

std::string pipeline_summary(const pipelines::PipelineResult& r) {
  std::ostringstream s;
  s << "stage,rounds,scheduled\n";
  for (const auto& st : r.stages) s << st.name << ',' << st.rounds << ',' << st.scheduled << '\n';
  s << "total," << r.total_rounds << ",\n";
  return s.str();
}

int run_pipeline(const std::string& name, const Common& o, const RadioGraph& g, const pipelines::PipelineResult& r) {
  Output out(o.out);
  out.get() << pipeline_summary(r);
  write_trace(o.trace, r.trace);
  auto row = base_row(name, g, o.seed);
  row.k = r.k;
  row.C = r.colors;
  row.rounds = r.total_rounds;
  row.success = r.success;
  for (const auto& st : r.stages) row.notes += (row.notes.empty() ? "" : " ") + st.name + "=" + std::to_string(st.rounds);
  if (r.failure_stage) {
    row.notes += "; " + *r.failure_stage + " failed: " + r.failure_detail.value_or("");
    std::cerr << name << ": " << *r.failure_stage << " stage failed: " << r.failure_detail.value_or("") << '\n';
  }
  write_metrics(o.metrics, row);
  return r.success ? kOk : kProtocolFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radio network protocol simulator"};
  app.require_subcommand(1);
  int status = kOk;

  // gen
  Common gen_o;
  std::string gen_spec;
  auto* gen = app.add_subcommand("gen", "generate a graph: path:N cycle:N star:N tree:N grid:WxH gnp:N[:p] ring_of_cliques:N[:size]");
  gen->add_option("spec", gen_spec, "graph spec")->required();
  add_common(gen, gen_o, false);
  gen->callback([&] {
    const auto g = generate_graph(gen_spec, gen_o.seed);
    Output out(gen_o.out);
    write_graph(out.get(), g);
    write_trace(gen_o.trace, {});
    auto row = base_row("gen", g, gen_o.seed);
    row.success = true;
    row.notes = "graph=" + gen_spec;
    write_metrics(gen_o.metrics, row);
  });

  // bc
  auto* bc_cmd = app.add_subcommand("bc", "BC exponent sequence");
  bc_cmd->require_subcommand(1);
  std::uint64_t bc_n = 0, bc_d = 1, bc_count = 0, bc_windows = 100000;
  auto* dump = bc_cmd->add_subcommand("dump", "print index,value pairs");
  dump->add_option("--n", bc_n)->required();
  dump->add_option("--d", bc_d)->required();
  dump->add_option("--count", bc_count)->required();
  dump->callback([&] {
    const auto p = bc::BcParams::from(bc_n, bc_d);
    std::cout << "index,value\n";
    for (std::uint64_t i = 0; i < bc_count; ++i) std::cout << i << ',' << bc::bc_value(i, p) << '\n';
  });
  auto* check = bc_cmd->add_subcommand("check", "check the density properties");
  check->add_option("--n", bc_n)->required();
  check->add_option("--d", bc_d)->required();
  check->add_option("--windows", bc_windows, "number of window starts checked");
  check->callback([&] {
    const auto p = bc::BcParams::from(bc_n, bc_d);
    const auto r = bc::check_density(p, bc_windows);
    nlohmann::ordered_json j;
    j["n"] = bc_n;
    j["d"] = bc_d;
    j["log_n"] = p.log_n;
    j["log_nD"] = p.log_nD;
    j["windows"] = bc_windows;
    auto opt = [](const auto& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr); };
    j["property1"] = {{"ok", r.property1_ok}, {"witness", opt(r.property1_witness)}};
    j["property2"] = {{"ok", r.property2_ok}, {"witness", opt(r.property2_witness)}, {"value", opt(r.property2_value)}};
    j["property3"] = {{"ok", r.property3_ok}, {"witness", opt(r.property3_witness)}};
    j["window_lengths"] = r.window_lengths;
    std::cout << j.dump(2) << '\n';
    if (!(r.property1_ok && r.property2_ok && r.property3_ok)) status = kProtocolFailed;
  });

  // crbc
  Common cr_o;
  std::int64_t cr_source = 0, cr_delta = 0, cr_c1 = 8, cr_c2 = 8, cr_phases = 0;
  auto* crbc = app.add_subcommand("crbc", "single-source CR-Broadcast");
  add_common(crbc, cr_o);
  crbc->add_option("--source", cr_source);
  crbc->add_option("--delta", cr_delta, "rounds per phase (default log(n/D))");
  crbc->add_option("--phases", cr_phases, "phase count (default from c1, c2)");
  crbc->add_option("--c1", cr_c1);
  crbc->add_option("--c2", cr_c2);
  crbc->callback([&] {
    const auto g = read_graph_file(cr_o.graph);
    const auto src = node_arg(g, cr_source, "source");
    const auto n = g.node_count();
    const auto p = bc::BcParams::from(n, static_cast<std::uint64_t>(std::max<std::int64_t>(g.diameter(), 1)));
    const auto delta = cr_delta > 0 ? cr_delta : p.log_nD;
    const auto phases = cr_phases > 0 ? cr_phases : cr::cr_phase_count(g.diameter(), static_cast<std::int64_t>(n), delta, cr_c1, cr_c2);
    auto cfg = cr::single_source_config(g, src, delta, phases);
    std::vector<std::optional<std::uint64_t>> msgs(n);
    msgs[src] = 1;
    cr::CrOptions<std::uint64_t> opts;
    opts.run.record_trace = !cr_o.trace.empty();
    auto res = cr::cr_broadcast(g, cfg, msgs, cr_o.seed, opts);
    Output out(cr_o.out);
    out.get() << "node,phase,round,sender\n";
    std::size_t reached = 0;
    for (NodeId v = 0; v < n; ++v) {
      const auto& f = res.first_reception[v];
      out.get() << v << ',';
      if (f) out.get() << f->phase << ',' << f->round << ',' << f->sender;
      else out.get() << ",,";
      out.get() << '\n';
      if (res.message[v]) ++reached;
    }
    write_trace(cr_o.trace, res.trace);
    auto row = base_row("crbc", g, cr_o.seed);
    row.k = 1;
    row.rounds = res.completion_round();
    row.success = reached == n;
    row.notes = "delta=" + std::to_string(delta) + " scheduled=" + std::to_string(res.scheduled_rounds);
    write_metrics(cr_o.metrics, row);
    if (reached != n) {
      std::cerr << "crbc: " << n - reached << " node(s) never received\n";
      status = kProtocolFailed;
    }
  });

  // layer
  auto* layer = app.add_subcommand("layer", "layerings");
  layer->require_subcommand(1);
  Common lb_o;
  std::int64_t lb_source = 0, lb_delta = 0, lb_colors = 3;
  double lb_eps = 0.5;
  std::string lb_method = "pseudo-bfs";
  layering::BuildOptions build_opts;
  build_opts.warn = [](const std::string& m) { std::cerr << "warning: " << m << '\n'; };
  auto add_build = [&](CLI::App* c) {
    c->add_option("--c1", build_opts.c1);
    c->add_option("--c2", build_opts.c2);
    c->add_option("--alpha-lra", build_opts.alpha_lra);
    c->add_option("--c-delta", build_opts.c_delta);
    c->add_option("--c-width", build_opts.c_width);
  };
  auto* lbuild = layer->add_subcommand("build", "construct a layering");
  add_common(lbuild, lb_o);
  add_build(lbuild);
  lbuild->add_option("--source", lb_source);
  lbuild->add_option("--method", lb_method, "pseudo-bfs | basic | bfs")->check(CLI::IsMember({"pseudo-bfs", "basic", "bfs"}));
  lbuild->add_option("--eps", lb_eps, "pseudo-bfs: recursion depth is ceil(1/eps)");
  lbuild->add_option("--delta", lb_delta, "basic: rounds per phase (default log(n/D))");
  lbuild->add_option("--colors", lb_colors, "bfs: color layer mod this (0 for uncolored)");
  lbuild->callback([&] {
    const auto g = read_graph_file(lb_o.graph);
    const auto src = node_arg(g, lb_source, "source");
    layering::BuildStats stats;
    RoundTrace trace;
    auto opts = build_opts;
    if (!lb_o.trace.empty()) opts.trace = &trace;
    layering::Layering lay;
    if (lb_method == "bfs") {
      lay = layering::bfs_layering(g, src);
      if (lb_colors > 0) lay = layering::with_mod_coloring(lay, lb_colors);
    } else if (lb_method == "basic") {
      const auto p = bc::BcParams::from(g.node_count(), static_cast<std::uint64_t>(std::max<std::int64_t>(g.diameter(), 1)));
      lay = layering::basic_layering(g, src, lb_delta > 0 ? lb_delta : p.log_nD, lb_o.seed, opts, &stats);
    } else {
      lay = layering::build_pseudo_bfs(g, src, lb_eps, lb_o.seed, opts, &stats);
    }
    Output out(lb_o.out);
    layering::write_layering(out.get(), lay);
    write_trace(lb_o.trace, trace);
    auto row = base_row("layer", g, lb_o.seed);
    row.C = lay.color_count;
    row.rounds = stats.total_rounds();
    row.success = true;
    row.notes = "method=" + lb_method + " depth=" + std::to_string(lay.depth());
    write_metrics(lb_o.metrics, row);
  });

  Common lv_o;
  std::string lv_layering;
  auto* lvalidate = layer->add_subcommand("validate", "check a layering; prints a JSON report");
  lvalidate->add_option("--graph", lv_o.graph)->required();
  lvalidate->add_option("--layering", lv_layering)->required();
  lvalidate->callback([&] {
    const auto g = read_graph_file(lv_o.graph);
    const auto lay = layering::read_layering_file(lv_layering);
    const auto rep = layering::validate(g, lay);
    nlohmann::ordered_json j;
    j["valid"] = rep.valid;
    j["depth"] = rep.depth;
    j["stretch"] = rep.stretch;
    j["colors"] = lay.color_count;
    j["collision_free"] = rep.collision_free ? nlohmann::ordered_json(*rep.collision_free) : nlohmann::ordered_json(nullptr);
    j["color_collisions"] = rep.color_collisions;
    auto& vs = j["violations"] = nlohmann::ordered_json::array();
    for (const auto& v : rep.violations) vs.push_back({{"kind", layering::to_string(v.kind)}, {"nodes", v.nodes}});
    std::cout << j.dump(2) << '\n';
    if (!rep.valid || !rep.collision_free.value_or(true)) status = kProtocolFailed;
  });

  Common lr_o;
  std::string lr_layering, lr_method = "lra";
  std::int64_t lr_d = 0, lr_r = 2;
  auto* lrefine = layer->add_subcommand("refine", "refine a layering into a collision-free one");
  add_common(lrefine, lr_o);
  add_build(lrefine);
  lrefine->add_option("--layering", lr_layering)->required();
  lrefine->add_option("--method", lr_method, "lra | recursive")->check(CLI::IsMember({"lra", "recursive"}));
  lrefine->add_option("--d", lr_d, "lra: stretch bound (default: measured stretch)");
  lrefine->add_option("--r", lr_r, "recursive: levels");
  lrefine->callback([&] {
    const auto g = read_graph_file(lr_o.graph);
    const auto in = layering::read_layering_file(lr_layering);
    layering::BuildStats stats;
    RoundTrace trace;
    auto opts = build_opts;
    if (!lr_o.trace.empty()) opts.trace = &trace;
    layering::Layering lay;
    if (lr_method == "lra") {
      const auto d = lr_d > 0 ? lr_d : std::max<std::int64_t>(layering::validate(g, in).stretch, 1);
      lay = layering::refine_lra(g, in, d, lr_o.seed, opts, &stats);
    } else {
      lay = layering::refine_recursive(g, in, lr_r, lr_o.seed, opts, &stats);
    }
    Output out(lr_o.out);
    layering::write_layering(out.get(), lay);
    write_trace(lr_o.trace, trace);
    auto row = base_row("layer-refine", g, lr_o.seed);
    row.C = lay.color_count;
    row.rounds = stats.total_rounds();
    row.success = true;
    row.notes = "method=" + lr_method + " depth=" + std::to_string(lay.depth());
    write_metrics(lr_o.metrics, row);
  });

  // gather
  Common g_o;
  std::string g_layering, g_place = "random:1";
  std::int64_t g_cg = 4, g_cap = 0;
  auto* gather_cmd = app.add_subcommand("gather", "gather messages to the layering source");
  add_common(gather_cmd, g_o);
  gather_cmd->add_option("--layering", g_layering)->required();
  gather_cmd->add_option("--place", g_place, "random:k or a file of 'node count' lines");
  gather_cmd->add_option("--c-g", g_cg);
  gather_cmd->add_option("--wave-cap", g_cap, "default 4 log n");
  gather_cmd->callback([&] {
    const auto g = read_graph_file(g_o.graph);
    gathering::GatherConfig cfg;
    cfg.layering = layering::read_layering_file(g_layering);
    cfg.c_g = g_cg;
    if (g_cap > 0) cfg.wave_cap = g_cap;
    cfg.run.record_trace = !g_o.trace.empty();
    const auto place = read_placement(g_place, g.node_count(), g_o.seed);
    auto res = gathering::gather(g, cfg, place, g_o.seed);
    auto delivered = res.delivered;
    std::sort(delivered.begin(), delivered.end(), [](const auto& a, const auto& b) { return a.message < b.message; });
    Output out(g_o.out);
    out.get() << "message,arrival_epoch,waves_used\n";
    for (const auto& d : delivered) out.get() << d.message << ',' << d.arrival_epoch << ',' << d.waves_used << '\n';
    write_trace(g_o.trace, res.trace);
    auto row = base_row("gather", g, g_o.seed);
    row.k = res.k;
    row.C = cfg.layering.color_count;
    row.rounds = res.completion_round();
    row.success = res.success() && res.conservation_violations == 0;
    row.notes = "epoch_bound=" + std::to_string(res.epoch_bound);
    write_metrics(g_o.metrics, row);
    if (!row.success) {
      std::cerr << "gather: " << res.delivered.size() << " of " << res.k << " delivered, " << res.failed.size()
                << " over the wave cap, " << res.conservation_violations << " conservation violation(s)\n";
      status = kProtocolFailed;
    }
  });

  // ncbc
  Common n_o;
  std::string n_layering;
  std::size_t n_k = 1, n_bits = 64;
  std::int64_t n_cnc = 8;
  auto* ncbc = app.add_subcommand("ncbc", "network-coded broadcast of k random messages from the layering source");
  add_common(ncbc, n_o);
  ncbc->add_option("--layering", n_layering)->required();
  ncbc->add_option("--k", n_k)->required()->check(CLI::PositiveNumber);
  ncbc->add_option("--bits", n_bits, "message length")->check(CLI::PositiveNumber);
  ncbc->add_option("--c-nc", n_cnc);
  ncbc->callback([&] {
    const auto g = read_graph_file(n_o.graph);
    nc::NcConfig cfg;
    cfg.layering = layering::read_layering_file(n_layering);
    cfg.c_nc = n_cnc;
    cfg.run.record_trace = !n_o.trace.empty();
    auto res = nc::nc_broadcast(g, cfg, nc::random_messages(n_k, n_bits, derive_seed(n_o.seed, "messages")), n_o.seed);
    Output out(n_o.out);
    out.get() << "node,decode_round,packets_received\n";
    for (NodeId v = 0; v < g.node_count(); ++v) {
      out.get() << v << ',';
      if (res.decode_round[v]) out.get() << *res.decode_round[v];
      out.get() << ',' << res.packets_received[v] << '\n';
    }
    write_trace(n_o.trace, res.trace);
    auto row = base_row("ncbc", g, n_o.seed);
    row.k = n_k;
    row.C = cfg.layering.color_count;
    row.rounds = res.completion_round();
    row.success = std::all_of(res.decoded_correctly.begin(), res.decoded_correctly.end(), [](bool b) { return b; });
    row.notes = "scheduled=" + std::to_string(res.scheduled_rounds);
    write_metrics(n_o.metrics, row);
    if (!row.success) {
      std::cerr << "ncbc: " << res.undecoded().size() << " node(s) did not decode\n";
      status = kProtocolFailed;
    }
  });

  // gossip / msbc
  Common p_o;
  std::int64_t p_leader = 0;
  std::string p_place = "random:1";
  pipelines::PipelineOptions p_opts;
  std::int64_t p_cap = 0;
  auto add_pipeline = [&](CLI::App* c) {
    add_common(c, p_o);
    c->add_option("--leader", p_leader)->required();
    c->add_option("--eps", p_opts.eps);
    c->add_option("--c1", p_opts.build.c1);
    c->add_option("--c2", p_opts.build.c2);
    c->add_option("--alpha-lra", p_opts.build.alpha_lra);
    c->add_option("--c-g", p_opts.c_g);
    c->add_option("--wave-cap", p_cap);
    c->add_option("--c-nc", p_opts.c_nc);
  };
  auto* gossip = app.add_subcommand("gossip", "all-to-all broadcast; node v starts with message v");
  add_pipeline(gossip);
  gossip->callback([&] {
    const auto g = read_graph_file(p_o.graph);
    if (p_cap > 0) p_opts.wave_cap = p_cap;
    p_opts.record_trace = !p_o.trace.empty();
    status = run_pipeline("gossip", p_o, g, pipelines::gossip(g, node_arg(g, p_leader, "leader"), p_o.seed, p_opts));
  });
  auto* msbc = app.add_subcommand("msbc", "multi-source broadcast of placed messages");
  add_pipeline(msbc);
  msbc->add_option("--place", p_place, "random:k or a file of 'node count' lines");
  msbc->callback([&] {
    const auto g = read_graph_file(p_o.graph);
    if (p_cap > 0) p_opts.wave_cap = p_cap;
    p_opts.record_trace = !p_o.trace.empty();
    const auto place = read_placement(p_place, g.node_count(), p_o.seed);
    status = run_pipeline("msbc", p_o, g,
                          pipelines::multi_source_broadcast(g, place, node_arg(g, p_leader, "leader"), p_o.seed, p_opts));
  });

  // exp
  auto* exp = app.add_subcommand("exp", "experiments");
  exp->require_subcommand(1);
  std::string exp_spec, exp_out;
  auto* exp_run = exp->add_subcommand("run", "run an experiment spec (JSON)");
  exp_run->add_option("spec", exp_spec)->required();
  exp_run->add_option("--out", exp_out, "override the spec's output path");
  exp_run->callback([&] {
    auto spec = harness::ExperimentSpec::load(exp_spec);
    if (!exp_out.empty()) spec.output = exp_out;
    const auto rows = harness::run_experiment(spec);
    if (spec.output.empty()) harness::write_metrics_csv(std::cout, rows);
    std::size_t ok = 0;
    for (const auto& r : rows) ok += r.success ? 1 : 0;
    std::cerr << "exp: " << ok << " of " << rows.size() << " runs succeeded\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  } catch (const ConstructionError& e) {
    std::cerr << "construction failed: " << e.what() << '\n';
    return kConstructionFailed;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 4;
  }
  return status;
}
