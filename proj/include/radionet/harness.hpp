#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "radionet/coded_broadcast.hpp"
#include "radionet/cr_broadcast.hpp"
#include "radionet/gathering.hpp"
#include "radionet/generators.hpp"
#include "radionet/layering_build.hpp"
#include "radionet/pipelines.hpp"

namespace radionet::harness {

enum class Protocol { Crbc, Layer, Gather, Ncbc, Gossip, Msbc };

inline constexpr Protocol kAllProtocols[] = {Protocol::Crbc,  Protocol::Layer,  Protocol::Gather,
                                             Protocol::Ncbc,  Protocol::Gossip, Protocol::Msbc};

inline const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::Crbc: return "crbc";
    case Protocol::Layer: return "layer";
    case Protocol::Gather: return "gather";
    case Protocol::Ncbc: return "ncbc";
    case Protocol::Gossip: return "gossip";
    case Protocol::Msbc: return "msbc";
  }
  return "?";
}

inline Protocol parse_protocol(const std::string& s) {
  for (auto p : kAllProtocols) {
    if (s == to_string(p)) return p;
  }
  throw InputError("unknown protocol '" + s + "'");
}

// Constants each protocol understands.
inline std::set<std::string> known_constants(Protocol p) {
  const std::set<std::string> build{"source", "c1", "c2", "alpha_lra", "c_delta", "c_width", "inv_eps"};
  auto with = [&](std::initializer_list<const char*> extra) {
    auto s = build;
    for (const char* e : extra) s.insert(e);
    return s;
  };
  switch (p) {
    case Protocol::Crbc: return {"source", "c1", "c2", "delta"};
    case Protocol::Layer: return with({"a", "b"});
    case Protocol::Gather: return with({"k", "c_g", "wave_cap"});
    case Protocol::Ncbc: return with({"k", "c_nc"});
    case Protocol::Gossip: return with({"c_g", "wave_cap", "c_nc"});
    case Protocol::Msbc: return with({"k", "c_g", "wave_cap", "c_nc"});
  }
  return {};
}

struct ExperimentSpec {
  Protocol protocol = Protocol::Crbc;
  std::vector<GraphSpec> sweep;
  std::vector<Seed> seeds;
  std::map<std::string, std::int64_t> constants;
  std::string output;  // CSV path; empty means no file

  std::int64_t constant(const std::string& name, std::int64_t fallback) const {
    auto it = constants.find(name);
    return it == constants.end() ? fallback : it->second;
  }

  void validate() const {
    const auto known = known_constants(protocol);
    for (const auto& [name, value] : constants) {
      if (!known.count(name)) {
        throw InputError("constant '" + name + "' is not used by protocol " + to_string(protocol));
      }
      if (name != "source" && value < 1) throw InputError("constant '" + name + "' must be positive");
      if (name == "source" && value < 0) throw InputError("constant 'source' must be a node id");
    }
  }

  // {"protocol": "gossip", "sweep": ["ring_of_cliques:64", ...],
  //  "seeds": [1, 2] or {"first": 0, "count": 20},
  //  "constants": {"c_g": 4}, "output": "rows.csv"}
  static ExperimentSpec from_json(const nlohmann::json& j) {
    ExperimentSpec s;
    try {
      s.protocol = parse_protocol(j.at("protocol").get<std::string>());
      for (const auto& g : j.value("sweep", nlohmann::json::array())) s.sweep.push_back(GraphSpec::parse(g.get<std::string>()));
      const auto& seeds = j.at("seeds");
      if (seeds.is_object()) {
        const auto first = seeds.value("first", std::uint64_t{0});
        const auto count = seeds.at("count").get<std::uint64_t>();
        for (std::uint64_t i = 0; i < count; ++i) s.seeds.push_back(first + i);
      } else {
        s.seeds = seeds.get<std::vector<Seed>>();
      }
      const auto constants = j.value("constants", nlohmann::json::object());
      for (auto it = constants.begin(); it != constants.end(); ++it) {
        if (!it.value().is_number_integer()) throw InputError("constant '" + it.key() + "' must be an integer");
        s.constants[it.key()] = it.value().get<std::int64_t>();
      }
      s.output = j.value("output", std::string{});
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("bad experiment spec: ") + e.what());
    }
    s.validate();
    return s;
  }

  static ExperimentSpec load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open experiment spec " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw InputError("experiment spec " + path + " is not valid JSON: " + e.what());
    }
    return from_json(j);
  }
};

struct MetricsRow {
  std::string protocol;
  std::size_t n = 0;
  std::int64_t D = 0;
  std::size_t k = 0;
  std::int64_t C = 0;
  Seed seed = 0;
  std::uint64_t rounds = 0;
  bool success = false;
  std::string notes;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

inline constexpr const char* kMetricsHeader = "protocol,n,D,k,C,seed,rounds,success,notes";

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

// Splits one CSV record, reading further lines when a quoted field spans them.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string line;
  if (!std::getline(in, line)) return false;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0;; ++i) {
    if (i == line.size()) {
      if (!quoted) break;
      if (!std::getline(in, line)) throw InputError("unterminated quoted CSV field");
      cur += '\n';
      i = static_cast<std::size_t>(-1);
      continue;
    }
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return true;
}

template <class T>
T parse_number(const std::string& s, const char* what) {
  std::istringstream in(s);
  T v{};
  if (!(in >> v) || !in.eof()) throw InputError(std::string("bad ") + what + " field '" + s + "'");
  return v;
}

}  // namespace detail

inline void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) {
    out << detail::csv_field(r.protocol) << ',' << r.n << ',' << r.D << ',' << r.k << ',' << r.C << ',' << r.seed << ','
        << r.rounds << ',' << (r.success ? 1 : 0) << ',' << detail::csv_field(r.notes) << '\n';
  }
}

inline std::vector<MetricsRow> read_metrics_csv(std::istream& in) {
  std::vector<std::string> f;
  if (!detail::read_csv_record(in, f)) throw InputError("metrics CSV is empty");
  std::string header;
  for (std::size_t i = 0; i < f.size(); ++i) header += (i ? "," : "") + f[i];
  if (header != kMetricsHeader) throw InputError("unexpected metrics header '" + header + "'");
  std::vector<MetricsRow> rows;
  while (detail::read_csv_record(in, f)) {
    if (f.size() != 9) throw InputError("metrics row needs 9 fields, got " + std::to_string(f.size()));
    MetricsRow r;
    r.protocol = f[0];
    r.n = detail::parse_number<std::size_t>(f[1], "n");
    r.D = detail::parse_number<std::int64_t>(f[2], "D");
    r.k = detail::parse_number<std::size_t>(f[3], "k");
    r.C = detail::parse_number<std::int64_t>(f[4], "C");
    r.seed = detail::parse_number<Seed>(f[5], "seed");
    r.rounds = detail::parse_number<std::uint64_t>(f[6], "rounds");
    if (f[7] != "0" && f[7] != "1") throw InputError("bad success field '" + f[7] + "'");
    r.success = f[7] == "1";
    r.notes = f[8];
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void save_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write metrics file " + path);
  write_metrics_csv(out, rows);
  if (!out) throw IoError("write to metrics file " + path + " failed");
}

inline std::vector<MetricsRow> load_metrics_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open metrics file " + path);
  return read_metrics_csv(in);
}

inline layering::BuildOptions build_options(const ExperimentSpec& s) {
  layering::BuildOptions o;
  o.c1 = s.constant("c1", o.c1);
  o.c2 = s.constant("c2", o.c2);
  o.alpha_lra = s.constant("alpha_lra", o.alpha_lra);
  o.c_delta = s.constant("c_delta", o.c_delta);
  o.c_width = s.constant("c_width", o.c_width);
  o.warn = nullptr;
  return o;
}

inline double eps_of(const ExperimentSpec& s) { return 1.0 / static_cast<double>(s.constant("inv_eps", 2)); }

inline pipelines::PipelineOptions pipeline_options(const ExperimentSpec& s) {
  pipelines::PipelineOptions o;
  o.eps = eps_of(s);
  o.build = build_options(s);
  o.c_g = s.constant("c_g", o.c_g);
  if (s.constants.count("wave_cap")) o.wave_cap = s.constants.at("wave_cap");
  o.c_nc = s.constant("c_nc", o.c_nc);
  return o;
}

// One (sweep point, seed) run. Protocol failures become unsuccessful rows.
inline MetricsRow run_point(const ExperimentSpec& spec, const GraphSpec& gs, Seed seed) {
  const auto g = generate_graph(gs, seed);
  const auto n = g.node_count();
  MetricsRow row;
  row.protocol = to_string(spec.protocol);
  row.n = n;
  row.D = g.diameter();
  row.seed = seed;
  row.notes = "graph=" + gs.to_string();
  const auto src = spec.constant("source", 0);
  if (static_cast<std::size_t>(src) >= n) throw InputError("source " + std::to_string(src) + " is not a node of " + gs.to_string());
  const auto source = static_cast<NodeId>(src);
  auto note = [&](const std::string& s) { row.notes += "; " + s; };

  auto layering_for = [&](std::int64_t& colors) {
    auto lay = layering::build_pseudo_bfs(g, source, eps_of(spec), derive_seed(seed, "layering"), build_options(spec));
    colors = lay.color_count;
    if (!layering::validate(g, lay).collision_free.value_or(false)) note("layering not collision-free");
    return lay;
  };

  try {
    switch (spec.protocol) {
      case Protocol::Crbc: {
        const auto p = bc::BcParams::from(n, static_cast<std::uint64_t>(std::max<std::int64_t>(row.D, 1)));
        const auto delta = spec.constant("delta", std::max<std::int64_t>(p.log_nD, 1));
        const auto phases = cr::cr_phase_count(row.D, static_cast<std::int64_t>(n), delta, spec.constant("c1", 8),
                                               spec.constant("c2", 8));
        auto cfg = cr::single_source_config(g, source, delta, phases);
        std::vector<std::optional<std::uint64_t>> msgs(n);
        msgs[source] = 1;
        cr::CrOptions<std::uint64_t> opts;
        opts.stop_when_reached = true;
        auto res = cr::cr_broadcast(g, cfg, msgs, seed, opts);
        row.k = 1;
        row.rounds = res.completion_round();
        row.success = std::all_of(res.message.begin(), res.message.end(), [](const auto& m) { return m.has_value(); });
        note("delta=" + std::to_string(delta) + " scheduled=" + std::to_string(res.scheduled_rounds));
        break;
      }
      case Protocol::Layer: {
        layering::BuildStats stats;
        auto lay = layering::build_pseudo_bfs(g, source, eps_of(spec), derive_seed(seed, "layering"), build_options(spec),
                                              &stats);
        row.C = lay.color_count;
        row.rounds = stats.total_rounds();
        const auto rep = layering::validate(g, lay);
        const auto a = spec.constant("a", 16), b = spec.constant("b", 16);
        const auto bound = a * row.D + b * clog2(static_cast<std::uint64_t>(n));
        row.success = rep.valid && rep.collision_free.value_or(false) && lay.depth() <= bound;
        note("depth=" + std::to_string(lay.depth()) + " bound=" + std::to_string(bound));
        if (!rep.valid) note("invalid layering");
        break;
      }
      case Protocol::Gather: {
        gathering::GatherConfig cfg;
        cfg.layering = layering_for(row.C);
        cfg.check_layering = false;
        cfg.c_g = spec.constant("c_g", cfg.c_g);
        if (spec.constants.count("wave_cap")) cfg.wave_cap = spec.constants.at("wave_cap");
        row.k = static_cast<std::size_t>(spec.constant("k", 1));
        auto res = gathering::gather(g, cfg, gathering::random_placement(n, row.k, derive_seed(seed, "placement")),
                                     derive_seed(seed, "gather"));
        row.rounds = res.completion_round();
        row.success = res.success() && res.conservation_violations == 0;
        note("epoch_bound=" + std::to_string(res.epoch_bound));
        if (!res.success()) note(std::to_string(res.delivered.size()) + " of " + std::to_string(res.k) + " delivered");
        if (res.conservation_violations) note(res.first_violation);
        break;
      }
      case Protocol::Ncbc: {
        nc::NcConfig cfg;
        cfg.layering = layering_for(row.C);
        cfg.check_layering = false;
        cfg.c_nc = spec.constant("c_nc", cfg.c_nc);
        row.k = static_cast<std::size_t>(spec.constant("k", 1));
        auto res = nc::nc_broadcast(g, cfg, nc::random_messages(row.k, 64, derive_seed(seed, "messages")),
                                    derive_seed(seed, "broadcast"));
        row.rounds = res.completion_round();
        row.success = std::all_of(res.decoded_correctly.begin(), res.decoded_correctly.end(), [](bool b) { return b; });
        note("scheduled=" + std::to_string(res.scheduled_rounds));
        if (!row.success) note(std::to_string(res.undecoded().size()) + " undecoded");
        break;
      }
      case Protocol::Gossip:
      case Protocol::Msbc: {
        const auto opts = pipeline_options(spec);
        auto res = spec.protocol == Protocol::Gossip
                       ? pipelines::gossip(g, source, seed, opts)
                       : pipelines::multi_source_broadcast(
                             g, gathering::random_placement(n, static_cast<std::size_t>(spec.constant("k", 1)),
                                                            derive_seed(seed, "placement")),
                             source, seed, opts);
        row.k = res.k;
        row.C = res.colors;
        row.rounds = res.total_rounds;
        row.success = res.success;
        std::string stages;
        for (const auto& st : res.stages) stages += (stages.empty() ? "" : " ") + st.name + "=" + std::to_string(st.rounds);
        note(stages);
        if (res.failure_stage) note(*res.failure_stage + " failed: " + res.failure_detail.value_or(""));
        break;
      }
    }
  } catch (const ConstructionError& e) {
    row.success = false;
    note(std::string("construction failed: ") + e.what());
  }
  return row;
}

// Every (sweep point, seed) pair in order; rows go to spec.output when set.
inline std::vector<MetricsRow> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<MetricsRow> rows;
  for (const auto& gs : spec.sweep) {
    for (auto seed : spec.seeds) rows.push_back(run_point(spec, gs, seed));
  }
  if (!spec.output.empty()) save_metrics_csv(spec.output, rows);
  return rows;
}

// Arithmetic over n, D, k, C with + - * / ^, parentheses, numbers and the
// functions log (base 2), ln, sqrt, max, min.
class Expression {
 public:
  static Expression parse(const std::string& text) {
    Expression e;
    Parser p{text, 0};
    e.root_ = p.sum();
    p.skip();
    if (p.pos != text.size()) throw InputError("unexpected '" + text.substr(p.pos) + "' in model expression");
    e.text_ = text;
    return e;
  }

  double eval(const MetricsRow& r) const {
    return eval(*root_, {static_cast<double>(r.n), static_cast<double>(r.D), static_cast<double>(r.k),
                         static_cast<double>(r.C)});
  }

  const std::string& text() const noexcept { return text_; }

 private:
  struct Node {
    char op;  // '#': number, 'v': variable, 'f': function, otherwise binary or unary '~'
    double value = 0;
    std::string name;
    std::vector<std::shared_ptr<Node>> kids;
  };
  using Ptr = std::shared_ptr<Node>;
  struct Vars {
    double n, D, k, C;
  };

  struct Parser {
    const std::string& s;
    std::size_t pos;

    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    Ptr bin(char op, Ptr a, Ptr b) { return std::make_shared<Node>(Node{op, 0, {}, {std::move(a), std::move(b)}}); }
    Ptr sum() {
      auto a = product();
      for (;;) {
        if (eat('+')) a = bin('+', a, product());
        else if (eat('-')) a = bin('-', a, product());
        else return a;
      }
    }
    Ptr product() {
      auto a = unary();
      for (;;) {
        if (eat('*')) a = bin('*', a, unary());
        else if (eat('/')) a = bin('/', a, unary());
        else return a;
      }
    }
    Ptr unary() {
      if (eat('-')) return std::make_shared<Node>(Node{'~', 0, {}, {unary()}});
      return power();
    }
    Ptr power() {
      auto a = atom();
      if (eat('^')) return bin('^', a, unary());
      return a;
    }
    Ptr atom() {
      skip();
      if (pos >= s.size()) throw InputError("model expression ends early");
      if (eat('(')) {
        auto a = sum();
        if (!eat(')')) throw InputError("missing ')' in model expression");
        return a;
      }
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t used = 0;
        const double v = std::stod(s.substr(pos), &used);
        pos += used;
        return std::make_shared<Node>(Node{'#', v, {}, {}});
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        std::string name;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) name += s[pos++];
        if (eat('(')) {
          Node f{'f', 0, name, {sum()}};
          while (eat(',')) f.kids.push_back(sum());
          if (!eat(')')) throw InputError("missing ')' after arguments of " + name);
          std::size_t want = 0;
          if (name == "log" || name == "ln" || name == "sqrt") {
            want = 1;
          } else if (name == "max" || name == "min") {
            want = 2;
          } else {
            throw InputError("unknown function '" + name + "' in model expression");
          }
          if (f.kids.size() != want) throw InputError(name + " takes " + std::to_string(want) + " argument(s)");
          return std::make_shared<Node>(std::move(f));
        }
        if (name != "n" && name != "D" && name != "k" && name != "C") {
          throw InputError("unknown variable '" + name + "' in model expression");
        }
        return std::make_shared<Node>(Node{'v', 0, name, {}});
      }
      throw InputError(std::string("unexpected '") + c + "' in model expression");
    }
  };

  static double eval(const Node& e, const Vars& v) {
    switch (e.op) {
      case '#': return e.value;
      case 'v': return e.name == "n" ? v.n : e.name == "D" ? v.D : e.name == "k" ? v.k : v.C;
      case '~': return -eval(*e.kids[0], v);
      case 'f': {
        const double x = eval(*e.kids[0], v);
        if (e.name == "log") return std::log2(x);
        if (e.name == "ln") return std::log(x);
        if (e.name == "sqrt") return std::sqrt(x);
        const double y = eval(*e.kids[1], v);
        return e.name == "max" ? std::max(x, y) : std::min(x, y);
      }
      default: break;
    }
    const double a = eval(*e.kids[0], v), b = eval(*e.kids[1], v);
    switch (e.op) {
      case '+': return a + b;
      case '-': return a - b;
      case '*': return a * b;
      case '/': return a / b;
      default: return std::pow(a, b);
    }
  }

  Ptr root_;
  std::string text_;
};

struct FitResult {
  double c = 0;          // least-squares constant in rounds ~ c * model
  double max_ratio = 0;  // max over rows of rounds / (c * model)
  std::size_t rows = 0;
  std::size_t points = 0;  // distinct (n, D, k, C)
};

inline FitResult fit_scaling(const std::vector<MetricsRow>& rows, const std::string& model) {
  const auto expr = Expression::parse(model);
  std::set<std::tuple<std::size_t, std::int64_t, std::size_t, std::int64_t>> points;
  double mr = 0, mm = 0;
  std::vector<double> m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    m[i] = expr.eval(rows[i]);
    if (!std::isfinite(m[i]) || m[i] < 0) throw InputError("model '" + model + "' is negative or undefined on a row");
    points.insert({rows[i].n, rows[i].D, rows[i].k, rows[i].C});
    mr += m[i] * static_cast<double>(rows[i].rounds);
    mm += m[i] * m[i];
  }
  if (points.size() < 2) throw InputError("fit_scaling needs at least 2 distinct sweep points");
  if (mm == 0) throw InputError("model '" + model + "' is zero on every row");
  FitResult out;
  out.c = mr / mm;
  out.rows = rows.size();
  out.points = points.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double predicted = out.c * m[i];
    const double r = static_cast<double>(rows[i].rounds);
    if (predicted > 0) {
      out.max_ratio = std::max(out.max_ratio, r / predicted);
    } else if (r > 0) {
      out.max_ratio = INFINITY;
    }
  }
  return out;
}

}  // namespace radionet::harness
