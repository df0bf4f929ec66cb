#pragma once

#include <algorithm>
#include <istream>
#include <string>
#include <vector>

#include <json.hpp>

#include "radionet/graph.hpp"
#include "radionet/sim.hpp"

namespace radionet {

inline RoundTrace read_trace_jsonl(std::istream& in) {
  RoundTrace trace;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    RoundRecord rec;
    rec.round = j.at("round").get<std::uint64_t>();
    for (const auto& t : j.at("transmitters")) rec.transmitters.emplace_back(t.at(0).get<NodeId>(), t.at(1).get<std::uint32_t>());
    for (const auto& r : j.at("receptions")) rec.receptions.emplace_back(r.at(0).get<NodeId>(), r.at(1).get<NodeId>());
    for (const auto& c : j.at("collisions")) rec.collisions.push_back(c.get<NodeId>());
    trace.rounds.push_back(std::move(rec));
  }
  return trace;
}

// Replays one round record against the reception rule and returns a
// description of every violation (empty when the record is sound).
inline std::vector<std::string> audit_record(const RadioGraph& g, const RoundRecord& rec) {
  std::vector<std::string> problems;
  const std::size_t n = g.node_count();
  std::vector<char> transmitting(n, 0);
  for (auto [u, bits] : rec.transmitters) transmitting.at(u) = 1;
  std::vector<int> count(n, 0);
  std::vector<NodeId> sole(n, 0);
  for (auto [u, bits] : rec.transmitters) {
    for (NodeId v : g.neighbors(u)) {
      ++count[v];
      sole[v] = u;
    }
  }
  std::vector<char> received(n, 0), collided(n, 0);
  for (auto [v, from] : rec.receptions) {
    received.at(v) = 1;
    if (transmitting[v]) problems.push_back("transmitter " + std::to_string(v) + " received");
    if (count[v] != 1) problems.push_back("node " + std::to_string(v) + " received with " + std::to_string(count[v]) + " transmitting neighbors");
    else if (sole[v] != from) problems.push_back("node " + std::to_string(v) + " credited wrong sender");
  }
  for (NodeId v : rec.collisions) {
    collided.at(v) = 1;
    if (received[v]) problems.push_back("collided node " + std::to_string(v) + " received");
    if (transmitting[v]) problems.push_back("transmitter " + std::to_string(v) + " marked collided");
    if (count[v] < 2) problems.push_back("node " + std::to_string(v) + " marked collided with " + std::to_string(count[v]) + " transmitters");
  }
  for (NodeId v = 0; v < n; ++v) {
    if (transmitting[v]) continue;
    if (count[v] == 1 && !received[v]) problems.push_back("listener " + std::to_string(v) + " missed a lone transmission");
    if (count[v] >= 2 && !collided[v]) problems.push_back("listener " + std::to_string(v) + " collision not recorded");
  }
  return problems;
}

}  // namespace radionet
