#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace radionet {

using NodeId = std::uint32_t;

// Malformed or out-of-contract input (unknown node ids, disconnected graphs,
// bad file contents, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A randomized construction did not reach every node it was supposed to.
class ConstructionError : public std::runtime_error {
 public:
  ConstructionError(const std::string& what, std::vector<NodeId> nodes)
      : std::runtime_error(what + describe(nodes)), nodes_(std::move(nodes)) {}

  const std::vector<NodeId>& nodes() const noexcept { return nodes_; }

 private:
  static std::string describe(const std::vector<NodeId>& nodes) {
    std::string s = " (nodes:";
    std::size_t shown = 0;
    for (NodeId v : nodes) {
      if (shown++ == 16) {
        s += " ...";
        break;
      }
      s += ' ' + std::to_string(v);
    }
    return s + ")";
  }

  std::vector<NodeId> nodes_;
};

// A per-node protocol machine threw while being stepped.
class ProtocolFault : public std::runtime_error {
 public:
  ProtocolFault(NodeId node, std::uint64_t round, const std::string& what)
      : std::runtime_error("node " + std::to_string(node) + " faulted in round " +
                           std::to_string(round) + ": " + what),
        node_(node),
        round_(round) {}

  NodeId node() const noexcept { return node_; }
  std::uint64_t round() const noexcept { return round_; }

 private:
  NodeId node_;
  std::uint64_t round_;
};

// A standard packet exceeded the configured header budget.
class HeaderBudgetError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Internal consistency violated (e.g. an inconsistent GF(2) system). Signals a
// simulator bug rather than bad luck.
class IntegrityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace radionet
