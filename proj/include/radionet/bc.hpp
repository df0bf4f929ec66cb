#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "radionet/errors.hpp"
#include "radionet/graph.hpp"

namespace radionet::bc {

// Parameters of the transmit-exponent sequence: log_n = ceil(log2 n) and
// log_nD = max(1, ceil(log2(n / D))).
struct BcParams {
  std::int64_t log_n = 1;
  std::int64_t log_nD = 1;

  static BcParams from(std::uint64_t n, std::uint64_t d) {
    if (n == 0) throw InputError("BcParams needs n >= 1");
    d = std::max<std::uint64_t>(d, 1);
    BcParams p;
    p.log_n = clog2(n);
    p.log_nD = std::min(clog2(static_cast<double>(n) / static_cast<double>(d)), p.log_n);
    return p;
  }

  void check() const {
    if (log_n < 1 || log_nD < 1) throw InputError("BcParams logs must be positive");
    if (log_nD > log_n) throw InputError("BcParams requires log_nD <= log_n");
  }

  // floor(log2(log_n)): the largest offset k whose ruler value recurs.
  std::int64_t ruler_span() const noexcept {
    return static_cast<std::int64_t>(std::bit_width(static_cast<std::uint64_t>(log_n))) - 1;
  }

  friend bool operator==(const BcParams&, const BcParams&) = default;
};

// Exponent at position index:
//   3j   -> log_nD + k, k = trailing zeros of ((j-1) mod log_n) + 1
//   3j+1 -> j mod log_nD
//   3j+2 -> j mod log_n
constexpr std::int64_t bc_value(std::uint64_t index, const BcParams& p) noexcept {
  const std::uint64_t j = index / 3;
  const auto log_n = static_cast<std::uint64_t>(p.log_n);
  switch (index % 3) {
    case 0: {
      const std::uint64_t jp = (j + log_n - 1) % log_n + 1;
      return p.log_nD + std::countr_zero(jp);
    }
    case 1:
      return static_cast<std::int64_t>(j % static_cast<std::uint64_t>(p.log_nD));
    default:
      return static_cast<std::int64_t>(j % log_n);
  }
}

// Window lengths checked by check_density. Defaults follow the explicit
// sequence: P1 3*log_nD, P3 3*log_n, P2 3*log_n*2^t for value log_nD + t.
struct DensityWindows {
  std::optional<std::size_t> p1_length;
  std::optional<std::size_t> p2_base;
  std::optional<std::size_t> p3_length;
};

struct DensityReport {
  bool property1_ok = true;
  bool property2_ok = true;
  bool property3_ok = true;
  std::optional<std::uint64_t> property1_witness;  // failing window start
  std::optional<std::uint64_t> property2_witness;
  std::optional<std::int64_t> property2_value;     // value missing at the witness
  std::optional<std::uint64_t> property3_witness;
  std::map<std::string, std::size_t> window_lengths;

  bool all_ok() const noexcept { return property1_ok && property2_ok && property3_ok; }
};

namespace detail {

// First start s < window_count where [s, s+len) lacks some required value.
inline std::optional<std::uint64_t> first_missing_window(const std::vector<std::int64_t>& seq, std::size_t len,
                                                         const std::vector<std::int64_t>& required,
                                                         std::size_t window_count) {
  if (len == 0) return 0;
  std::int64_t max_value = 0;
  for (auto v : seq) max_value = std::max(max_value, v);
  std::vector<std::int64_t> count(static_cast<std::size_t>(max_value) + 1, 0);
  std::vector<char> needed(count.size(), 0);
  std::int64_t missing = 0;
  for (auto v : required) {
    if (v < 0 || static_cast<std::size_t>(v) >= needed.size()) return 0;  // never present
    if (!needed[v]) ++missing;
    needed[v] = 1;
  }
  auto add = [&](std::int64_t v) {
    if (needed[v] && count[v]++ == 0) --missing;
  };
  auto drop = [&](std::int64_t v) {
    if (needed[v] && --count[v] == 0) ++missing;
  };
  for (std::size_t i = 0; i < len; ++i) add(seq[i]);
  for (std::size_t s = 0; s < window_count; ++s) {
    if (missing > 0) return s;
    drop(seq[s]);
    add(seq[s + len]);
  }
  return std::nullopt;
}

inline std::vector<std::int64_t> iota_values(std::int64_t lo, std::int64_t hi_exclusive) {
  std::vector<std::int64_t> v;
  for (auto x = lo; x < hi_exclusive; ++x) v.push_back(x);
  return v;
}

}  // namespace detail

// Checks the three density properties over window_count consecutive
// sliding windows (starts 0 .. window_count-1).
inline DensityReport check_density(const BcParams& p, std::size_t window_count, const DensityWindows& w = {}) {
  p.check();
  if (window_count < 1) throw InputError("window_count must be >= 1");
  DensityReport report;
  const std::size_t p1 = w.p1_length.value_or(3 * static_cast<std::size_t>(p.log_nD));
  const std::size_t p3 = w.p3_length.value_or(3 * static_cast<std::size_t>(p.log_n));
  const std::size_t p2_base = w.p2_base.value_or(3 * static_cast<std::size_t>(p.log_n));
  const std::int64_t span = p.ruler_span();
  const std::size_t longest = std::max({p1, p3, p2_base << span});

  std::vector<std::int64_t> seq(window_count + longest + 1);
  for (std::size_t i = 0; i < seq.size(); ++i) seq[i] = bc_value(i, p);

  report.window_lengths["P1"] = p1;
  report.window_lengths["P3"] = p3;
  if (auto s = detail::first_missing_window(seq, p1, detail::iota_values(0, p.log_nD), window_count)) {
    report.property1_ok = false;
    report.property1_witness = *s;
  }
  for (std::int64_t t = 0; t <= span; ++t) {
    const std::size_t len = p2_base << t;
    report.window_lengths["P2[" + std::to_string(p.log_nD + t) + "]"] = len;
    if (!report.property2_ok) continue;
    if (auto s = detail::first_missing_window(seq, len, {p.log_nD + t}, window_count)) {
      report.property2_ok = false;
      report.property2_witness = *s;
      report.property2_value = p.log_nD + t;
    }
  }
  if (auto s = detail::first_missing_window(seq, p3, detail::iota_values(0, p.log_n), window_count)) {
    report.property3_ok = false;
    report.property3_witness = *s;
  }
  return report;
}

}  // namespace radionet::bc
