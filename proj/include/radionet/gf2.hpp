#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "radionet/errors.hpp"

namespace radionet::gf2 {

// Fixed-length bit vector over GF(2).
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

  static BitVector unit(std::size_t bits, std::size_t i) {
    BitVector v(bits);
    v.set(i);
    return v;
  }

  // Low `bits` bits of value (bits <= 64).
  static BitVector from_word(std::uint64_t value, std::size_t bits = 64) {
    BitVector v(bits);
    if (bits > 0) v.words_[0] = bits >= 64 ? value : value & ((std::uint64_t{1} << bits) - 1);
    return v;
  }

  std::size_t size() const noexcept { return bits_; }
  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  bool get(std::size_t i) const { return (words_.at(i / 64) >> (i % 64)) & 1U; }
  void set(std::size_t i, bool on = true) {
    auto& w = words_.at(i / 64);
    const auto m = std::uint64_t{1} << (i % 64);
    w = on ? (w | m) : (w & ~m);
  }

  BitVector& operator^=(const BitVector& o) {
    if (o.bits_ != bits_) throw InputError("GF(2) vectors of different lengths");
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
    return *this;
  }
  friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }

  // Inner product over GF(2).
  bool dot(const BitVector& o) const {
    if (o.bits_ != bits_) throw InputError("GF(2) vectors of different lengths");
    unsigned parity = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) parity ^= std::popcount(words_[i] & o.words_[i]) & 1U;
    return parity != 0;
  }

  bool zero() const noexcept {
    for (auto w : words_) {
      if (w) return false;
    }
    return true;
  }

  // Index of the lowest set bit, or size() when zero.
  std::size_t lowest() const noexcept {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (words_[i]) return i * 64 + static_cast<std::size_t>(std::countr_zero(words_[i]));
    }
    return bits_;
  }

  std::uint64_t word(std::size_t i = 0) const { return words_.at(i); }

  std::string to_string() const {
    std::string s(bits_, '0');
    for (std::size_t i = 0; i < bits_; ++i) s[i] = get(i) ? '1' : '0';
    return s;
  }

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  std::size_t bits_ = 0;
  std::vector<std::uint64_t> words_;
};

struct CodedPacket {
  BitVector coeffs;   // length k
  BitVector payload;  // message length

  friend bool operator==(const CodedPacket&, const CodedPacket&) = default;
};

// Componentwise XOR of the packets selected by mask; empty selection gives the
// zero packet of the shape of packets[0].
inline CodedPacket xor_combine(const std::vector<CodedPacket>& packets, const std::vector<bool>& mask) {
  if (mask.size() != packets.size()) throw InputError("subset mask length must equal the packet count");
  if (packets.empty()) return {};
  CodedPacket out{BitVector(packets[0].coeffs.size()), BitVector(packets[0].payload.size())};
  for (std::size_t i = 0; i < packets.size(); ++i) {
    if (!mask[i]) continue;
    out.coeffs ^= packets[i].coeffs;
    out.payload ^= packets[i].payload;
  }
  return out;
}

inline std::size_t gf2_rank(std::vector<BitVector> rows) {
  std::size_t rank = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto p = rows[i].lowest();
    if (p == rows[i].size()) continue;
    ++rank;
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      if (rows[j].size() != rows[i].size()) throw InputError("gf2_rank needs equal lengths");
      if (rows[j].get(p)) rows[j] ^= rows[i];
    }
  }
  return rank;
}

// Packets kept in echelon form: each stored row has a distinct pivot and is
// zero at the pivots of all earlier rows. Only innovative packets are kept;
// their span equals the span of everything received.
class PacketStore {
 public:
  PacketStore() = default;
  PacketStore(std::size_t k, std::size_t payload_bits) : k_(k), payload_bits_(payload_bits) {}

  // Source store holding (e_i, m_i).
  static PacketStore source(const std::vector<BitVector>& messages) {
    if (messages.empty()) throw InputError("need at least one message");
    PacketStore s(messages.size(), messages[0].size());
    for (std::size_t i = 0; i < messages.size(); ++i) {
      s.add(CodedPacket{BitVector::unit(messages.size(), i), messages[i]});
    }
    s.received_ = 0;
    return s;
  }

  // Returns true when the packet raised the rank.
  bool add(CodedPacket p) {
    if (p.coeffs.size() != k_ || p.payload.size() != payload_bits_) throw InputError("packet shape does not match store");
    ++received_;
    for (const auto& row : rows_) {
      if (p.coeffs.get(row.pivot)) {
        p.coeffs ^= row.packet.coeffs;
        p.payload ^= row.packet.payload;
      }
    }
    const auto pivot = p.coeffs.lowest();
    if (pivot == k_) {
      if (!p.payload.zero()) inconsistent_ = true;
      return false;
    }
    rows_.push_back(Row{pivot, std::move(p)});
    return true;
  }

  std::size_t rank() const noexcept { return rows_.size(); }
  std::size_t k() const noexcept { return k_; }
  std::size_t payload_bits() const noexcept { return payload_bits_; }
  std::size_t received() const noexcept { return received_; }
  bool empty() const noexcept { return rows_.empty(); }
  bool inconsistent() const noexcept { return inconsistent_; }

  std::vector<CodedPacket> packets() const {
    std::vector<CodedPacket> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r.packet);
    return out;
  }

  // XOR of the stored rows whose coin came up heads.
  template <class Coin>
  CodedPacket random_combination(Coin&& coin) const {
    CodedPacket out{BitVector(k_), BitVector(payload_bits_)};
    for (const auto& r : rows_) {
      if (coin()) {
        out.coeffs ^= r.packet.coeffs;
        out.payload ^= r.packet.payload;
      }
    }
    return out;
  }

  bool knows_projection(const BitVector& mu) const {
    if (mu.size() != k_) throw InputError("projection vector must have length k");
    for (const auto& r : rows_) {
      if (r.packet.coeffs.dot(mu)) return true;
    }
    return false;
  }

 private:
  struct Row {
    std::size_t pivot;
    CodedPacket packet;
  };

  std::size_t k_ = 0;
  std::size_t payload_bits_ = 0;
  std::size_t received_ = 0;
  bool inconsistent_ = false;
  std::vector<Row> rows_;
};

inline bool knows_projection(const PacketStore& store, const BitVector& mu) { return store.knows_projection(mu); }

// The k original messages when the store has full rank.
inline std::optional<std::vector<BitVector>> decode(const PacketStore& store, std::size_t k) {
  if (store.inconsistent()) throw IntegrityError("inconsistent GF(2) system: zero coefficients with nonzero payload");
  if (k != store.k()) throw InputError("decode k does not match the store");
  if (store.rank() < k) return std::nullopt;
  auto rows = store.packets();
  // Back-substitution: clear every pivot column from all other rows.
  std::vector<std::size_t> pivot(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) pivot[i] = rows[i].coeffs.lowest();
  for (std::size_t i = rows.size(); i-- > 0;) {
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (j != i && rows[j].coeffs.get(pivot[i])) {
        rows[j].coeffs ^= rows[i].coeffs;
        rows[j].payload ^= rows[i].payload;
      }
    }
  }
  std::vector<BitVector> out(k);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].coeffs != BitVector::unit(k, pivot[i])) throw IntegrityError("elimination did not reach unit rows");
    out[pivot[i]] = rows[i].payload;
  }
  return out;
}

}  // namespace radionet::gf2
