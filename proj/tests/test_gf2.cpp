#include <gtest/gtest.h>

#include <set>

#include "radionet/gf2.hpp"
#include "radionet/rng.hpp"

using namespace radionet;
using namespace radionet::gf2;

namespace {

BitVector random_vector(std::size_t bits, RngStream& rng) {
  BitVector v(bits);
  for (std::size_t i = 0; i < bits; ++i) v.set(i, rng.coin());
  return v;
}

// Rank via subset enumeration: 2^rank distinct subset-XOR values.
std::size_t rank_oracle(const std::vector<BitVector>& rows) {
  std::set<std::vector<std::uint64_t>> span;
  for (std::uint64_t mask = 0; mask < (1ULL << rows.size()); ++mask) {
    BitVector acc(rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if ((mask >> i) & 1U) acc ^= rows[i];
    }
    span.insert(acc.words());
  }
  std::size_t r = 0;
  while ((std::size_t{1} << r) < span.size()) ++r;
  return r;
}

std::vector<BitVector> random_messages(std::size_t k, std::size_t bits, Seed seed) {
  RngStream rng(seed, 0, 0);
  std::vector<BitVector> m;
  for (std::size_t i = 0; i < k; ++i) m.push_back(random_vector(bits, rng));
  return m;
}

CodedPacket combine_known(const std::vector<BitVector>& msgs, const BitVector& coeffs) {
  CodedPacket p{coeffs, BitVector(msgs[0].size())};
  for (std::size_t i = 0; i < msgs.size(); ++i) {
    if (coeffs.get(i)) p.payload ^= msgs[i];
  }
  return p;
}

}  // namespace

TEST(BitVector, Basics) {
  BitVector v(130);
  EXPECT_TRUE(v.zero());
  EXPECT_EQ(v.lowest(), 130u);
  v.set(129);
  v.set(3);
  EXPECT_EQ(v.lowest(), 3u);
  EXPECT_TRUE(v.get(129));
  v.set(3, false);
  EXPECT_EQ(v.lowest(), 129u);
  EXPECT_TRUE(v.dot(BitVector::unit(130, 129)));
  EXPECT_FALSE(v.dot(BitVector::unit(130, 128)));
  EXPECT_THROW(v ^= BitVector(5), InputError);
  EXPECT_EQ(BitVector::from_word(5, 4).to_string(), "1010");
}

TEST(XorCombine, Definitions) {
  auto m = random_messages(2, 16, 1);
  std::vector<CodedPacket> ps{{BitVector::unit(2, 0), m[0]}, {BitVector::unit(2, 1), m[1]}};
  auto both = xor_combine(ps, {true, true});
  EXPECT_EQ(both.coeffs, BitVector::unit(2, 0) ^ BitVector::unit(2, 1));
  EXPECT_EQ(both.payload, m[0] ^ m[1]);
  EXPECT_EQ(xor_combine(ps, {false, true}), ps[1]);
  std::vector<CodedPacket> twice{ps[0], ps[0]};
  auto z = xor_combine(twice, {true, true});
  EXPECT_TRUE(z.coeffs.zero() && z.payload.zero());
  auto none = xor_combine(ps, {false, false});
  EXPECT_TRUE(none.coeffs.zero() && none.payload.zero());
  EXPECT_THROW(xor_combine(ps, {true}), InputError);
}

TEST(Rank, IdentityAndDuplicates) {
  std::vector<BitVector> id;
  for (std::size_t i = 0; i < 10; ++i) id.push_back(BitVector::unit(10, i));
  EXPECT_EQ(gf2_rank(id), 10u);
  auto v = BitVector::from_word(0b1011, 10);
  EXPECT_EQ(gf2_rank({v, v}), 1u);
  EXPECT_EQ(gf2_rank({BitVector(10)}), 0u);
}

TEST(Rank, MatchesSubsetOracle) {
  for (Seed s = 0; s < 200; ++s) {
    RngStream rng(s, 0, 0);
    std::vector<BitVector> rows;
    const std::size_t count = 1 + s % 9, bits = 1 + (s / 9) % 8;
    for (std::size_t i = 0; i < count; ++i) rows.push_back(random_vector(bits, rng));
    ASSERT_EQ(gf2_rank(rows), rank_oracle(rows)) << "seed " << s;
  }
  RngStream rng(0, 0, 0);
  std::vector<BitVector> eight;
  for (int i = 0; i < 8; ++i) eight.push_back(random_vector(8, rng));
  EXPECT_EQ(gf2_rank(eight), rank_oracle(eight));
}

TEST(Store, RankIsIncrementalAndBounded) {
  auto msgs = random_messages(6, 40, 2);
  PacketStore store(6, 40);
  RngStream rng(3, 0, 0);
  std::vector<BitVector> seen;
  for (int i = 0; i < 20; ++i) {
    auto c = random_vector(6, rng);
    const auto before = store.rank();
    const bool grew = store.add(combine_known(msgs, c));
    seen.push_back(c);
    EXPECT_EQ(store.rank(), gf2_rank(seen));
    EXPECT_EQ(grew, store.rank() == before + 1);
    EXPECT_LE(store.rank(), std::min<std::size_t>(6, seen.size()));
  }
  EXPECT_EQ(store.received(), 20u);
}

TEST(Decode, SourceStoreAndRankDeficit) {
  auto msgs = random_messages(5, 70, 4);
  auto src = PacketStore::source(msgs);
  EXPECT_EQ(*decode(src, 5), msgs);
  PacketStore partial(5, 70);
  for (std::size_t i = 0; i < 4; ++i) partial.add({BitVector::unit(5, i), msgs[i]});
  EXPECT_FALSE(decode(partial, 5));
}

TEST(Decode, RecoversFromRandomCombinations) {
  for (Seed s = 0; s < 50; ++s) {
    const std::size_t k = 1 + s % 12;
    auto msgs = random_messages(k, 33, s);
    PacketStore store(k, 33);
    RngStream rng(s, 1, 0);
    while (store.rank() < k) store.add(combine_known(msgs, random_vector(k, rng)));
    auto out = decode(store, k);
    ASSERT_TRUE(out);
    EXPECT_EQ(*out, msgs) << "seed " << s;
  }
}

TEST(Decode, InconsistentSystemIsIntegrityError) {
  auto msgs = random_messages(2, 8, 5);
  PacketStore store(2, 8);
  store.add({BitVector::unit(2, 0), msgs[0]});
  store.add({BitVector::unit(2, 1), msgs[1]});
  auto bad = msgs[0];
  bad.set(0, !bad.get(0));
  store.add({BitVector::unit(2, 0), bad});
  EXPECT_THROW(decode(store, 2), IntegrityError);
}

TEST(Projection, Examples) {
  PacketStore store(3, 4);
  for (std::uint64_t mu = 1; mu < 8; ++mu) EXPECT_FALSE(knows_projection(store, BitVector::from_word(mu, 3)));
  store.add({BitVector::unit(3, 0), BitVector(4)});
  EXPECT_TRUE(knows_projection(store, BitVector::unit(3, 0)));
  EXPECT_FALSE(knows_projection(store, BitVector::unit(3, 1)));
}

TEST(Projection, FullSpanIffAllProjectionsKnown) {
  for (Seed s = 0; s < 300; ++s) {
    const std::size_t k = 1 + s % 8;
    RngStream rng(s, 2, 0);
    PacketStore store(k, 1);
    const std::size_t adds = rng.below(k + 3);
    for (std::size_t i = 0; i < adds; ++i) store.add({random_vector(k, rng), BitVector(1)});
    bool all = true;
    for (std::uint64_t mu = 1; mu < (1ULL << k); ++mu) all &= knows_projection(store, BitVector::from_word(mu, k));
    EXPECT_EQ(all, store.rank() == k) << "seed " << s;
  }
}
