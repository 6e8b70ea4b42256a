#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "mwrc/simcode.hpp"

using namespace mwrc;

namespace {

SimConfig base(ChannelSpec spec, RateTuple rates, std::size_t n) {
  SimConfig c;
  c.dist = InputDistribution::uniform(spec);
  c.spec = std::move(spec);
  c.rates = std::move(rates);
  c.block_length = n;
  return c;
}

// Hand-built enumerated codebook.
CodebookSet hand_codebook(const ChannelSpec& spec, std::vector<std::vector<Sequence>> users,
                          std::vector<Sequence> relay) {
  CodebookSet s;
  s.codebook.block_length = users[0][0].size();
  s.codebook.q_sequence.assign(s.codebook.block_length, 0);
  s.codebook.user_codewords = std::move(users);
  std::vector<std::size_t> counts;
  for (const auto& u : s.codebook.user_codewords) counts.push_back(u.size());
  std::vector<std::size_t> w(counts.size(), 0);
  // Row-major enumeration, user 1 slowest.
  while (true) {
    s.relay_map.insert(induced_sequence(spec, s.codebook, w));
    std::size_t k = counts.size();
    while (k > 0 && ++w[k - 1] == counts[k - 1]) w[--k] = 0;
    if (k == 0) break;
  }
  if (relay.empty())
    for (std::size_t v = 0; v < s.relay_map.size(); ++v) relay.push_back(s.relay_map.sequence(v));
  s.codebook.relay_codewords = std::move(relay);
  return s;
}

double error_rate(const SimConfig& c) {
  const auto out = Simulator(c).run_all();
  return std::count_if(out.begin(), out.end(), [](const SimOutcome& o) { return o.error(); }) /
         double(out.size());
}

}  // namespace

TEST(MessageCounts, RoundingAndRealizedRate) {
  EXPECT_EQ(message_counts({0.0, 0.5}, 8), (std::vector<std::size_t>{1, 16}));
  EXPECT_EQ(message_counts({0.01, 0.3}, 4), (std::vector<std::size_t>{1, 2}));
  const auto r = realized_rates({1, 16}, 8);
  EXPECT_EQ(r[0], 0.0);
  EXPECT_DOUBLE_EQ(r[1], 0.5);
  EXPECT_THROW(message_counts({-1.0, 0.0}, 8), UsageError);
  EXPECT_THROW(message_counts({1.0, 1.0}, 0), UsageError);
}

TEST(ValidateConfig, Rejects) {
  auto c = base(make_xor_channel(0.0), {0.5, 0.5}, 8);
  EXPECT_NO_THROW(validate_config(c));
  c.epsilon = 0;
  EXPECT_THROW(validate_config(c), UsageError);
  c = base(make_xor_channel(0.0), {0.5}, 8);
  EXPECT_THROW(validate_config(c), UsageError);
  c = base(make_xor_channel(0.0), {2.0, 2.0}, 16);
  EXPECT_THROW(validate_config(c), CapacityError);
}

TEST(GenerateCodebooks, Examples) {
  RandomStream rng(1);
  auto c = base(make_xor_channel(0.0), {0.0, 0.0}, 4);
  auto s = generate_codebooks(c, rng);
  EXPECT_EQ(s.relay_map.size(), 1u);
  EXPECT_EQ(s.codebook.relay_codewords.size(), 1u);

  c = base(make_xor_channel(0.0), {1.0, 1.0}, 1);
  c.distinct_codewords = true;
  s = generate_codebooks(c, rng);
  EXPECT_EQ(s.relay_map.size(), 2u);
  std::set<Sequence> induced;
  for (const auto& [seq, idx] : s.relay_map.forward()) induced.insert(seq);
  EXPECT_EQ(induced, (std::set<Sequence>{{0}, {1}}));

  // n = 2 leaves room for four distinct binary relay codewords.
  c = base(make_pair_copy_channel(2, 0.0), {0.5, 0.5}, 2);
  c.distinct_codewords = true;
  s = generate_codebooks(c, rng);
  EXPECT_EQ(message_counts(c.rates, 2), (std::vector<std::size_t>{2, 2}));
  EXPECT_EQ(s.relay_map.size(), 4u);
  EXPECT_EQ(s.codebook.relay_codewords.size(), 4u);
}

TEST(GenerateCodebooks, SymbolsInRangeAndBijection) {
  RandomStream rng(2);
  const auto c = base(make_pair_copy_channel(2, 0.1), {0.5, 0.5}, 6);
  const auto s = generate_codebooks(c, rng);
  const auto counts = message_counts(c.rates, c.block_length);
  for (std::size_t i = 0; i < 2; ++i) {
    ASSERT_EQ(s.codebook.user_codewords[i].size(), counts[i]);
    for (const auto& x : s.codebook.user_codewords[i])
      for (Symbol v : x) EXPECT_LT(v, 2u);
  }
  EXPECT_LE(s.relay_map.size(), counts[0] * counts[1]);
  for (std::size_t v = 0; v < s.relay_map.size(); ++v) EXPECT_EQ(s.relay_map.find(s.relay_map.sequence(v)), v);
  for (const auto& [seq, idx] : s.relay_map.forward()) EXPECT_EQ(s.relay_map.sequence(idx), seq);
  EXPECT_EQ(s.relay_map.forward().size(), s.relay_map.size());
}

TEST(CandidateIndices, Examples) {
  RandomStream rng(3);
  auto c = base(make_xor_channel(0.0), {0.0, 0.0}, 4);
  auto s = generate_codebooks(c, rng);
  EXPECT_EQ(candidate_indices(c.spec, s.codebook, s.relay_map, 0, 0), (std::vector<std::size_t>{0}));

  c = base(make_xor_channel(0.0), {1.0, 1.0}, 1);
  c.distinct_codewords = true;
  s = generate_codebooks(c, rng);
  EXPECT_EQ(candidate_indices(c.spec, s.codebook, s.relay_map, 0, 1).size(), 2u);

  c = base(make_pair_copy_channel(2, 0.0), {0.5, 0.5}, 2);
  c.distinct_codewords = true;
  s = generate_codebooks(c, rng);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t a = 0; a < 2; ++a)
      EXPECT_EQ(candidate_indices(c.spec, s.codebook, s.relay_map, i, a).size(), 2u);
}

TEST(CandidateIndices, CountBoundAndContainment) {
  RandomStream rng(4);
  const auto c = base(make_xor_channel(0.2), {0.4, 0.6}, 5);
  const auto s = generate_codebooks(c, rng);
  const auto counts = message_counts(c.rates, c.block_length);
  RelayMap map = s.relay_map;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t a = 0; a < counts[i]; ++a) {
      const auto d = candidate_indices(c.spec, s.codebook, map, i, a);
      EXPECT_LE(d.size(), counts[1 - i]);
      for (std::size_t b = 0; b < counts[1 - i]; ++b) {
        std::vector<std::size_t> w(2);
        w[i] = a;
        w[1 - i] = b;
        const auto v = map.find(induced_sequence(c.spec, s.codebook, w));
        ASSERT_TRUE(v.has_value());
        EXPECT_TRUE(std::binary_search(d.begin(), d.end(), *v));
      }
    }
}

TEST(DecodeStep1, NoiselessDistinctRecoversTruth) {
  const auto spec = make_xor_channel(0.0);
  const auto dist = InputDistribution::uniform(spec);
  const auto s = hand_codebook(spec, {{{0, 0, 1, 1}, {0, 1, 0, 1}}, {{0, 1, 1, 0}, {1, 1, 0, 0}}},
                               {{0, 0, 1, 1}, {1, 0, 1, 0}, {0, 1, 1, 0}, {1, 1, 0, 1}});
  const DecoderLaws laws(spec, dist, 4, 0.5, Typicality::Robust);
  std::vector<std::size_t> all(s.relay_map.size());
  for (std::size_t v = 0; v < all.size(); ++v) all[v] = v;
  for (std::size_t v : all) {
    const auto r = decode_step1(laws, 0, s.codebook.relay_codewords[v], all, s.codebook, s.relay_map);
    ASSERT_TRUE(r.index.has_value());
    EXPECT_EQ(*r.index, v);
  }
}

TEST(DecodeStep1, ZeroEpsilonMisses) {
  const auto spec = make_xor_channel(0.05);
  const auto dist = InputDistribution::uniform(spec);
  const auto s = hand_codebook(spec, {{{0, 1, 1, 0}}, {{0, 0, 1, 1}, {1, 1, 1, 1}}}, {});
  // n p(x0, y) = 4 * 0.475 is not an integer, so no sequence is exactly typical.
  const DecoderLaws laws(spec, dist, 4, 0.0, Typicality::Robust);
  const auto r = decode_step1(laws, 0, {0, 1, 1, 0}, {0, 1}, s.codebook, s.relay_map);
  EXPECT_FALSE(r.index.has_value());
  EXPECT_EQ(r.failure, DecodeFailure::Miss);
}

TEST(DecodeStep1, IdenticalRelayCodewordsAreAmbiguous) {
  const auto spec = make_xor_channel(0.0);
  const auto dist = InputDistribution::uniform(spec);
  const auto s = hand_codebook(spec, {{{0, 0, 1, 1}}, {{0, 1, 0, 1}, {1, 0, 1, 0}}},
                               {{0, 1, 1, 0}, {0, 1, 1, 0}});
  const DecoderLaws laws(spec, dist, 4, 0.5, Typicality::Robust);
  const auto r = decode_step1(laws, 0, {0, 1, 1, 0}, {0, 1}, s.codebook, s.relay_map);
  EXPECT_EQ(r.failure, DecodeFailure::Ambiguous);
  EXPECT_EQ(r.accepted.size(), 2u);
}

TEST(DecodeStep2, PairCopyDistinctIsExact) {
  const auto spec = make_pair_copy_channel(2, 0.0);
  const auto dist = InputDistribution::uniform(spec);
  auto s = hand_codebook(spec, {{{0, 0, 1, 1}, {1, 1, 0, 0}}, {{0, 1, 0, 1}, {1, 0, 1, 0}}}, {});
  const DecoderLaws laws(spec, dist, 4, 0.5, Typicality::Robust);
  for (std::size_t a = 0; a < 2; ++a) {
    const auto cands = enumerate_candidates(spec, s.codebook, s.relay_map, 0, a);
    for (const auto& c : cands) {
      const auto r = decode_step2(laws, spec, s.codebook, cands, c.relay_index);
      ASSERT_TRUE(r.messages.has_value());
      EXPECT_EQ(*r.messages, c.messages);
    }
  }
}

TEST(DecodeStep2, XorRecoversOtherMessageSymbolwise) {
  const auto spec = make_xor_channel(0.0);
  const auto dist = InputDistribution::uniform(spec);
  auto s = hand_codebook(spec, {{{0, 0, 1, 1}, {0, 1, 1, 0}}, {{0, 1, 0, 1}, {1, 1, 0, 0}}}, {});
  const DecoderLaws laws(spec, dist, 4, 0.5, Typicality::Robust);
  const std::vector<std::size_t> truth{1, 1};
  const Sequence y0 = induced_sequence(spec, s.codebook, truth);
  // x2 = y0 xor x1(a1)
  for (std::size_t t = 0; t < 4; ++t)
    EXPECT_EQ(y0[t] ^ s.codebook.user_codewords[0][1][t], s.codebook.user_codewords[1][1][t]);
  const auto cands = enumerate_candidates(spec, s.codebook, s.relay_map, 0, 1);
  const auto r = decode_step2(laws, spec, s.codebook, cands, *s.relay_map.find(y0));
  ASSERT_TRUE(r.messages.has_value());
  EXPECT_EQ(*r.messages, truth);
}

TEST(DecodeStep2, CollidingTuplesAreAmbiguous) {
  const auto spec = make_xor_channel(0.0);
  const auto dist = InputDistribution::uniform(spec);
  // User 2's two codewords coincide, so both tuples induce the same y0 and type.
  auto s = hand_codebook(spec, {{{0, 1}, {1, 0}}, {{0, 1}, {0, 1}}}, {});
  const DecoderLaws laws(spec, dist, 2, 1.0, Typicality::Robust);
  const auto cands = enumerate_candidates(spec, s.codebook, s.relay_map, 0, 0);
  const auto r = decode_step2(laws, spec, s.codebook, cands, cands[0].relay_index);
  EXPECT_EQ(r.failure, DecodeFailure::Ambiguous);
  EXPECT_FALSE(r.messages.has_value());
}

TEST(RunTrial, NoiselessInjectiveDistinctNeverErrs) {
  auto c = base(make_pair_copy_channel(2, 0.0), {0.5, 0.5}, 8);
  c.distinct_codewords = true;
  c.epsilon = 3.0;
  c.trials = 300;
  const auto out = Simulator(c).run_all();
  for (const auto& o : out) {
    EXPECT_FALSE(o.error());
    EXPECT_TRUE(o.decomposition_holds());
  }
}

TEST(RunTrial, UselessDownlinkFails) {
  auto c = base(make_xor_channel(0.5), {0.5, 0.5}, 8);
  c.epsilon = 1.0;
  c.trials = 200;
  EXPECT_GT(error_rate(c), 0.2);
}

TEST(RunTrial, SingleMessageNeverErrs) {
  auto c = base(make_xor_channel(0.3), {0.0, 0.0}, 8);
  c.trials = 200;
  EXPECT_EQ(error_rate(c), 0.0);
}

TEST(RunTrial, DeterministicAcrossThreads) {
  auto c = base(make_xor_channel(0.1), {0.3, 0.3}, 8);
  c.trials = 60;
  c.typicality = Typicality::Weak;
  const auto a = Simulator(c).run_all();
  c.threads = 3;
  const auto b = Simulator(c).run_all();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t t = 0; t < a.size(); ++t)
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_EQ(a[t].users[i].error, b[t].users[i].error);
      EXPECT_EQ(a[t].users[i].e1, b[t].users[i].e1);
      EXPECT_EQ(a[t].users[i].eu, b[t].users[i].eu);
    }
  const auto one = run_trial(c, 7);
  const auto two = run_trial(c, 7);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(one.users[i].error, two.users[i].error);
}

TEST(RunTrial, ErrorEqualsDisjunctionOfEvents) {
  for (double p : {0.0, 0.1, 0.3}) {
    auto c = base(make_xor_channel(p), {0.5, 0.5}, 8);
    c.trials = 150;
    c.typicality = Typicality::Weak;
    c.epsilon = 0.5;
    for (const auto& o : Simulator(c).run_all()) EXPECT_TRUE(o.decomposition_holds());
  }
}

TEST(RunTrial, SharedCodebookAndBlocks) {
  auto c = base(make_pair_copy_channel(2, 0.0), {0.5, 0.5}, 8);
  c.distinct_codewords = true;
  c.epsilon = 3.0;
  c.trials = 50;
  c.share_codebook = true;
  c.blocks = 4;
  EXPECT_EQ(error_rate(c), 0.0);
}

TEST(RunExperiment, ZeroRateIsFlat) {
  auto c = base(make_xor_channel(0.2), {0.0, 0.0}, 8);
  c.trials = 50;
  const auto r = run_experiment(c, {4, 8});
  ASSERT_EQ(r.rows.size(), 2u);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.overall, 0.0);
    EXPECT_EQ(row.half_width, 0.0);
  }
  EXPECT_TRUE(r.non_increasing);
  EXPECT_FALSE(r.strictly_decreasing);
}

TEST(RunExperiment, ExteriorPointErrsOften) {
  // Sum-rate 1.2 on the other user exceeds the downlink capacity of 1.
  auto c = base(make_xor_channel(0.0), {0.6, 0.6}, 4);
  c.rates = {1.2, 0.1};
  c.trials = 100;
  c.epsilon = 1.0;
  for (const auto& row : run_experiment(c, {4, 6}).rows) EXPECT_GE(row.overall, 0.2);
}
