#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "slotfill/decode.hpp"
#include "slotfill/synthetic.hpp"
#include "slotfill/training.hpp"
#include "test_support.hpp"

namespace slotfill {
namespace {

using testing::enumerate_best;
using testing::random_fixture;

class DecodeTest : public ::testing::TestWithParam<Mechanism> {};

TEST_P(DecodeTest, BeamOfOneIsGreedy) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto f = random_fixture(GetParam(), 5, 8, seed);
    const auto b = beam_decode(f.params, GetParam(), std::span<const int>(f.ids), 1);
    const auto g = greedy_decode(f.params, GetParam(), std::span<const int>(f.ids));
    EXPECT_EQ(b.tags, g.tags);
    EXPECT_EQ(b.log_prob, g.log_prob);
  }
}

TEST_P(DecodeTest, FullBeamMatchesExhaustiveSearch) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const auto f = random_fixture(GetParam(), 3, 4, seed);
    const std::size_t T = f.ids.size();
    const auto [best, score] = enumerate_best(3, T, [&](const std::vector<int>& tags) {
      return sequence_log_prob(f.params, GetParam(), std::span<const int>(f.ids), std::span<const int>(tags));
    });
    const auto b = beam_decode(f.params, GetParam(), std::span<const int>(f.ids),
                               static_cast<std::size_t>(std::pow(3, T)));
    EXPECT_EQ(b.tags, best);
    EXPECT_EQ(b.log_prob, score);
  }
}

TEST_P(DecodeTest, ScoreIsTheSequenceLogProbability) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = random_fixture(GetParam(), 4, 8, seed);
    const auto b = beam_decode(f.params, GetParam(), std::span<const int>(f.ids), 3);
    EXPECT_EQ(b.log_prob, sequence_log_prob(f.params, GetParam(), std::span<const int>(f.ids),
                                            std::span<const int>(b.tags)));
    EXPECT_LE(b.log_prob, 0.0);
  }
}

TEST_P(DecodeTest, OutputLengthMatchesInputAndSkipsBeginTag) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto f = random_fixture(GetParam(), 4, 12, seed, 0.2);
    for (std::size_t beam : {1u, 2u, 5u}) {
      const auto r = beam_decode(f.params, GetParam(), std::span<const int>(f.ids), beam);
      ASSERT_EQ(r.tags.size(), f.ids.size());
      for (int t : r.tags) EXPECT_NE(t, kBeginTag);
    }
  }
}

TEST_P(DecodeTest, FullBeamBoundsEveryNarrowerBeam) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto f = random_fixture(GetParam(), 3, 5, seed);
    const auto full = static_cast<std::size_t>(std::pow(3, f.ids.size()));
    const double best = beam_decode(f.params, GetParam(), std::span<const int>(f.ids), full).log_prob;
    for (std::size_t k = 1; k <= 8; ++k) {
      EXPECT_LE(beam_decode(f.params, GetParam(), std::span<const int>(f.ids), k).log_prob, best);
    }
  }
}

TEST_P(DecodeTest, RejectsZeroBeam) {
  const auto f = random_fixture(GetParam(), 4, 3, 0);
  EXPECT_THROW(beam_decode(f.params, GetParam(), std::span<const int>(f.ids), 0), ContractError);
}

INSTANTIATE_TEST_SUITE_P(Mechanisms, DecodeTest,
                         ::testing::Values(Mechanism::kAttention, Mechanism::kFocus),
                         [](const auto& info) { return std::string(to_string(info.param)); });

// Pruning can discard the prefix of the eventual best path, so a wider beam
// is not guaranteed to finish with a better score.
TEST(BeamWidthTest, WiderBeamCanScoreWorse) {
  const auto f = random_fixture(Mechanism::kAttention, 4, 8, 11);
  const auto one = beam_decode(f.params, Mechanism::kAttention, std::span<const int>(f.ids), 1);
  const auto two = beam_decode(f.params, Mechanism::kAttention, std::span<const int>(f.ids), 2);
  EXPECT_LT(two.log_prob, one.log_prob);
}

TEST(DecodeCorpusTest, ThreadCountDoesNotChangeOutput) {
  Corpus c = generate_corpus(ToyGrammar::kFlights, 25, 1);
  const Vocabulary v = build_vocab(c);
  encode(c, v);
  TrainConfig tc;
  tc.embedding_dim = tc.hidden_dim = tc.label_dim = 6;
  tc.mechanism = Mechanism::kAttention;
  const auto params = init_params<double>(tc.model_config(v), 2, 0.5);
  const auto one = decode_corpus(params, tc.mechanism, v.tags, c, 2, 1);
  const auto three = decode_corpus(params, tc.mechanism, v.tags, c, 2, 3);
  EXPECT_EQ(one, three);
  ASSERT_EQ(one.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(one[i].size(), c[i].sentence.length());
  const F1Report r = evaluate(params, tc.mechanism, v.tags, c, 1);
  EXPECT_EQ(r.beam_size, std::optional<std::size_t>(1));
  EXPECT_EQ(r.sentences, c.size());
}

}  // namespace
}  // namespace slotfill
