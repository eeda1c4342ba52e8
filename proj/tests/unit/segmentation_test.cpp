#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "fiver/eval_harness.hpp"
#include "fiver/segmentation.hpp"

namespace fiver {
namespace {

using Tokens = std::vector<std::string>;

CoverModel model_for(const SyntheticSpec& spec, std::uint64_t seed) {
  SyntheticSpec train = spec;
  train.bags = 150;
  return train_full(generate_synthetic(train, seed).bags);
}

TEST(EditDistance, Examples) {
  EXPECT_EQ(edit_distance(Tokens{"a", "b", "c"}, Tokens{"a", "b", "c"}), 0u);
  EXPECT_EQ(edit_distance(Tokens{"a", "c"}, Tokens{"a", "b", "c"}), 1u);
  EXPECT_EQ(edit_distance(Tokens{"a", "x", "c"}, Tokens{"a", "b", "c"}), 1u);
  EXPECT_EQ(edit_distance(Tokens{}, Tokens{"a", "b"}), 2u);
  EXPECT_EQ(edit_distance(Tokens{"k", "i", "t", "t", "e", "n"}, Tokens{"s", "i", "t", "t", "i", "n", "g"}), 3u);
}

TEST(EditDistance, SymmetricAndBoundedByLongerLength) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> len(0, 8);
  std::uniform_int_distribution<int> sym(0, 3);
  auto draw = [&] {
    Tokens t(static_cast<std::size_t>(len(rng)));
    for (auto& s : t) s = std::string(1, static_cast<char>('a' + sym(rng)));
    return t;
  };
  for (int i = 0; i < 300; ++i) {
    const auto a = draw();
    const auto b = draw();
    const auto d = edit_distance(a, b);
    EXPECT_EQ(d, edit_distance(b, a));
    EXPECT_LE(d, std::max(a.size(), b.size()));
    EXPECT_GE(d, a.size() > b.size() ? a.size() - b.size() : b.size() - a.size());
  }
}

TEST(LevenshteinError, NormalisesByTruthLength) {
  EXPECT_DOUBLE_EQ(levenshtein_error(Tokens{"a", "c"}, Tokens{"a", "b", "c"}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(levenshtein_error(Tokens{"a", "b", "c", "d"}, Tokens{"a", "b"}), 1.0);
  EXPECT_THROW(levenshtein_error(Tokens{"a"}, Tokens{}), InvalidInput);
}

TEST(MovingAverage, CenteredAndTruncatedAtEnds) {
  const std::vector<double> xs{0.0, 3.0, 6.0, 9.0};
  const auto m = moving_average(xs, 3);
  EXPECT_DOUBLE_EQ(m[0], 1.5);
  EXPECT_DOUBLE_EQ(m[1], 3.0);
  EXPECT_DOUBLE_EQ(m[2], 6.0);
  EXPECT_DOUBLE_EQ(m[3], 7.5);
  EXPECT_EQ(moving_average(xs, 1), xs);
  EXPECT_THROW(moving_average(xs, 0), InvalidInput);
}

TEST(FrameScores, RejectsEmptyInputs) {
  const SyntheticSpec spec;
  const CoverModel model = model_for(spec, 1);
  EXPECT_THROW(frame_scores(model, std::span<const FeatureVector>{}), InvalidInput);
  const std::vector<FeatureVector> frames{FeatureVector{0.0, 0.0, 0.0}};
  EXPECT_THROW(frame_scores(CoverModel{}, frames), InvalidInput);
}

TEST(FrameScores, SingleFrameWindowEqualsSingleFramePrediction) {
  const SyntheticSpec spec;
  const CoverModel model = model_for(spec, 2);
  const std::vector<std::size_t> actions{1};
  const std::vector<std::size_t> lengths{1};
  const auto seq = generate_sequence(spec, actions, lengths, 3);
  SegmentationConfig cfg;
  cfg.window = 1;
  cfg.smooth_window = 1;
  const auto series = frame_scores(model, seq.frames, cfg);
  EXPECT_EQ(series.probabilities.front(), model.predict(seq.frames).posterior);
}

TEST(FrameScores, ProbabilitiesSumToOne) {
  const SyntheticSpec spec;
  const CoverModel model = model_for(spec, 4);
  const std::vector<std::size_t> actions{0, 2};
  const std::vector<std::size_t> lengths{60, 60};
  const auto seq = generate_sequence(spec, actions, lengths, 5);
  const auto series = frame_scores(model, seq.frames);
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    EXPECT_NEAR(std::accumulate(series.probabilities[f].begin(), series.probabilities[f].end(), 0.0), 1.0, 1e-9);
    EXPECT_GE(series.stddev[f], 0.0);
  }
}

TEST(Boundaries, ConstantClassStreamHasNone) {
  const SyntheticSpec spec;
  const CoverModel model = model_for(spec, 6);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const std::vector<std::size_t> actions{1};
    const std::vector<std::size_t> lengths{200};
    const auto seq = generate_sequence(spec, actions, lengths, seed);
    const auto series = frame_scores(model, seq.frames);
    EXPECT_TRUE(detect_boundaries(series).empty()) << "seed " << seed;
  }
}

TEST(Boundaries, TwoClassSwitchIsFoundNearTruth) {
  const SyntheticSpec spec;
  const CoverModel model = model_for(spec, 7);
  const SegmentationConfig cfg;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const std::vector<std::size_t> actions{0, 1};
    const std::vector<std::size_t> lengths{100, 100};
    const auto seq = generate_sequence(spec, actions, lengths, seed);
    const auto cuts = detect_boundaries(frame_scores(model, seq.frames, cfg), cfg);
    ASSERT_EQ(cuts.size(), 1u) << "seed " << seed;
    EXPECT_LE(cuts[0], 100 + cfg.window);
    EXPECT_GE(cuts[0] + cfg.window, 100u);
  }
}

TEST(Segments, PartitionFramesAndGateMonotonically) {
  const SyntheticSpec spec;
  const CoverModel model = model_for(spec, 8);
  const std::vector<std::size_t> actions{2, 0, 1};
  const std::vector<std::size_t> lengths{80, 70, 90};
  const auto seq = generate_sequence(spec, actions, lengths, 9);
  const auto series = frame_scores(model, seq.frames);

  std::size_t previous_unknown = 0;
  for (double gate : {0.0, 0.5, 0.9, 1.01}) {
    const auto segs = detect_segments(model, seq.frames, series, gate);
    ASSERT_FALSE(segs.empty());
    EXPECT_EQ(segs.front().start, 0u);
    EXPECT_EQ(segs.back().end, seq.frames.size());
    for (std::size_t k = 0; k < segs.size(); ++k) {
      EXPECT_LT(segs[k].start, segs[k].end);
      if (k > 0) EXPECT_EQ(segs[k].start, segs[k - 1].end);
    }
    std::size_t unknown = 0;
    for (const auto& s : segs) unknown += s.label ? 0 : 1;
    EXPECT_GE(unknown, previous_unknown);
    previous_unknown = unknown;
    if (gate == 0.0) {
      EXPECT_EQ(unknown, 0u);
      EXPECT_EQ(segment_symbols(segs), seq.truth);
    }
    if (gate > 1.0) EXPECT_EQ(unknown, segs.size());
  }
}

TEST(Symbols, MergesRunsAndHandlesUnknown) {
  std::vector<SegmentHypothesis> segs{
      {0, 10, "a", 0.9}, {10, 20, "a", 0.8}, {20, 30, std::nullopt, 0.1}, {30, 40, "b", 0.9}};
  EXPECT_EQ(segment_symbols(segs), (Tokens{"a", "b"}));
  EXPECT_EQ(segment_symbols(segs, UnknownPolicy::Rejection), (Tokens{"a", std::string(kUnknownToken), "b"}));
}

TEST(Symbols, MaskHeldout) {
  const Tokens truth{"a", "b", "a", "c"};
  EXPECT_EQ(mask_heldout(truth, {"a"}), (Tokens{std::string(kUnknownToken), "b", std::string(kUnknownToken), "c"}));
}

}  // namespace
}  // namespace fiver
