#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "fiver/eval_harness.hpp"

namespace fiver {
namespace {

TEST(Plan, ParsesAllKeys) {
  std::istringstream in(
      "# sweep\n"
      "version = 1\n"
      "mode = stream\n"
      "variants = varun, rnd\n"
      "budgets = 0.1, 0.5\n"
      "seeds = 3..5   # inclusive\n"
      "max_balls = 200\n"
      "tau = 0.02\n"
      "dataset = data/manifest.txt\n"
      "shuffle = false\n");
  const auto plan = parse_plan(in, "/tmp/base");
  EXPECT_EQ(plan.mode, Mode::Stream);
  EXPECT_EQ(plan.variants, (std::vector<Variant>{Variant::VarUn, Variant::Rnd}));
  EXPECT_EQ(plan.budgets, (std::vector<double>{0.1, 0.5}));
  EXPECT_EQ(plan.seeds, (std::vector<std::uint64_t>{3, 4, 5}));
  EXPECT_EQ(plan.max_balls, 200u);
  EXPECT_DOUBLE_EQ(plan.tau, 0.02);
  EXPECT_EQ(plan.dataset, std::filesystem::path("/tmp/base/data/manifest.txt"));
  EXPECT_FALSE(plan.shuffle);
  EXPECT_NO_THROW(validate_plan(plan));
}

TEST(Plan, GridKeywordAndDefaults) {
  std::istringstream in("budgets = grid\nseeds = 1\nvariants = full\n");
  const auto plan = parse_plan(in);
  EXPECT_EQ(plan.budgets, default_budget_grid());
  EXPECT_EQ(plan.max_balls, 5000u);
  EXPECT_DOUBLE_EQ(plan.tau, 0.01);
}

TEST(Plan, BudgetGrid) {
  const std::vector<double> grid{0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.75, 1.0};
  const auto got = default_budget_grid();
  ASSERT_EQ(got.size(), grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_DOUBLE_EQ(got[i], grid[i]);
}

TEST(Plan, ErrorsNameTheLine) {
  std::istringstream in("mode = stream\ncolour = blue\n");
  try {
    parse_plan(in);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  std::istringstream bad_variant("variants = greedy\n");
  EXPECT_THROW(parse_plan(bad_variant), DataError);
  std::istringstream bad_number("tau = fast\n");
  EXPECT_THROW(parse_plan(bad_number), DataError);
}

TEST(Plan, ValidationRejectsUnusablePlans) {
  ExperimentPlan plan;
  plan.variants = {Variant::Full};
  plan.budgets = {0.5};
  EXPECT_THROW(validate_plan(plan), InvalidInput);  // no seeds
  plan.seeds = {1};
  plan.budgets = {1.5};
  EXPECT_THROW(validate_plan(plan), InvalidInput);
  plan.mode = Mode::Batch;
  plan.folds = 1;
  EXPECT_THROW(validate_plan(plan), InvalidInput);
}

TEST(Split, RoundTripsNames) {
  for (auto s : {Split::Train, Split::Test, Split::Stream}) EXPECT_EQ(parse_split(to_string(s)), s);
  EXPECT_THROW(parse_split("validation"), InvalidInput);
}

TEST(Synthetic, MeansAreMutuallySeparated) {
  for (std::size_t dim : {0u, 2u, 1u}) {
    SyntheticSpec spec;
    spec.dim = dim;
    const auto means = class_means(spec);
    for (std::size_t a = 0; a < means.size(); ++a) {
      for (std::size_t b = a + 1; b < means.size(); ++b) {
        double ss = 0.0;
        for (std::size_t j = 0; j < means[a].size(); ++j) ss += (means[a][j] - means[b][j]) * (means[a][j] - means[b][j]);
        EXPECT_GE(std::sqrt(ss), spec.separation - 1e-9) << "dim " << dim;
      }
    }
  }
}

TEST(Synthetic, ShapeLabelsAndDeterminism) {
  SyntheticSpec spec;
  spec.bags = 50;
  spec.min_descriptors = 2;
  spec.max_descriptors = 6;
  const auto a = generate_synthetic(spec, 1);
  const auto b = generate_synthetic(spec, 1);
  const auto c = generate_synthetic(spec, 2);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  ASSERT_EQ(a.bags.size(), 50u);
  EXPECT_EQ(a.dim, 3u);
  std::set<std::string> ids;
  for (const auto& bag : a.bags) {
    EXPECT_GE(bag.descriptors.size(), 2u);
    EXPECT_LE(bag.descriptors.size(), 6u);
    EXPECT_TRUE(bag.true_label == "c0" || bag.true_label == "c1" || bag.true_label == "c2");
    ids.insert(bag.id);
  }
  EXPECT_EQ(ids.size(), 50u);
}

TEST(Synthetic, DegenerateCovarianceIsRejected) {
  SyntheticSpec spec;
  spec.sigma = 0.0;
  EXPECT_THROW(generate_synthetic(spec, 0), InvalidInput);
}

TEST(Synthetic, NovelClassAppearsOnlyAfterOnset) {
  SyntheticSpec spec;
  spec.bags = 400;
  spec.novel_class_at = 200;
  const auto data = generate_synthetic(spec, 3);
  bool seen_late = false;
  for (std::size_t i = 0; i < data.bags.size(); ++i) {
    if (i < 200) EXPECT_NE(*data.bags[i].true_label, "c2");
    if (i >= 200 && *data.bags[i].true_label == "c2") seen_late = true;
  }
  EXPECT_TRUE(seen_late);
}

TEST(Synthetic, DriftTranslatesFirstAxis) {
  SyntheticSpec spec;
  spec.bags = 400;
  spec.sigma = 0.01;
  spec.drift_at = 200;
  const auto data = generate_synthetic(spec, 4);
  const auto means = class_means(spec);
  for (std::size_t i : {10u, 350u}) {
    const auto& bag = data.bags[i];
    const std::size_t k = std::stoul(bag.true_label->substr(1));
    const double shift = i >= 200 ? spec.drift_shift : 0.0;
    EXPECT_NEAR(bag.descriptors[0][0], means[k][0] + shift, 0.1);
  }
}

TEST(Synthetic, SequenceBoundariesFollowLengths) {
  SyntheticSpec spec;
  const std::vector<std::size_t> actions{2, 0, 1};
  const std::vector<std::size_t> lengths{30, 45, 25};
  const auto seq = generate_sequence(spec, actions, lengths, 9);
  EXPECT_EQ(seq.frames.size(), 100u);
  EXPECT_EQ(seq.boundaries, (std::vector<std::size_t>{30, 75}));
  EXPECT_EQ(seq.truth, (std::vector<std::string>{"c2", "c0", "c1"}));
}

TEST(Seeds, DerivedStreamsDifferAndPermutationIsAPermutation) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(5, 2), derive_seed(5, 2));
  auto p = permutation(100, 3);
  EXPECT_EQ(p, permutation(100, 3));
  std::sort(p.begin(), p.end());
  std::vector<std::size_t> id(100);
  std::iota(id.begin(), id.end(), std::size_t{0});
  EXPECT_EQ(p, id);
}

TEST(Stream, FullLearnsSeparatedClasses) {
  SyntheticSpec spec;
  spec.bags = 300;
  const auto data = generate_synthetic(spec, 11);
  StreamSettings settings;
  settings.variant = Variant::Full;
  settings.seed = 1;
  const auto run = run_stream(data.bags, settings);
  EXPECT_GE(run.accuracy, 0.95);
  EXPECT_DOUBLE_EQ(run.query_rate, 1.0);
}

TEST(Stream, ExperimentCurveAveragesSeeds) {
  SyntheticSpec spec;
  spec.bags = 120;
  const auto data = generate_synthetic(spec, 12);
  ExperimentPlan plan;
  plan.variants = {Variant::VarUn, Variant::Rnd};
  plan.budgets = {0.2, 1.0};
  plan.seeds = {1, 2, 3};
  const auto result = run_stream_experiment(plan, data);
  ASSERT_EQ(result.runs.size(), 12u);
  ASSERT_EQ(result.curve.size(), 4u);
  const auto& point = result.curve.front();
  double acc = 0.0;
  double rate = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    acc += result.runs[i].accuracy;
    rate += result.runs[i].query_rate;
  }
  EXPECT_NEAR(point.accuracy_mean, acc / 3.0, 1e-15);
  EXPECT_NEAR(point.query_rate_mean, rate / 3.0, 1e-15);
  EXPECT_LE(point.query_rate_mean, 0.2 + 1e-12);

  std::ostringstream csv;
  write_curve_csv(csv, result.curve);
  EXPECT_EQ(csv.str().rfind("# fiver-results 1\nvariant,budget,realized_query_rate_mean,", 0), 0u);
}

TEST(Batch, TrainOnTestSanity) {
  SyntheticSpec spec;
  spec.bags = 90;
  const auto data = generate_synthetic(spec, 13);
  const CoverModel model = train_full(data.bags);
  EXPECT_GE(evaluate(model, data.bags), 0.99);
}

TEST(Batch, TwoFoldsCoverEveryBagOnce) {
  SyntheticSpec spec;
  spec.bags = 101;
  const auto data = generate_synthetic(spec, 14);
  ExperimentPlan plan;
  plan.mode = Mode::Batch;
  plan.folds = 2;
  plan.seeds = {7};
  const auto result = run_batch_experiment(plan, data);
  ASSERT_EQ(result.folds.size(), 2u);
  EXPECT_EQ(result.folds[0].test_bags + result.folds[1].test_bags, 101u);
  EXPECT_GE(result.mean_accuracy, 0.95);
}

TEST(Batch, ZeroSizeFoldIsRejected) {
  SyntheticSpec spec;
  spec.bags = 3;
  const auto data = generate_synthetic(spec, 15);
  ExperimentPlan plan;
  plan.mode = Mode::Batch;
  plan.folds = 5;
  plan.seeds = {1};
  EXPECT_THROW(run_batch_experiment(plan, data), InvalidInput);
}

TEST(Batch, SplitTagsAndCsv) {
  SyntheticSpec spec;
  spec.bags = 80;
  auto data = generate_synthetic(spec, 16);
  for (std::size_t i = 0; i < data.bags.size(); ++i) data.splits[i] = i < 60 ? Split::Train : Split::Test;
  ExperimentPlan plan;
  plan.mode = Mode::Batch;
  plan.seeds = {1, 2};
  const auto result = run_batch_experiment(plan, data);
  ASSERT_EQ(result.folds.size(), 2u);
  EXPECT_EQ(result.folds[0].test_bags, 20u);
  std::ostringstream csv;
  write_batch_csv(csv, result);
  EXPECT_NE(csv.str().find("summary,all,40,"), std::string::npos);
}

}  // namespace
}  // namespace fiver
