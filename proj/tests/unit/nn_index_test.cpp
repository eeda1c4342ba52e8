#include <gtest/gtest.h>

#include <random>

#include "fiver/nn_index.hpp"

namespace fiver {
namespace {

FeatureVector random_point(std::mt19937_64& rng, std::size_t dim, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> v(dim);
  for (auto& x : v) x = g(rng);
  return FeatureVector(std::move(v));
}

// Points on a small integer grid so that exact distance ties are common.
FeatureVector grid_point(std::mt19937_64& rng, std::size_t dim) {
  std::uniform_int_distribution<int> cell(-4, 4);
  std::vector<double> v(dim);
  for (auto& x : v) x = cell(rng);
  return FeatureVector(std::move(v));
}

class IndexKinds : public ::testing::TestWithParam<IndexKind> {};

TEST_P(IndexKinds, EmptyIndexHasNoNeighbor) {
  auto index = make_index(GetParam());
  EXPECT_TRUE(index->empty());
  EXPECT_FALSE(index->nearest(FeatureVector{0.0, 0.0}).has_value());
}

TEST_P(IndexKinds, FindsNearestAndReportsDistance) {
  auto index = make_index(GetParam());
  index->insert(BallId{0}, FeatureVector{0.0, 0.0});
  index->insert(BallId{1}, FeatureVector{10.0, 0.0});
  index->insert(BallId{2}, FeatureVector{0.0, 10.0});
  const auto nn = index->nearest(FeatureVector{7.0, 0.0});
  ASSERT_TRUE(nn);
  EXPECT_EQ(nn->id, BallId{1});
  EXPECT_DOUBLE_EQ(nn->distance, 3.0);
}

TEST_P(IndexKinds, TiesGoToSmallestId) {
  auto index = make_index(GetParam());
  index->insert(BallId{5}, FeatureVector{1.0, 0.0});
  index->insert(BallId{3}, FeatureVector{-1.0, 0.0});
  index->insert(BallId{9}, FeatureVector{0.0, 1.0});
  EXPECT_EQ(index->nearest(FeatureVector{0.0, 0.0})->id, BallId{3});
}

TEST_P(IndexKinds, RejectsDuplicatesUnknownIdsAndMismatchedDimensions) {
  auto index = make_index(GetParam());
  index->insert(BallId{1}, FeatureVector{1.0, 2.0});
  EXPECT_THROW(index->insert(BallId{1}, FeatureVector{0.0, 0.0}), InvalidInput);
  EXPECT_THROW(index->insert(BallId{2}, FeatureVector{0.0}), InvalidInput);
  EXPECT_THROW(index->remove(BallId{7}), InvalidInput);
  EXPECT_THROW(index->relocate(BallId{7}, FeatureVector{0.0, 0.0}), InvalidInput);
  EXPECT_EQ(index->size(), 1u);
}

TEST_P(IndexKinds, RemoveAndRelocate) {
  auto index = make_index(GetParam());
  index->insert(BallId{0}, FeatureVector{0.0});
  index->insert(BallId{1}, FeatureVector{5.0});
  index->remove(BallId{0});
  EXPECT_FALSE(index->contains(BallId{0}));
  EXPECT_EQ(index->nearest(FeatureVector{0.0})->id, BallId{1});
  index->relocate(BallId{1}, FeatureVector{-2.0});
  EXPECT_DOUBLE_EQ(index->nearest(FeatureVector{0.0})->distance, 2.0);
  index->remove(BallId{1});
  EXPECT_TRUE(index->empty());
  // A drained index accepts a new dimensionality.
  index->insert(BallId{2}, FeatureVector{1.0, 1.0, 1.0});
  EXPECT_EQ(index->size(), 1u);
}

TEST_P(IndexKinds, CloneIsIndependent) {
  auto index = make_index(GetParam());
  index->insert(BallId{0}, FeatureVector{0.0});
  auto copy = index->clone();
  index->remove(BallId{0});
  EXPECT_TRUE(copy->contains(BallId{0}));
  EXPECT_EQ(copy->nearest(FeatureVector{1.0})->id, BallId{0});
}

INSTANTIATE_TEST_SUITE_P(All, IndexKinds, ::testing::Values(IndexKind::CoverTree, IndexKind::LinearScan),
                         [](const auto& info) {
                           return info.param == IndexKind::CoverTree ? std::string("CoverTree")
                                                                     : std::string("LinearScan");
                         });

void expect_agree(const NearestIndex& tree, const NearestIndex& scan, const FeatureVector& q) {
  const auto a = tree.nearest(q);
  const auto b = scan.nearest(q);
  ASSERT_EQ(a.has_value(), b.has_value());
  if (!a) return;
  EXPECT_EQ(a->id, b->id);
  EXPECT_EQ(a->distance, b->distance);
}

TEST(CoverTreeIndex, MatchesLinearScanUnderChurn) {
  std::mt19937_64 rng(11);
  CoverTreeIndex tree;
  LinearScanIndex scan;
  std::vector<BallId> live;
  std::uint64_t next = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto p = random_point(rng, 4, 5.0);
    tree.insert(BallId{next}, p);
    scan.insert(BallId{next}, p);
    live.push_back(BallId{next++});
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int step = 0; step < 3000; ++step) {
    const double r = u(rng);
    std::uniform_int_distribution<std::size_t> pick(0, live.size() - 1);
    if (r < 0.2 && live.size() > 1) {
      const std::size_t k = pick(rng);
      tree.remove(live[k]);
      scan.remove(live[k]);
      live[k] = live.back();
      live.pop_back();
    } else if (r < 0.5) {
      const auto p = random_point(rng, 4, 5.0);
      const BallId id = live[pick(rng)];
      tree.relocate(id, p);
      scan.relocate(id, p);
    } else if (r < 0.6) {
      const auto p = random_point(rng, 4, 5.0);
      tree.insert(BallId{next}, p);
      scan.insert(BallId{next}, p);
      live.push_back(BallId{next++});
    } else {
      expect_agree(tree, scan, random_point(rng, 4, 6.0));
    }
    ASSERT_EQ(tree.size(), scan.size());
  }
}

TEST(CoverTreeIndex, MatchesLinearScanOnTiedGrid) {
  std::mt19937_64 rng(3);
  CoverTreeIndex tree;
  LinearScanIndex scan;
  std::uint64_t next = 0;
  for (int i = 0; i < 600; ++i) {
    const auto p = grid_point(rng, 2);
    tree.insert(BallId{next}, p);
    scan.insert(BallId{next}, p);
    ++next;
  }
  for (int q = 0; q < 2000; ++q) expect_agree(tree, scan, grid_point(rng, 2));
}

TEST(CoverTreeIndex, DuplicatePointsResolveToSmallestId) {
  CoverTreeIndex tree;
  for (std::uint64_t i = 10; i > 0; --i) tree.insert(BallId{i}, FeatureVector{1.0, 1.0});
  const auto nn = tree.nearest(FeatureVector{1.0, 1.0});
  EXPECT_EQ(nn->id, BallId{1});
  EXPECT_EQ(nn->distance, 0.0);
}

TEST(CoverTreeIndex, TombstonesAreCompacted) {
  CoverTreeIndex tree;
  std::mt19937_64 rng(5);
  for (std::uint64_t i = 0; i < 500; ++i) tree.insert(BallId{i}, random_point(rng, 3, 1.0));
  for (std::uint64_t i = 0; i < 450; ++i) tree.remove(BallId{i});
  EXPECT_EQ(tree.size(), 50u);
  EXPECT_LE(tree.node_count(), 2 * tree.size() + 32);
}

}  // namespace
}  // namespace fiver
