#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "fiver/core_types.hpp"

namespace fiver {

struct Neighbor {
  BallId id;
  double distance;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Exact nearest-neighbor index over ball centers.
///
/// All implementations share one tie rule: among entries at exactly the same
/// (bitwise) distance, the smallest BallId wins. Queries are const and may run
/// concurrently with each other, never with a mutation.
class NearestIndex {
 public:
  virtual ~NearestIndex() = default;

  /// Throws InvalidInput if `id` is already present or the dimensionality
  /// differs from previously inserted centers.
  virtual void insert(BallId id, const FeatureVector& center) = 0;
  /// Throws InvalidInput if `id` is unknown.
  virtual void remove(BallId id) = 0;
  /// Same as remove + insert. Throws InvalidInput if `id` is unknown.
  virtual void relocate(BallId id, const FeatureVector& center) = 0;
  /// std::nullopt when the index is empty.
  virtual std::optional<Neighbor> nearest(const FeatureVector& query) const = 0;

  virtual bool contains(BallId id) const = 0;
  virtual std::size_t size() const = 0;
  virtual void clear() = 0;
  virtual std::unique_ptr<NearestIndex> clone() const = 0;

  bool empty() const { return size() == 0; }
};

enum class IndexKind { CoverTree, LinearScan };

std::unique_ptr<NearestIndex> make_index(IndexKind kind);

/// Reference implementation: one distance evaluation per entry.
class LinearScanIndex final : public NearestIndex {
 public:
  void insert(BallId id, const FeatureVector& center) override;
  void remove(BallId id) override;
  void relocate(BallId id, const FeatureVector& center) override;
  std::optional<Neighbor> nearest(const FeatureVector& query) const override;
  bool contains(BallId id) const override { return slot_.contains(id); }
  std::size_t size() const override { return entries_.size(); }
  void clear() override;
  std::unique_ptr<NearestIndex> clone() const override;

 private:
  struct Entry {
    BallId id;
    FeatureVector center;
  };
  std::vector<Entry> entries_;
  std::unordered_map<BallId, std::size_t> slot_;
};

/// Cover tree (simplified, nesting-free variant) with lazy deletion.
///
/// Each node stores a point, an integer level and an upper bound on the
/// distance from its point to any descendant. A child of node p always lies
/// within 2^level(p) of p. Removed entries become routing-only tombstones so
/// the bounds stay valid; the tree is rebuilt from live entries once
/// tombstones outnumber them.
class CoverTreeIndex final : public NearestIndex {
 public:
  void insert(BallId id, const FeatureVector& center) override;
  void remove(BallId id) override;
  void relocate(BallId id, const FeatureVector& center) override;
  std::optional<Neighbor> nearest(const FeatureVector& query) const override;
  bool contains(BallId id) const override { return slot_.contains(id); }
  std::size_t size() const override { return live_; }
  void clear() override;
  std::unique_ptr<NearestIndex> clone() const override;

  std::size_t node_count() const { return nodes_.size(); }

 private:
  using NodeRef = std::uint32_t;

  struct Node {
    FeatureVector point;
    BallId id;
    int level;
    double max_dist;
    bool live;
    std::vector<NodeRef> children;
  };

  NodeRef add_node(BallId id, const FeatureVector& point, int level);
  void insert_point(BallId id, const FeatureVector& point);
  void rebuild();

  std::vector<Node> nodes_;
  std::unordered_map<BallId, NodeRef> slot_;
  std::size_t live_ = 0;
  std::size_t dim_ = 0;
};

}  // namespace fiver
