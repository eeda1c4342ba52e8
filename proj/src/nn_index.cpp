#include "fiver/nn_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace fiver {

namespace {

// Strict "better than" under the shared tie rule.
bool better(double dist, BallId id, const Neighbor& best) {
  return dist < best.distance || (dist == best.distance && id < best.id);
}

Neighbor worst_neighbor() {
  return {BallId{std::numeric_limits<std::uint64_t>::max()}, std::numeric_limits<double>::infinity()};
}

double cover_radius(int level) { return std::ldexp(1.0, level); }

}  // namespace

std::unique_ptr<NearestIndex> make_index(IndexKind kind) {
  switch (kind) {
    case IndexKind::LinearScan:
      return std::make_unique<LinearScanIndex>();
    case IndexKind::CoverTree:
      return std::make_unique<CoverTreeIndex>();
  }
  throw InvalidInput("unknown index kind");
}

// ---------------------------------------------------------------------------
// LinearScanIndex

void LinearScanIndex::insert(BallId id, const FeatureVector& center) {
  if (slot_.contains(id)) throw InvalidInput(fmt::format("duplicate ball id {}", to_integer(id)));
  if (!entries_.empty() && entries_.front().center.size() != center.size()) {
    throw InvalidInput(fmt::format("dimensionality mismatch: index holds {}, got {}",
                                   entries_.front().center.size(), center.size()));
  }
  slot_.emplace(id, entries_.size());
  entries_.push_back({id, center});
}

void LinearScanIndex::remove(BallId id) {
  auto it = slot_.find(id);
  if (it == slot_.end()) throw InvalidInput(fmt::format("unknown ball id {}", to_integer(id)));
  const std::size_t pos = it->second;
  slot_.erase(it);
  if (pos + 1 != entries_.size()) {
    entries_[pos] = std::move(entries_.back());
    slot_[entries_[pos].id] = pos;
  }
  entries_.pop_back();
}

void LinearScanIndex::relocate(BallId id, const FeatureVector& center) {
  auto it = slot_.find(id);
  if (it == slot_.end()) throw InvalidInput(fmt::format("unknown ball id {}", to_integer(id)));
  if (entries_[it->second].center.size() != center.size()) {
    throw InvalidInput("dimensionality mismatch in relocate");
  }
  entries_[it->second].center = center;
}

std::optional<Neighbor> LinearScanIndex::nearest(const FeatureVector& query) const {
  if (entries_.empty()) return std::nullopt;
  Neighbor best = worst_neighbor();
  for (const auto& e : entries_) {
    const double d = distance(query, e.center);
    if (better(d, e.id, best)) best = {e.id, d};
  }
  return best;
}

void LinearScanIndex::clear() {
  entries_.clear();
  slot_.clear();
}

std::unique_ptr<NearestIndex> LinearScanIndex::clone() const { return std::make_unique<LinearScanIndex>(*this); }

// ---------------------------------------------------------------------------
// CoverTreeIndex

CoverTreeIndex::NodeRef CoverTreeIndex::add_node(BallId id, const FeatureVector& point, int level) {
  const auto ref = static_cast<NodeRef>(nodes_.size());
  nodes_.push_back(Node{point, id, level, 0.0, true, {}});
  slot_[id] = ref;
  ++live_;
  return ref;
}

void CoverTreeIndex::insert(BallId id, const FeatureVector& center) {
  if (slot_.contains(id)) throw InvalidInput(fmt::format("duplicate ball id {}", to_integer(id)));
  if (!nodes_.empty() && center.size() != dim_) {
    throw InvalidInput(fmt::format("dimensionality mismatch: index holds {}, got {}", dim_, center.size()));
  }
  insert_point(id, center);
}

void CoverTreeIndex::insert_point(BallId id, const FeatureVector& point) {
  if (nodes_.empty()) {
    dim_ = point.size();
    add_node(id, point, 0);
    return;
  }

  double d = distance(nodes_[0].point, point);
  // Grow the root's covering radius until it reaches the new point. Raising a
  // level only loosens the covering constraint on existing children.
  while (cover_radius(nodes_[0].level) < d) ++nodes_[0].level;

  NodeRef current = 0;
  for (;;) {
    Node& node = nodes_[current];
    node.max_dist = std::max(node.max_dist, d);

    std::optional<NodeRef> next;
    double next_dist = std::numeric_limits<double>::infinity();
    for (NodeRef child : node.children) {
      const double dc = distance(nodes_[child].point, point);
      if (dc <= cover_radius(nodes_[child].level) && dc < next_dist) {
        next = child;
        next_dist = dc;
      }
    }
    if (!next) {
      const int level = node.level - 1;
      const NodeRef added = add_node(id, point, level);
      nodes_[current].children.push_back(added);
      return;
    }
    current = *next;
    d = next_dist;
  }
}

void CoverTreeIndex::remove(BallId id) {
  auto it = slot_.find(id);
  if (it == slot_.end()) throw InvalidInput(fmt::format("unknown ball id {}", to_integer(id)));
  nodes_[it->second].live = false;
  slot_.erase(it);
  --live_;
  if (live_ == 0) {
    clear();
  } else if (nodes_.size() > 2 * live_ + 32) {
    rebuild();
  }
}

void CoverTreeIndex::relocate(BallId id, const FeatureVector& center) {
  auto it = slot_.find(id);
  if (it == slot_.end()) throw InvalidInput(fmt::format("unknown ball id {}", to_integer(id)));
  if (center.size() != dim_) throw InvalidInput("dimensionality mismatch in relocate");
  if (nodes_[it->second].point == center) return;
  remove(id);
  insert_point(id, center);
}

std::optional<Neighbor> CoverTreeIndex::nearest(const FeatureVector& query) const {
  if (live_ == 0) return std::nullopt;
  if (query.size() != dim_) {
    throw InvalidInput(fmt::format("dimensionality mismatch: index holds {}, got {}", dim_, query.size()));
  }

  // Best-first descent ordered by a lower bound on the distance to anything
  // in a subtree. The slack absorbs rounding in the triangle inequality so
  // pruning never discards an exact (or tied) answer.
  struct Frontier {
    double lower;
    NodeRef node;
    bool operator>(const Frontier& o) const { return lower > o.lower; }
  };
  auto bound = [&](double d, NodeRef ref) {
    const double reach = nodes_[ref].max_dist;
    return d - reach - 1e-12 * (d + reach);
  };

  Neighbor best = worst_neighbor();
  const double d_root = distance(nodes_[0].point, query);
  if (nodes_[0].live) best = {nodes_[0].id, d_root};

  std::vector<Frontier> heap;
  heap.push_back({bound(d_root, 0), 0});
  while (!heap.empty()) {
    std::pop_heap(heap.begin(), heap.end(), std::greater<>{});
    const Frontier top = heap.back();
    heap.pop_back();
    if (top.lower > best.distance) break;
    for (NodeRef child : nodes_[top.node].children) {
      const Node& c = nodes_[child];
      const double dc = distance(c.point, query);
      if (c.live && better(dc, c.id, best)) best = {c.id, dc};
      if (c.children.empty()) continue;
      const double lower = bound(dc, child);
      if (lower > best.distance) continue;
      heap.push_back({lower, child});
      std::push_heap(heap.begin(), heap.end(), std::greater<>{});
    }
  }
  return best;
}

void CoverTreeIndex::rebuild() {
  std::vector<std::pair<BallId, FeatureVector>> live;
  live.reserve(live_);
  for (auto& node : nodes_) {
    if (node.live) live.emplace_back(node.id, std::move(node.point));
  }
  std::sort(live.begin(), live.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  clear();
  for (const auto& [id, point] : live) insert_point(id, point);
}

void CoverTreeIndex::clear() {
  nodes_.clear();
  slot_.clear();
  live_ = 0;
  dim_ = 0;
}

std::unique_ptr<NearestIndex> CoverTreeIndex::clone() const { return std::make_unique<CoverTreeIndex>(*this); }

}  // namespace fiver
