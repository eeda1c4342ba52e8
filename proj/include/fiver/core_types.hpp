#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fiver {

/// Thrown when a caller hands in malformed input (bad dimensionality,
/// unknown handle, invalid configuration).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when data read from disk or from the label oracle is unusable.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point in the d-dimensional descriptor space. Coordinates are always
/// finite; construction rejects NaN and infinities.
class FeatureVector {
 public:
  FeatureVector() = default;
  explicit FeatureVector(std::vector<double> coords);
  FeatureVector(std::initializer_list<double> coords);

  std::size_t size() const noexcept { return coords_.size(); }
  bool empty() const noexcept { return coords_.empty(); }
  std::span<const double> coords() const noexcept { return coords_; }
  double operator[](std::size_t i) const noexcept { return coords_[i]; }

  // c += (target - c) / count: folds `target` into a running mean that
  // already averages count - 1 samples.
  void move_towards(const FeatureVector& target, double count);

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

 private:
  std::vector<double> coords_;
};

/// Euclidean distance. Throws InvalidInput on dimensionality mismatch.
double distance(const FeatureVector& a, const FeatureVector& b);

/// Class labels are opaque tokens on the outside and dense ids inside.
using ClassLabel = std::string;
using LabelId = std::uint32_t;

/// Bidirectional label <-> dense id table. Ids are assigned in arrival
/// order and never reused; the table only grows.
class LabelTable {
 public:
  LabelId intern(std::string_view label);
  std::optional<LabelId> find(std::string_view label) const;
  const ClassLabel& name(LabelId id) const;
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<ClassLabel>& names() const noexcept { return names_; }

  friend bool operator==(const LabelTable& a, const LabelTable& b) { return a.names_ == b.names_; }

 private:
  std::vector<ClassLabel> names_;
  std::unordered_map<std::string, LabelId> ids_;
};

/// One video (or any bag of local descriptors): the unit of prediction and
/// annotation.
struct VideoBag {
  std::string id;
  std::vector<FeatureVector> descriptors;
  std::optional<ClassLabel> true_label;

  friend bool operator==(const VideoBag&, const VideoBag&) = default;
};

/// Checks the VideoBag invariants: nonempty, one shared dimensionality, and
/// (when `dim` is given) that dimensionality equals `dim`.
void validate_bag(const VideoBag& bag, std::optional<std::size_t> dim = std::nullopt);

/// Ball handles. Allocated monotonically by the model and never reused, so
/// the smallest id is also the oldest ball.
enum class BallId : std::uint64_t {};

constexpr std::uint64_t to_integer(BallId id) noexcept { return static_cast<std::uint64_t>(id); }

}  // namespace fiver
