#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "fiver/core_types.hpp"
#include "fiver/nn_index.hpp"

namespace fiver {

/// One element of the cover: a ball with local class statistics.
///
/// `radius` always equals `initial_radius * max(mistakes, 1)^(-1/4)`.
/// `class_counts[y]` is indexed by LabelId and may be shorter than the label
/// table (missing entries are zero). `center_count` counts the samples
/// averaged into the center; it only grows on correct local predictions, so it
/// is kept apart from `total`.
struct Ball {
  BallId id{};
  FeatureVector center;
  double initial_radius = 0.0;
  double radius = 0.0;
  std::uint64_t mistakes = 0;
  std::vector<std::uint64_t> class_counts;
  std::uint64_t total = 0;
  std::uint64_t center_count = 0;

  std::uint64_t count(LabelId y) const { return y < class_counts.size() ? class_counts[y] : 0; }

  friend bool operator==(const Ball&, const Ball&) = default;
};

/// Radius after `mistakes` errors for a ball created with `initial_radius`.
double decayed_radius(double initial_radius, std::uint64_t mistakes);

/// Which quantity drives the active-learning threshold.
enum class ConfidenceMode {
  Normalized,  // exp(C(y_hat)) / sum_y exp(C(y))
  Raw,         // exp(C(y_hat))
};

struct ModelConfig {
  /// Ball cap enforced at the end of every learn_bag. Unlimited when empty.
  std::optional<std::size_t> max_balls;
  /// Additive smoothing used for prediction and confidence.
  double smoothing = 1.0;
  ConfidenceMode confidence = ConfidenceMode::Normalized;
  IndexKind index = IndexKind::CoverTree;
  /// Seeds the eviction sampler.
  std::uint64_t seed = 0;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct UpdateReport {
  std::size_t balls_created = 0;
  std::size_t mistakes = 0;
  std::size_t center_updates = 0;
  std::vector<BallId> evicted;
};

struct BagPrediction {
  /// Empty means Unknown (the model has no balls yet).
  std::optional<LabelId> predicted;
  /// Per label: sum over descriptors of the log smoothed posterior.
  std::vector<double> log_scores;
  /// Per label: distance-weighted mean log posterior C(y), always <= 0.
  std::vector<double> confidences;
  /// Per label: exp(C(y)) / sum exp(C(y')), sums to one.
  std::vector<double> posterior;
  /// Confidence of the predicted label in (0, 1]; 0 for Unknown.
  double top_confidence = 0.0;
};

/// Incremental ball-cover classifier over bags of descriptors.
///
/// One writer at a time; `predict*` are const and may run concurrently with
/// each other but not with `learn_bag`/`evict`.
class CoverModel {
 public:
  explicit CoverModel(ModelConfig config = {});
  CoverModel(const CoverModel& other);
  CoverModel& operator=(const CoverModel& other);
  CoverModel(CoverModel&&) noexcept = default;
  CoverModel& operator=(CoverModel&&) noexcept = default;
  ~CoverModel() = default;

  /// Feeds every descriptor of `bag` with label `label`, then evicts balls
  /// until the cap holds. The model is left untouched if the bag is invalid.
  UpdateReport learn_bag(const VideoBag& bag, std::string_view label);

  BagPrediction predict_bag(const VideoBag& bag) const;
  BagPrediction predict(std::span<const FeatureVector> descriptors) const;

  /// Removes one ball sampled with probability (m_s + 1) / (sum_r m_r + |S|).
  /// Throws InvalidInput on an empty model.
  BallId evict();
  /// Evicts until at most `cap` balls remain.
  std::vector<BallId> evict_to(std::size_t cap);

  /// Raw local estimate n_s(y) / n_s.
  static double class_posterior(const Ball& ball, LabelId y);
  /// (n_s(y) + a) / (n_s + a |Y|) over the current label table.
  double smoothed_posterior(const Ball& ball, LabelId y) const;

  const ModelConfig& config() const noexcept { return config_; }
  const LabelTable& labels() const noexcept { return labels_; }
  const std::vector<Ball>& balls() const noexcept { return balls_; }
  const Ball& ball(BallId id) const;
  std::size_t size() const noexcept { return balls_.size(); }
  bool empty() const noexcept { return balls_.empty(); }
  std::optional<std::size_t> dim() const noexcept { return dim_; }
  const std::optional<FeatureVector>& pending_first() const noexcept { return pending_first_; }
  const NearestIndex& index() const noexcept { return *index_; }

  /// Versioned text snapshot of every field, including the sampler state.
  /// Round-trips bit-exactly through load().
  void save(std::ostream& out) const;
  static CoverModel load(std::istream& in);

 private:
  void learn_descriptor(const FeatureVector& x, LabelId y, UpdateReport& report);
  BallId create_ball(const FeatureVector& center, double radius, LabelId y);
  void remove_ball(BallId id);
  static LabelId majority(const Ball& ball);

  ModelConfig config_;
  LabelTable labels_;
  std::vector<Ball> balls_;
  std::unordered_map<BallId, std::size_t> slot_;
  std::unique_ptr<NearestIndex> index_;
  std::optional<FeatureVector> pending_first_;
  std::optional<std::size_t> dim_;
  std::uint64_t next_id_ = 0;
  std::mt19937_64 rng_;
};

}  // namespace fiver
