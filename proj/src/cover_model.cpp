#include "fiver/cover_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace fiver {

namespace {

// Labels whose accumulated log score lies within this relative band of the
// maximum are treated as tied; the smallest id then wins. Distinct integer
// count products that are this close cannot be separated reliably after
// summing rounded logarithms in different orders.
constexpr double kTieBand = 1e-12;

void check_config(const ModelConfig& config) {
  if (config.max_balls && *config.max_balls == 0) throw InvalidInput("max_balls must be positive");
  if (!(config.smoothing > 0.0) || !std::isfinite(config.smoothing)) {
    throw InvalidInput("smoothing must be a positive finite number");
  }
}

}  // namespace

double decayed_radius(double initial_radius, std::uint64_t mistakes) {
  if (mistakes <= 1) return initial_radius;
  return initial_radius * std::pow(static_cast<double>(mistakes), -0.25);
}

CoverModel::CoverModel(ModelConfig config)
    : config_(config), index_(make_index(config.index)), rng_(config.seed) {
  check_config(config_);
}

CoverModel::CoverModel(const CoverModel& other)
    : config_(other.config_),
      labels_(other.labels_),
      balls_(other.balls_),
      slot_(other.slot_),
      index_(other.index_->clone()),
      pending_first_(other.pending_first_),
      dim_(other.dim_),
      next_id_(other.next_id_),
      rng_(other.rng_) {}

CoverModel& CoverModel::operator=(const CoverModel& other) {
  if (this != &other) {
    CoverModel copy(other);
    *this = std::move(copy);
  }
  return *this;
}

const Ball& CoverModel::ball(BallId id) const {
  auto it = slot_.find(id);
  if (it == slot_.end()) throw InvalidInput(fmt::format("unknown ball id {}", to_integer(id)));
  return balls_[it->second];
}

double CoverModel::class_posterior(const Ball& ball, LabelId y) {
  if (ball.total == 0) return 0.0;
  return static_cast<double>(ball.count(y)) / static_cast<double>(ball.total);
}

double CoverModel::smoothed_posterior(const Ball& ball, LabelId y) const {
  const double a = config_.smoothing;
  const double classes = static_cast<double>(labels_.size());
  return (static_cast<double>(ball.count(y)) + a) / (static_cast<double>(ball.total) + a * classes);
}

LabelId CoverModel::majority(const Ball& ball) {
  LabelId best = 0;
  std::uint64_t best_count = 0;
  for (std::size_t y = 0; y < ball.class_counts.size(); ++y) {
    if (ball.class_counts[y] > best_count) {
      best_count = ball.class_counts[y];
      best = static_cast<LabelId>(y);
    }
  }
  return best;
}

UpdateReport CoverModel::learn_bag(const VideoBag& bag, std::string_view label) {
  validate_bag(bag, dim_);
  const LabelId y = labels_.intern(label);
  if (!dim_) dim_ = bag.descriptors.front().size();

  UpdateReport report;
  for (const auto& x : bag.descriptors) learn_descriptor(x, y, report);
  if (config_.max_balls) report.evicted = evict_to(*config_.max_balls);
  return report;
}

void CoverModel::learn_descriptor(const FeatureVector& x, LabelId y, UpdateReport& report) {
  if (balls_.empty()) {
    // Cold start: the first sample only serves to measure the first radius.
    if (!pending_first_) {
      pending_first_ = x;
      return;
    }
    const double r = distance(*pending_first_, x);
    if (r == 0.0) return;  // a zero-radius ball could never be reached
    create_ball(x, r, y);
    pending_first_.reset();
    ++report.balls_created;
    return;
  }

  const Neighbor nn = *index_->nearest(x);
  if (nn.distance > ball(nn.id).radius) {
    create_ball(x, nn.distance, y);
    ++report.balls_created;
    return;
  }

  Ball& b = balls_[slot_.at(nn.id)];
  if (majority(b) != y) {
    ++b.mistakes;
    b.radius = decayed_radius(b.initial_radius, b.mistakes);
    ++report.mistakes;
  } else {
    ++b.center_count;
    b.center.move_towards(x, static_cast<double>(b.center_count));
    index_->relocate(b.id, b.center);
    ++report.center_updates;
  }
  if (b.class_counts.size() <= y) b.class_counts.resize(y + 1, 0);
  ++b.class_counts[y];
  ++b.total;
}

BallId CoverModel::create_ball(const FeatureVector& center, double radius, LabelId y) {
  Ball b;
  b.id = BallId{next_id_++};
  b.center = center;
  b.initial_radius = radius;
  b.radius = radius;
  b.class_counts.assign(y + 1, 0);
  b.class_counts[y] = 1;
  b.total = 1;
  b.center_count = 1;
  index_->insert(b.id, b.center);
  slot_.emplace(b.id, balls_.size());
  balls_.push_back(std::move(b));
  return balls_.back().id;
}

void CoverModel::remove_ball(BallId id) {
  auto it = slot_.find(id);
  if (it == slot_.end()) throw InvalidInput(fmt::format("unknown ball id {}", to_integer(id)));
  const std::size_t pos = it->second;
  slot_.erase(it);
  index_->remove(id);
  if (pos + 1 != balls_.size()) {
    balls_[pos] = std::move(balls_.back());
    slot_[balls_[pos].id] = pos;
  }
  balls_.pop_back();
}

BallId CoverModel::evict() {
  if (balls_.empty()) throw InvalidInput("cannot evict from an empty model");
  std::uint64_t weight = 0;
  for (const auto& b : balls_) weight += b.mistakes + 1;
  std::uniform_int_distribution<std::uint64_t> draw(0, weight - 1);
  std::uint64_t r = draw(rng_);
  for (const auto& b : balls_) {
    const std::uint64_t w = b.mistakes + 1;
    if (r < w) {
      const BallId id = b.id;
      remove_ball(id);
      return id;
    }
    r -= w;
  }
  throw std::logic_error("eviction sampler fell off the end");
}

std::vector<BallId> CoverModel::evict_to(std::size_t cap) {
  std::vector<BallId> evicted;
  while (balls_.size() > cap) evicted.push_back(evict());
  return evicted;
}

BagPrediction CoverModel::predict_bag(const VideoBag& bag) const {
  validate_bag(bag, dim_);
  return predict(bag.descriptors);
}

BagPrediction CoverModel::predict(std::span<const FeatureVector> descriptors) const {
  if (descriptors.empty()) throw InvalidInput("cannot predict an empty bag");
  if (dim_) {
    for (const auto& x : descriptors) {
      if (x.size() != *dim_) {
        throw InvalidInput(fmt::format("dimensionality mismatch: model has {}, got {}", *dim_, x.size()));
      }
    }
  }

  BagPrediction out;
  if (balls_.empty()) return out;

  const std::size_t classes = labels_.size();
  out.log_scores.assign(classes, 0.0);
  out.confidences.assign(classes, 0.0);
  const double a = config_.smoothing;

  for (const auto& x : descriptors) {
    const Neighbor nn = *index_->nearest(x);
    const Ball& b = balls_[slot_.at(nn.id)];
    const double scaled = nn.distance / b.radius;
    const double w = std::exp(-0.5 * scaled * scaled);
    const double denom = static_cast<double>(b.total) + a * static_cast<double>(classes);
    for (std::size_t y = 0; y < classes; ++y) {
      const double lp = std::log((static_cast<double>(b.count(static_cast<LabelId>(y))) + a) / denom);
      out.log_scores[y] += lp;
      out.confidences[y] += w * lp;
    }
  }
  const double t = static_cast<double>(descriptors.size());
  for (auto& c : out.confidences) c /= t;

  const double top = *std::max_element(out.log_scores.begin(), out.log_scores.end());
  const double band = kTieBand * std::max(1.0, std::abs(top));
  for (std::size_t y = 0; y < classes; ++y) {
    if (out.log_scores[y] >= top - band) {
      out.predicted = static_cast<LabelId>(y);
      break;
    }
  }

  const double cmax = *std::max_element(out.confidences.begin(), out.confidences.end());
  double norm = 0.0;
  out.posterior.resize(classes);
  for (std::size_t y = 0; y < classes; ++y) {
    out.posterior[y] = std::exp(out.confidences[y] - cmax);
    norm += out.posterior[y];
  }
  for (auto& p : out.posterior) p /= norm;

  out.top_confidence = config_.confidence == ConfidenceMode::Normalized
                           ? out.posterior[*out.predicted]
                           : std::exp(out.confidences[*out.predicted]);
  return out;
}

}  // namespace fiver
