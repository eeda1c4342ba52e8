#include "fiver/core_types.hpp"

#include <cmath>

#include <fmt/format.h>

namespace fiver {

namespace {

void check_finite(const std::vector<double>& coords) {
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!std::isfinite(coords[i])) {
      throw InvalidInput(fmt::format("feature coordinate {} is not finite", i));
    }
  }
}

}  // namespace

FeatureVector::FeatureVector(std::vector<double> coords) : coords_(std::move(coords)) {
  check_finite(coords_);
}

FeatureVector::FeatureVector(std::initializer_list<double> coords) : coords_(coords) {
  check_finite(coords_);
}

void FeatureVector::move_towards(const FeatureVector& target, double count) {
  if (target.size() != size()) {
    throw InvalidInput(fmt::format("dimensionality mismatch: {} vs {}", size(), target.size()));
  }
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    coords_[i] += (target.coords_[i] - coords_[i]) / count;
  }
}

double distance(const FeatureVector& a, const FeatureVector& b) {
  if (a.size() != b.size()) {
    throw InvalidInput(fmt::format("dimensionality mismatch: {} vs {}", a.size(), b.size()));
  }
  const auto x = a.coords();
  const auto y = b.coords();
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

LabelId LabelTable::intern(std::string_view label) {
  if (label.empty()) throw InvalidInput("empty class label");
  for (char c : label) {
    if (static_cast<unsigned char>(c) < 0x20) throw InvalidInput("class label contains a control character");
  }
  if (auto it = ids_.find(std::string(label)); it != ids_.end()) return it->second;
  const auto id = static_cast<LabelId>(names_.size());
  names_.emplace_back(label);
  ids_.emplace(names_.back(), id);
  return id;
}

std::optional<LabelId> LabelTable::find(std::string_view label) const {
  if (auto it = ids_.find(std::string(label)); it != ids_.end()) return it->second;
  return std::nullopt;
}

const ClassLabel& LabelTable::name(LabelId id) const {
  if (id >= names_.size()) throw InvalidInput(fmt::format("unknown label id {}", id));
  return names_[id];
}

void validate_bag(const VideoBag& bag, std::optional<std::size_t> dim) {
  if (bag.descriptors.empty()) {
    throw InvalidInput(fmt::format("bag '{}' has no descriptors", bag.id));
  }
  const std::size_t d = dim.value_or(bag.descriptors.front().size());
  if (d == 0) throw InvalidInput(fmt::format("bag '{}' has zero-length descriptors", bag.id));
  for (std::size_t t = 0; t < bag.descriptors.size(); ++t) {
    if (bag.descriptors[t].size() != d) {
      throw InvalidInput(fmt::format("bag '{}': descriptor {} has dimension {}, expected {}", bag.id, t,
                                     bag.descriptors[t].size(), d));
    }
  }
}

}  // namespace fiver
