#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "fiver/eval_harness.hpp"

namespace fiver {

namespace {

std::size_t effective_dim(const SyntheticSpec& spec) {
  if (!spec.means.empty()) return spec.means.front().size();
  return spec.dim == 0 ? spec.classes : spec.dim;
}

void check_spec(const SyntheticSpec& spec) {
  if (spec.classes == 0) throw InvalidInput("synthetic data needs at least one class");
  if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma)) {
    throw InvalidInput(fmt::format("degenerate covariance: sigma = {}", spec.sigma));
  }
  if (spec.min_descriptors == 0 || spec.min_descriptors > spec.max_descriptors) {
    throw InvalidInput("descriptor count range must satisfy 1 <= min <= max");
  }
  if (!spec.means.empty()) {
    if (spec.means.size() != spec.classes) throw InvalidInput("one explicit mean per class required");
    for (const auto& m : spec.means) {
      if (m.size() != spec.means.front().size() || m.empty()) throw InvalidInput("explicit means differ in dimension");
    }
  }
  if (effective_dim(spec) == 0) throw InvalidInput("synthetic dimension must be positive");
  if (spec.novel_class_at && spec.classes < 2) throw InvalidInput("a novel class needs at least two classes");
}

FeatureVector sample_point(const std::vector<double>& mean, double shift, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<double> x(mean.size());
  for (std::size_t j = 0; j < mean.size(); ++j) x[j] = mean[j] + noise(rng);
  x[0] += shift;
  return FeatureVector(std::move(x));
}

}  // namespace

std::string synthetic_label(std::size_t k) { return fmt::format("c{}", k); }

std::vector<std::vector<double>> class_means(const SyntheticSpec& spec) {
  check_spec(spec);
  if (!spec.means.empty()) return spec.means;
  const std::size_t dim = effective_dim(spec);
  const std::size_t c = spec.classes;
  std::vector<std::vector<double>> means(c, std::vector<double>(dim, 0.0));
  if (dim >= c) {
    const double scale = spec.separation / std::numbers::sqrt2;
    for (std::size_t k = 0; k < c; ++k) means[k][k] = scale;
  } else if (dim >= 2) {
    const double radius = spec.separation / (2.0 * std::sin(std::numbers::pi / static_cast<double>(c)));
    for (std::size_t k = 0; k < c; ++k) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(c);
      means[k][0] = radius * std::cos(angle);
      means[k][1] = radius * std::sin(angle);
    }
  } else {
    for (std::size_t k = 0; k < c; ++k) means[k][0] = spec.separation * static_cast<double>(k);
  }
  return means;
}

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  const auto means = class_means(spec);
  if (spec.bags == 0) throw InvalidInput("synthetic data needs at least one bag");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> bag_size(spec.min_descriptors, spec.max_descriptors);

  Dataset data;
  data.dim = means.front().size();
  data.bags.reserve(spec.bags);
  for (std::size_t i = 0; i < spec.bags; ++i) {
    const bool novel_active = !spec.novel_class_at || i >= *spec.novel_class_at;
    const std::size_t active = novel_active ? spec.classes : spec.classes - 1;
    const std::size_t k = std::uniform_int_distribution<std::size_t>(0, active - 1)(rng);
    const double shift = spec.drift_at && i >= *spec.drift_at ? spec.drift_shift : 0.0;

    VideoBag bag;
    bag.id = fmt::format("b{:05}", i);
    bag.true_label = synthetic_label(k);
    const std::size_t t = bag_size(rng);
    bag.descriptors.reserve(t);
    for (std::size_t j = 0; j < t; ++j) bag.descriptors.push_back(sample_point(means[k], shift, spec.sigma, rng));
    data.bags.push_back(std::move(bag));
    data.splits.push_back(Split::Stream);
  }
  return data;
}

FrameSequence generate_sequence(const SyntheticSpec& spec, std::span<const std::size_t> actions,
                                std::span<const std::size_t> lengths, std::uint64_t seed) {
  const auto means = class_means(spec);
  if (actions.empty() || actions.size() != lengths.size()) {
    throw InvalidInput("sequence needs one length per action");
  }
  std::mt19937_64 rng(seed);
  FrameSequence seq;
  for (std::size_t a = 0; a < actions.size(); ++a) {
    if (actions[a] >= spec.classes) throw InvalidInput(fmt::format("action class {} out of range", actions[a]));
    if (lengths[a] == 0) throw InvalidInput("action length must be positive");
    if (a > 0) seq.boundaries.push_back(seq.frames.size());
    seq.truth.push_back(synthetic_label(actions[a]));
    for (std::size_t f = 0; f < lengths[a]; ++f) seq.frames.push_back(sample_point(means[actions[a]], 0.0, spec.sigma, rng));
  }
  return seq;
}

}  // namespace fiver
