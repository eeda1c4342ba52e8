#include "fiver/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace fiver {

namespace {

double population_std(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / n);
}

}  // namespace

std::vector<double> moving_average(std::span<const double> xs, std::size_t width) {
  if (width == 0) throw InvalidInput("smoothing width must be positive");
  const std::size_t half = width / 2;
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(xs.size(), i + (width - half));
    double sum = 0.0;
    for (std::size_t j = lo; j < hi; ++j) sum += xs[j];
    out[i] = sum / static_cast<double>(hi - lo);
  }
  return out;
}

FrameScoreSeries frame_scores(const CoverModel& model, std::span<const FeatureVector> frames,
                              const SegmentationConfig& config) {
  if (frames.empty()) throw InvalidInput("cannot score an empty frame list");
  if (model.empty()) throw InvalidInput("cannot score frames with an empty model");
  if (config.window == 0) throw InvalidInput("scoring window must be positive");

  FrameScoreSeries series;
  series.probabilities.reserve(frames.size());
  series.stddev.reserve(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const std::size_t lo = f + 1 >= config.window ? f + 1 - config.window : 0;
    const BagPrediction p = model.predict(frames.subspan(lo, f + 1 - lo));
    series.stddev.push_back(population_std(p.posterior));
    series.probabilities.push_back(p.posterior);
  }
  series.smoothed = moving_average(series.stddev, config.smooth_window);
  return series;
}

std::vector<std::size_t> detect_boundaries(const FrameScoreSeries& series, const SegmentationConfig& config) {
  const auto& s = series.smoothed;
  if (s.size() < 3) return {};

  const double n = static_cast<double>(s.size());
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
  const double threshold = mean - config.prominence * population_std(s);
  const std::size_t reach = config.window;

  std::vector<std::size_t> candidates;
  for (std::size_t f = 1; f + 1 < s.size(); ++f) {
    if (!(s[f] < s[f - 1] && s[f] < s[f + 1] && s[f] < threshold)) continue;
    const std::size_t lo = f >= reach ? f - reach : 0;
    const std::size_t hi = std::min(s.size(), f + reach + 1);
    const double peak = *std::max_element(s.begin() + static_cast<std::ptrdiff_t>(lo),
                                          s.begin() + static_cast<std::ptrdiff_t>(hi));
    if (s[f] <= (1.0 - config.min_relative_depth) * peak) candidates.push_back(f);
  }

  // Deepest minima first; drop any candidate too close to an accepted one.
  std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });
  const std::size_t gap = config.min_separation == 0 ? config.window : config.min_separation;
  std::vector<std::size_t> accepted;
  for (std::size_t c : candidates) {
    const bool clear = std::none_of(accepted.begin(), accepted.end(), [&](std::size_t a) {
      return (a > c ? a - c : c - a) < gap;
    });
    if (clear) accepted.push_back(c);
  }
  std::sort(accepted.begin(), accepted.end());
  return accepted;
}

std::vector<SegmentHypothesis> detect_segments(const CoverModel& model, std::span<const FeatureVector> frames,
                                               const FrameScoreSeries& series, double gate,
                                               const SegmentationConfig& config) {
  if (frames.empty() || series.smoothed.size() != frames.size()) {
    throw InvalidInput("frame series does not match the frames");
  }
  std::vector<std::size_t> cuts = detect_boundaries(series, config);
  cuts.insert(cuts.begin(), 0);
  cuts.push_back(frames.size());

  std::vector<SegmentHypothesis> segments;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    SegmentHypothesis seg;
    seg.start = cuts[k];
    seg.end = cuts[k + 1];
    const BagPrediction p = model.predict(frames.subspan(seg.start, seg.end - seg.start));
    seg.confidence = p.top_confidence;
    if (p.predicted && p.top_confidence >= gate) seg.label = model.labels().name(*p.predicted);
    segments.push_back(std::move(seg));
  }
  return segments;
}

std::vector<std::string> segment_symbols(std::span<const SegmentHypothesis> segments, UnknownPolicy policy) {
  std::vector<std::string> out;
  for (const auto& seg : segments) {
    std::string symbol;
    if (seg.label) {
      symbol = *seg.label;
    } else if (policy == UnknownPolicy::Rejection) {
      symbol = kUnknownToken;
    } else {
      continue;
    }
    if (out.empty() || out.back() != symbol) out.push_back(std::move(symbol));
  }
  return out;
}

std::vector<std::string> mask_heldout(std::span<const std::string> truth, const std::set<std::string>& heldout) {
  std::vector<std::string> out(truth.begin(), truth.end());
  for (auto& t : out) {
    if (heldout.contains(t)) t = kUnknownToken;
  }
  return out;
}

std::size_t edit_distance(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double levenshtein_error(std::span<const std::string> predicted, std::span<const std::string> truth) {
  if (truth.empty()) throw InvalidInput("ground-truth sequence is empty");
  return static_cast<double>(edit_distance(predicted, truth)) / static_cast<double>(truth.size());
}

}  // namespace fiver
