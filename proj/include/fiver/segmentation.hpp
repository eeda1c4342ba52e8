#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fiver/core_types.hpp"
#include "fiver/cover_model.hpp"

namespace fiver {

struct SegmentationConfig {
  /// Trailing window of frames scored together.
  std::size_t window = 15;
  /// Width of the centered moving average applied to the stddev series.
  std::size_t smooth_window = 9;
  /// A boundary must lie below mean - prominence * std of the smoothed series.
  double prominence = 0.5;
  /// ...and at least this fraction below the highest smoothed value within
  /// `window` frames on either side.
  double min_relative_depth = 0.1;
  /// Candidate minima closer than this keep only the deepest one.
  /// 0 means "use window".
  std::size_t min_separation = 0;
};

struct FrameScoreSeries {
  /// Per frame, normalized class probabilities (indexed by LabelId).
  std::vector<std::vector<double>> probabilities;
  /// Per frame, population standard deviation of those probabilities.
  std::vector<double> stddev;
  /// Centered moving average of stddev.
  std::vector<double> smoothed;
};

/// Scores each frame f over frames [max(0, f - W + 1), f].
/// Throws InvalidInput on an empty frame list or an empty model.
FrameScoreSeries frame_scores(const CoverModel& model, std::span<const FeatureVector> frames,
                              const SegmentationConfig& config = {});

/// Centered moving average of width `width` (truncated at the ends).
std::vector<double> moving_average(std::span<const double> xs, std::size_t width);

/// Frame indices at which a new segment starts.
std::vector<std::size_t> detect_boundaries(const FrameScoreSeries& series, const SegmentationConfig& config = {});

struct SegmentHypothesis {
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  std::optional<ClassLabel> label;  // empty = Unknown (supervision request)
  double confidence = 0.0;
};

/// Splits the frames at the detected boundaries and labels every span from
/// all of its frames. Spans whose confidence is below `gate` become Unknown.
std::vector<SegmentHypothesis> detect_segments(const CoverModel& model, std::span<const FeatureVector> frames,
                                               const FrameScoreSeries& series, double gate,
                                               const SegmentationConfig& config = {});

/// Token standing in for Unknown segments when they are scored as rejections.
inline constexpr std::string_view kUnknownToken = "<unknown>";

/// How Unknown segments enter the evaluated symbol sequence.
enum class UnknownPolicy {
  Drop,       // dropped, so an Unknown over a true action counts as a deletion
  Rejection,  // kept as kUnknownToken; matches held-out truth labels
};

/// Predicted symbol sequence: adjacent equal symbols are merged.
std::vector<std::string> segment_symbols(std::span<const SegmentHypothesis> segments,
                                         UnknownPolicy policy = UnknownPolicy::Drop);

/// Truth sequence with every held-out label replaced by kUnknownToken.
std::vector<std::string> mask_heldout(std::span<const std::string> truth, const std::set<std::string>& heldout);

/// Unit-cost edit distance.
std::size_t edit_distance(std::span<const std::string> a, std::span<const std::string> b);

/// (S + D + I) / N with N = |truth|. Throws InvalidInput on empty truth.
double levenshtein_error(std::span<const std::string> predicted, std::span<const std::string> truth);

}  // namespace fiver
