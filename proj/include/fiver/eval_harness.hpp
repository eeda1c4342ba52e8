#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fiver/active_learning.hpp"
#include "fiver/core_types.hpp"
#include "fiver/cover_model.hpp"

namespace fiver {

enum class Split { Train, Test, Stream };

std::string_view to_string(Split s);
Split parse_split(std::string_view s);

/// Labeled bags plus their split tags (parallel vectors).
struct Dataset {
  std::size_t dim = 0;
  std::vector<VideoBag> bags;
  std::vector<Split> splits;

  std::vector<VideoBag> select(Split split) const;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// ---------------------------------------------------------------------------
// Synthetic data

/// Gaussian-mixture bag generator. Each bag draws one class uniformly among
/// the classes active at its position and then `min..max` i.i.d. descriptors
/// from that class's isotropic Gaussian.
struct SyntheticSpec {
  std::size_t classes = 3;
  /// 0 means "same as classes".
  std::size_t dim = 0;
  std::size_t bags = 600;
  std::size_t min_descriptors = 5;
  std::size_t max_descriptors = 5;
  /// Pairwise distance between class means (when `means` is empty).
  double separation = 10.0;
  double sigma = 1.0;
  /// Explicit class means; overrides the separation layout.
  std::vector<std::vector<double>> means;
  /// From this bag index on, every mean is translated by drift_shift along
  /// the first axis.
  std::optional<std::size_t> drift_at;
  double drift_shift = 20.0;
  /// The last class first appears at this bag index.
  std::optional<std::size_t> novel_class_at;
};

/// Label token used by the generator for class k.
std::string synthetic_label(std::size_t k);

/// Class means implied by `spec` (before any drift). With dim >= classes the
/// means sit on a regular simplex; otherwise on a circle (dim >= 2) or a line.
std::vector<std::vector<double>> class_means(const SyntheticSpec& spec);

/// Throws InvalidInput on degenerate parameters (sigma <= 0, no classes, ...).
Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// A continuous frame stream made of consecutive actions.
struct FrameSequence {
  std::vector<FeatureVector> frames;
  /// One label per action, in temporal order.
  std::vector<ClassLabel> truth;
  /// Frame indices where actions 2..n start.
  std::vector<std::size_t> boundaries;
};

/// Concatenates `lengths[k]` frames of class `actions[k]` for each k.
FrameSequence generate_sequence(const SyntheticSpec& spec, std::span<const std::size_t> actions,
                                std::span<const std::size_t> lengths, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Experiment plans

enum class Mode { Batch, Stream };

struct ExperimentPlan {
  std::filesystem::path dataset;
  Mode mode = Mode::Stream;
  std::vector<Variant> variants;
  std::vector<double> budgets;
  std::vector<std::uint64_t> seeds;
  std::optional<std::size_t> folds;
  std::size_t max_balls = 5000;
  double tau = 0.01;
  /// Stream mode: permute bag order per seed. Off for ordered (drifting) data.
  bool shuffle = true;
};

/// The budget grid {.05, .1, ..., .5, .75, 1}.
std::vector<double> default_budget_grid();

/// Plain-text key = value plan. Keys: version, mode, variants, budgets,
/// seeds, folds, max_balls, tau, dataset, shuffle. Relative dataset paths
/// resolve against `base_dir`. Throws DataError with the offending line.
ExperimentPlan parse_plan(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentPlan load_plan(const std::filesystem::path& path);
/// Throws InvalidInput if the plan is unusable for its mode.
void validate_plan(const ExperimentPlan& plan);

// ---------------------------------------------------------------------------
// Streaming protocol

struct StreamSettings {
  Variant variant = Variant::VarUn;
  double budget = 1.0;
  double tau = 0.01;
  std::size_t max_balls = 5000;  // used by VarUnFix only
  std::uint64_t seed = 0;
  bool keep_log = false;
};

struct StreamRun {
  Variant variant{};
  double budget = 0.0;
  std::uint64_t seed = 0;
  double query_rate = 0.0;
  double accuracy = 0.0;
  std::size_t balls = 0;
  std::vector<StepRecord> log;
};

struct CurvePoint {
  Variant variant{};
  double budget = 0.0;
  double query_rate_mean = 0.0;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
};

struct StreamExperiment {
  std::vector<StreamRun> runs;
  std::vector<CurvePoint> curve;
};

/// Seed-derived sub-streams: 0 = permutation, 1 = model sampler, 2 = Rnd.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed);

/// Runs the prequential loop over `bags` in the given order with a fresh model.
StreamRun run_stream(std::span<const VideoBag> bags, const StreamSettings& settings);

/// Every (variant, budget, seed) cell, then mean/stddev over seeds.
StreamExperiment run_stream_experiment(const ExperimentPlan& plan, const Dataset& data, bool keep_logs = false);

/// Results CSV: variant, budget, realized_query_rate_mean,
/// online_accuracy_mean, online_accuracy_std.
void write_curve_csv(std::ostream& out, std::span<const CurvePoint> curve);

// ---------------------------------------------------------------------------
// Batch protocol

/// Learns every bag in order with its stored label.
CoverModel train_full(std::span<const VideoBag> bags, const ModelConfig& config = {});

/// Fraction of bags whose prediction equals the stored label.
double evaluate(const CoverModel& model, std::span<const VideoBag> bags);

struct FoldResult {
  std::uint64_t seed = 0;
  std::size_t fold = 0;
  std::size_t test_bags = 0;
  double accuracy = 0.0;
};

struct BatchExperiment {
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
};

/// K-fold over all bags when plan.folds is set, otherwise the train/test
/// split tags. Each seed reshuffles the training order (and fold assignment).
BatchExperiment run_batch_experiment(const ExperimentPlan& plan, const Dataset& data);

void write_batch_csv(std::ostream& out, const BatchExperiment& result);

}  // namespace fiver
