// fiver: command-line front end.
//
//   fiver synth   --classes 3 --bags 600 --seed 7 --out data/
//   fiver stream  --data data/manifest.txt --variant varun --budget 0.2 --out runs/
//   fiver batch   --data data/manifest.txt --folds 5 --seeds 10 --out runs/
//   fiver train   --data data/manifest.txt --out model.txt
//   fiver segment --model model.txt --sequence seq.csv --truth seq.labels
//   fiver inspect --model model.txt

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "fiver/active_learning.hpp"
#include "fiver/cover_model.hpp"
#include "fiver/eval_harness.hpp"
#include "fiver/ingest.hpp"
#include "fiver/segmentation.hpp"

namespace fs = std::filesystem;
using namespace fiver;

namespace {

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("{}: cannot write file", path.string()));
  return out;
}

std::vector<std::uint64_t> seed_list(const std::vector<std::uint64_t>& explicit_seeds, std::size_t count) {
  if (count == 0) return explicit_seeds.empty() ? std::vector<std::uint64_t>{1} : explicit_seeds;
  const std::uint64_t base = explicit_seeds.empty() ? 1 : explicit_seeds.front();
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < count; ++i) seeds.push_back(base + i);
  return seeds;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  SyntheticSpec spec;
  std::uint64_t seed = 1;
  std::size_t drift_at = 0;
  std::size_t novel_at = 0;
  std::size_t sequences = 0;
  std::size_t actions = 3;
  std::size_t action_length = 60;
  fs::path out;
};

int run_synth(const SynthArgs& a) {
  SyntheticSpec spec = a.spec;
  if (a.drift_at > 0) spec.drift_at = a.drift_at;
  if (a.novel_at > 0) spec.novel_class_at = a.novel_at;
  const Dataset data = generate_synthetic(spec, a.seed);
  write_dataset(data, a.out);

  for (std::size_t s = 0; s < a.sequences; ++s) {
    std::mt19937_64 rng(derive_seed(a.seed, 100 + s));
    std::vector<std::size_t> actions, lengths;
    for (std::size_t k = 0; k < a.actions; ++k) {
      std::size_t c = 0;
      do {
        c = std::uniform_int_distribution<std::size_t>(0, spec.classes - 1)(rng);
      } while (!actions.empty() && actions.back() == c && spec.classes > 1);
      actions.push_back(c);
      lengths.push_back(a.action_length);
    }
    const FrameSequence seq = generate_sequence(spec, actions, lengths, derive_seed(a.seed, 200 + s));
    const fs::path stem = a.out / "sequences" / fmt::format("seq_{:03}", s);
    write_feature_file(stem.string() + ".csv", seq.frames);
    write_label_sequence(stem.string() + ".labels", seq.truth);
  }
  fmt::print("wrote {} bags to {}\n", data.bags.size(), a.out.string());
  return 0;
}

// ---------------------------------------------------------------------------

struct ExperimentArgs {
  fs::path data;
  fs::path plan;
  std::vector<std::string> variants;
  std::vector<double> budgets;
  std::vector<std::uint64_t> seeds;
  std::size_t seed_count = 0;
  std::size_t max_balls = 5000;
  double tau = 0.01;
  std::size_t folds = 0;
  bool no_shuffle = false;
  bool no_logs = false;
  fs::path out = "fiver-out";
};

ExperimentPlan build_plan(const ExperimentArgs& a, const CLI::App& cmd, Mode mode) {
  ExperimentPlan plan;
  if (!a.plan.empty()) plan = load_plan(a.plan);
  plan.mode = mode;
  if (!a.data.empty()) plan.dataset = a.data;
  if (!a.variants.empty()) {
    plan.variants.clear();
    for (const auto& v : a.variants) plan.variants.push_back(parse_variant(v));
  }
  if (plan.variants.empty()) plan.variants = {Variant::VarUn};
  if (!a.budgets.empty()) plan.budgets = a.budgets;
  if (plan.budgets.empty()) plan.budgets = default_budget_grid();
  if (cmd.count("--seed") > 0 || a.seed_count > 0 || plan.seeds.empty()) plan.seeds = seed_list(a.seeds, a.seed_count);
  if (cmd.count("--max-balls") > 0 || a.plan.empty()) plan.max_balls = a.max_balls;
  if (cmd.count("--tau") > 0 || a.plan.empty()) plan.tau = a.tau;
  if (a.folds > 0) plan.folds = a.folds;
  if (a.no_shuffle) plan.shuffle = false;
  if (plan.dataset.empty()) throw InvalidInput("no dataset given (use --data or a plan file)");
  validate_plan(plan);
  return plan;
}

int run_stream_cmd(const ExperimentArgs& a, const CLI::App& cmd) {
  const ExperimentPlan plan = build_plan(a, cmd, Mode::Stream);
  const Dataset data = load_dataset(plan.dataset);
  const StreamExperiment result = run_stream_experiment(plan, data, !a.no_logs);

  auto curves = open_output(a.out / "curves.csv");
  write_curve_csv(curves, result.curve);
  if (!a.no_logs) {
    for (const auto& run : result.runs) {
      auto log = open_output(a.out / "steps" / fmt::format("{}_b{}_s{}.csv", to_string(run.variant), run.budget, run.seed));
      write_step_log(log, run.log);
    }
  }
  for (const auto& p : result.curve) {
    fmt::print("{:9} budget {:5} query rate {:.4f} accuracy {:.4f} +- {:.4f}\n", to_string(p.variant), p.budget,
               p.query_rate_mean, p.accuracy_mean, p.accuracy_std);
  }
  return 0;
}

int run_batch_cmd(const ExperimentArgs& a, const CLI::App& cmd) {
  const ExperimentPlan plan = build_plan(a, cmd, Mode::Batch);
  const Dataset data = load_dataset(plan.dataset);
  const BatchExperiment result = run_batch_experiment(plan, data);
  auto out = open_output(a.out / "batch.csv");
  write_batch_csv(out, result);
  fmt::print("{} evaluations, mean accuracy {:.4f} +- {:.4f}\n", result.folds.size(), result.mean_accuracy,
             result.std_accuracy);
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  fs::path data;
  std::string split = "train";
  std::uint64_t seed = 1;
  std::size_t max_balls = 0;
  bool shuffle = false;
  fs::path out;
};

int run_train(const TrainArgs& a) {
  const Dataset data = load_dataset(a.data);
  std::vector<VideoBag> bags;
  for (std::size_t i = 0; i < data.bags.size(); ++i) {
    if (a.split == "all" || to_string(data.splits[i]) == a.split) bags.push_back(data.bags[i]);
  }
  if (bags.empty()) throw InvalidInput(fmt::format("no bags tagged '{}'", a.split));
  if (a.shuffle) {
    std::vector<VideoBag> order;
    for (std::size_t i : permutation(bags.size(), derive_seed(a.seed, 0))) order.push_back(bags[i]);
    bags = std::move(order);
  }
  ModelConfig config;
  config.seed = derive_seed(a.seed, 1);
  if (a.max_balls > 0) config.max_balls = a.max_balls;
  const CoverModel model = train_full(bags, config);
  save_model(model, a.out);
  fmt::print("trained on {} bags: {} balls, {} classes\n", bags.size(), model.size(), model.labels().size());
  return 0;
}

// ---------------------------------------------------------------------------

struct SegmentArgs {
  fs::path model;
  fs::path sequence;
  fs::path truth;
  double gate = 0.5;
  SegmentationConfig config;
  std::vector<std::string> heldout;
  fs::path out;
};

int run_segment(const SegmentArgs& a) {
  const CoverModel model = load_model(a.model);
  const auto frames = read_feature_file(a.sequence, model.dim());
  const FrameScoreSeries series = frame_scores(model, frames, a.config);
  const auto segments = detect_segments(model, frames, series, a.gate, a.config);

  std::ostringstream table;
  table << "# fiver-segments 1\n";
  table << "start,end,label,confidence\n";
  for (const auto& s : segments) {
    table << fmt::format("{},{},{},{}\n", s.start, s.end, s.label.value_or(std::string(kUnknownToken)), s.confidence);
  }
  if (!a.out.empty()) {
    auto out = open_output(a.out);
    out << table.str();
  }
  std::cout << table.str();

  if (!a.truth.empty()) {
    const auto truth = read_label_sequence(a.truth);
    const bool rejection = !a.heldout.empty();
    const std::set<std::string> heldout(a.heldout.begin(), a.heldout.end());
    const auto predicted = segment_symbols(segments, rejection ? UnknownPolicy::Rejection : UnknownPolicy::Drop);
    const auto expected = rejection ? mask_heldout(truth, heldout) : truth;
    fmt::print("levenshtein error {:.4f}\n", levenshtein_error(predicted, expected));
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct InspectArgs {
  fs::path model;
  std::size_t bins = 10;
  fs::path out;
};

int run_inspect(const InspectArgs& a) {
  const CoverModel model = load_model(a.model);
  std::ostringstream report;
  report << "# fiver-inspect 1\n";
  report << fmt::format("balls {}\n", model.size());
  report << fmt::format("classes {}\n", model.labels().size());
  report << fmt::format("dim {}\n", model.dim() ? std::to_string(*model.dim()) : "none");

  std::uint64_t mistakes = 0;
  std::vector<std::uint64_t> per_class(model.labels().size(), 0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& b : model.balls()) {
    mistakes += b.mistakes;
    for (std::size_t y = 0; y < b.class_counts.size(); ++y) per_class[y] += b.class_counts[y];
    lo = std::min(lo, b.radius);
    hi = std::max(hi, b.radius);
  }
  report << fmt::format("mistakes {}\n", mistakes);
  report << "class_counts\n";
  for (std::size_t y = 0; y < per_class.size(); ++y) {
    report << fmt::format("  {} {}\n", model.labels().name(static_cast<LabelId>(y)), per_class[y]);
  }
  report << "radius_histogram\n";
  if (!model.empty() && a.bins > 0) {
    std::vector<std::size_t> counts(a.bins, 0);
    const double width = (hi - lo) / static_cast<double>(a.bins);
    for (const auto& b : model.balls()) {
      std::size_t k = width > 0.0 ? static_cast<std::size_t>((b.radius - lo) / width) : 0;
      counts[std::min(k, a.bins - 1)] += 1;
    }
    for (std::size_t k = 0; k < a.bins; ++k) {
      report << fmt::format("  [{:.6g}, {:.6g}) {}\n", lo + width * static_cast<double>(k),
                            lo + width * static_cast<double>(k + 1), counts[k]);
    }
  }
  if (!a.out.empty()) {
    auto out = open_output(a.out);
    out << report.str();
  }
  std::cout << report.str();
  return 0;
}

void add_experiment_options(CLI::App* cmd, ExperimentArgs& a) {
  cmd->add_option("--data", a.data, "dataset manifest");
  cmd->add_option("--plan", a.plan, "plan file (flags override its keys)");
  cmd->add_option("--variant", a.variants, "full, rnd, varun, varunfix (repeatable)");
  cmd->add_option("--budget", a.budgets, "query budgets in (0, 1] (repeatable; default: full grid)");
  cmd->add_option("--seed", a.seeds, "seeds (repeatable), or the first seed with --seeds");
  cmd->add_option("--seeds", a.seed_count, "number of consecutive seeds");
  cmd->add_option("--max-balls", a.max_balls, "ball cap for varunfix")->capture_default_str();
  cmd->add_option("--tau", a.tau, "threshold step")->capture_default_str();
  cmd->add_option("--out", a.out, "output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fiver: streaming ball-cover classification with budgeted active learning"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic Gaussian-mixture dataset");
  synth_cmd->add_option("--classes", synth.spec.classes)->capture_default_str();
  synth_cmd->add_option("--bags", synth.spec.bags)->capture_default_str();
  synth_cmd->add_option("--dim", synth.spec.dim, "0 = number of classes")->capture_default_str();
  synth_cmd->add_option("--descriptors", synth.spec.min_descriptors, "descriptors per bag (minimum)")
      ->capture_default_str();
  synth_cmd->add_option("--max-descriptors", synth.spec.max_descriptors)->capture_default_str();
  synth_cmd->add_option("--separation", synth.spec.separation)->capture_default_str();
  synth_cmd->add_option("--sigma", synth.spec.sigma)->capture_default_str();
  synth_cmd->add_option("--drift-at", synth.drift_at, "bag index of an abrupt mean shift (0 = none)");
  synth_cmd->add_option("--drift-shift", synth.spec.drift_shift)->capture_default_str();
  synth_cmd->add_option("--novel-at", synth.novel_at, "bag index where the last class appears (0 = none)");
  synth_cmd->add_option("--sequences", synth.sequences, "also write this many continuous frame sequences");
  synth_cmd->add_option("--actions", synth.actions, "actions per sequence")->capture_default_str();
  synth_cmd->add_option("--action-length", synth.action_length, "frames per action")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "output directory")->required();

  ExperimentArgs stream;
  auto* stream_cmd = app.add_subcommand("stream", "run the prequential streaming protocol");
  add_experiment_options(stream_cmd, stream);
  stream_cmd->add_flag("--no-shuffle", stream.no_shuffle, "keep the manifest order");
  stream_cmd->add_flag("--no-logs", stream.no_logs, "skip per-run step logs");

  ExperimentArgs batch;
  auto* batch_cmd = app.add_subcommand("batch", "train/test or K-fold evaluation");
  add_experiment_options(batch_cmd, batch);
  batch_cmd->add_option("--folds", batch.folds, "K for K-fold (default: use split tags)");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "train on labeled bags and write a model snapshot");
  train_cmd->add_option("--data", train.data, "dataset manifest")->required();
  train_cmd->add_option("--split", train.split, "train, test, stream or all")->capture_default_str();
  train_cmd->add_option("--seed", train.seed)->capture_default_str();
  train_cmd->add_option("--max-balls", train.max_balls, "ball cap (0 = unlimited)");
  train_cmd->add_flag("--shuffle", train.shuffle, "permute training order by seed");
  train_cmd->add_option("--out", train.out, "snapshot path")->required();

  SegmentArgs segment;
  auto* segment_cmd = app.add_subcommand("segment", "continuous recognition on a frame sequence");
  segment_cmd->add_option("--model", segment.model)->required();
  segment_cmd->add_option("--sequence", segment.sequence, "frame feature file")->required();
  segment_cmd->add_option("--truth", segment.truth, "ground-truth label sequence");
  segment_cmd->add_option("--gate", segment.gate, "confidence below which a segment is Unknown")
      ->capture_default_str();
  segment_cmd->add_option("--window", segment.config.window)->capture_default_str();
  segment_cmd->add_option("--smooth", segment.config.smooth_window)->capture_default_str();
  segment_cmd->add_option("--heldout", segment.heldout, "labels never trained on; Unknown over them is correct");
  segment_cmd->add_option("--out", segment.out, "segments CSV");

  InspectArgs inspect;
  auto* inspect_cmd = app.add_subcommand("inspect", "summarize a model snapshot");
  inspect_cmd->add_option("--model", inspect.model)->required();
  inspect_cmd->add_option("--bins", inspect.bins)->capture_default_str();
  inspect_cmd->add_option("--out", inspect.out, "report path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*stream_cmd) return run_stream_cmd(stream, *stream_cmd);
    if (*batch_cmd) return run_batch_cmd(batch, *batch_cmd);
    if (*train_cmd) return run_train(train);
    if (*segment_cmd) return run_segment(segment);
    if (*inspect_cmd) return run_inspect(inspect);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 1;
}
