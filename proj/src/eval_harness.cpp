#include "fiver/eval_harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "text_util.hpp"

namespace fiver {

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train:
      return "train";
    case Split::Test:
      return "test";
    case Split::Stream:
      return "stream";
  }
  return "?";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  if (s == "stream") return Split::Stream;
  throw InvalidInput(fmt::format("unknown split tag '{}'", s));
}

std::vector<VideoBag> Dataset::select(Split split) const {
  std::vector<VideoBag> out;
  for (std::size_t i = 0; i < bags.size(); ++i) {
    if (splits[i] == split) out.push_back(bags[i]);
  }
  return out;
}

std::vector<double> default_budget_grid() {
  return {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.75, 1.0};
}

// ---------------------------------------------------------------------------
// Plan files

namespace {

template <typename T, typename F>
std::vector<T> parse_list(std::string_view value, F&& parse_one) {
  std::vector<T> out;
  for (auto part : text::split(value, ',')) {
    part = text::trim(part);
    if (!part.empty()) out.push_back(parse_one(part));
  }
  return out;
}

}  // namespace

ExperimentPlan parse_plan(std::istream& in, const std::filesystem::path& base_dir) {
  ExperimentPlan plan;
  std::string line;
  std::size_t line_no = 0;
  bool have_budgets = false;

  auto fail = [&](const std::string& what) -> void {
    throw DataError(fmt::format("plan line {}: {}", line_no, what));
  };
  auto u64 = [&](std::string_view s) {
    auto v = text::parse_u64(s);
    if (!v) fail(fmt::format("bad integer '{}'", s));
    return *v;
  };
  auto real = [&](std::string_view s) {
    auto v = text::parse_double(s);
    if (!v) fail(fmt::format("bad number '{}'", s));
    return *v;
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) fail("expected key = value");
    const auto key = text::trim(body.substr(0, eq));
    const auto value = text::trim(body.substr(eq + 1));

    try {
      if (key == "version") {
        if (u64(value) != 1) fail("unsupported plan version");
      } else if (key == "mode") {
        if (value == "stream") {
          plan.mode = Mode::Stream;
        } else if (value == "batch") {
          plan.mode = Mode::Batch;
        } else {
          fail(fmt::format("unknown mode '{}'", value));
        }
      } else if (key == "variants") {
        plan.variants = parse_list<Variant>(value, [](std::string_view s) { return parse_variant(s); });
      } else if (key == "budgets") {
        plan.budgets = value == "grid" ? default_budget_grid() : parse_list<double>(value, real);
        have_budgets = true;
      } else if (key == "seeds") {
        // Either a list or an inclusive range "a..b".
        if (auto dots = value.find(".."); dots != std::string_view::npos) {
          const auto lo = u64(value.substr(0, dots));
          const auto hi = u64(value.substr(dots + 2));
          if (hi < lo) fail("empty seed range");
          plan.seeds.clear();
          for (auto s = lo; s <= hi; ++s) plan.seeds.push_back(s);
        } else {
          plan.seeds = parse_list<std::uint64_t>(value, u64);
        }
      } else if (key == "folds") {
        plan.folds = u64(value);
      } else if (key == "max_balls") {
        plan.max_balls = u64(value);
      } else if (key == "tau") {
        plan.tau = real(value);
      } else if (key == "dataset") {
        std::filesystem::path p{std::string(value)};
        plan.dataset = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
      } else if (key == "shuffle") {
        if (value == "true" || value == "1") {
          plan.shuffle = true;
        } else if (value == "false" || value == "0") {
          plan.shuffle = false;
        } else {
          fail("shuffle must be true or false");
        }
      } else {
        fail(fmt::format("unknown key '{}'", key));
      }
    } catch (const InvalidInput& e) {
      fail(e.what());
    }
  }
  if (!have_budgets && plan.budgets.empty()) plan.budgets = default_budget_grid();
  return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open plan file {}", path.string()));
  return parse_plan(in, path.parent_path());
}

void validate_plan(const ExperimentPlan& plan) {
  if (plan.seeds.empty()) throw InvalidInput("plan needs at least one seed");
  if (plan.mode == Mode::Stream) {
    if (plan.budgets.empty()) throw InvalidInput("stream plan needs at least one budget");
    if (plan.variants.empty()) throw InvalidInput("stream plan needs at least one variant");
    for (double b : plan.budgets) {
      if (!(b > 0.0 && b <= 1.0)) throw InvalidInput(fmt::format("budget {} outside (0, 1]", b));
    }
    if (!(plan.tau > 0.0 && plan.tau <= 1.0)) throw InvalidInput("tau outside (0, 1]");
    if (plan.max_balls == 0) throw InvalidInput("max_balls must be positive");
  } else if (plan.folds && *plan.folds < 2) {
    throw InvalidInput("K-fold evaluation needs K >= 2");
  }
}

// ---------------------------------------------------------------------------
// Streaming protocol

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream).
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

StreamRun run_stream(std::span<const VideoBag> bags, const StreamSettings& settings) {
  if (bags.empty()) throw InvalidInput("cannot stream an empty dataset");
  const OracleSource oracle = OracleSource::from_bags(bags);

  ModelConfig config;
  config.seed = derive_seed(settings.seed, 1);
  CoverModel model(config);
  ActiveState state = make_active_state(settings.budget, settings.tau);
  StreamStats stats;
  stats.keep_log = settings.keep_log;
  StreamPolicy policy{settings.variant, std::nullopt};
  if (settings.variant == Variant::VarUnFix) policy.max_balls = settings.max_balls;
  std::mt19937_64 rng(derive_seed(settings.seed, 2));

  for (const auto& bag : bags) fiver_step(model, state, stats, bag, oracle, policy, rng);

  StreamRun run;
  run.variant = settings.variant;
  run.budget = settings.budget;
  run.seed = settings.seed;
  run.query_rate = state.query_rate();
  run.accuracy = stats.accuracy;
  run.balls = model.size();
  run.log = std::move(stats.log);
  return run;
}

namespace {

std::pair<double, double> mean_std(std::span<const double> xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace

StreamExperiment run_stream_experiment(const ExperimentPlan& plan, const Dataset& data, bool keep_logs) {
  validate_plan(plan);
  if (data.bags.empty()) throw InvalidInput("cannot stream an empty dataset");

  StreamExperiment result;
  for (Variant variant : plan.variants) {
    for (double budget : plan.budgets) {
      std::vector<double> rates, accs;
      for (std::uint64_t seed : plan.seeds) {
        std::vector<VideoBag> order;
        order.reserve(data.bags.size());
        if (plan.shuffle) {
          for (std::size_t i : permutation(data.bags.size(), derive_seed(seed, 0))) order.push_back(data.bags[i]);
        } else {
          order = data.bags;
        }
        StreamSettings settings{variant, budget, plan.tau, plan.max_balls, seed, keep_logs};
        StreamRun run = run_stream(order, settings);
        rates.push_back(run.query_rate);
        accs.push_back(run.accuracy);
        result.runs.push_back(std::move(run));
      }
      CurvePoint point;
      point.variant = variant;
      point.budget = budget;
      point.query_rate_mean = mean_std(rates).first;
      std::tie(point.accuracy_mean, point.accuracy_std) = mean_std(accs);
      result.curve.push_back(point);
    }
  }
  return result;
}

void write_curve_csv(std::ostream& out, std::span<const CurvePoint> curve) {
  out << "# fiver-results 1\n";
  out << "variant,budget,realized_query_rate_mean,online_accuracy_mean,online_accuracy_std\n";
  for (const auto& p : curve) {
    out << fmt::format("{},{},{},{},{}\n", to_string(p.variant), p.budget, p.query_rate_mean, p.accuracy_mean,
                       p.accuracy_std);
  }
}

// ---------------------------------------------------------------------------
// Batch protocol

CoverModel train_full(std::span<const VideoBag> bags, const ModelConfig& config) {
  CoverModel model(config);
  for (const auto& bag : bags) {
    if (!bag.true_label) throw DataError(fmt::format("training bag '{}' has no label", bag.id));
    model.learn_bag(bag, *bag.true_label);
  }
  return model;
}

double evaluate(const CoverModel& model, std::span<const VideoBag> bags) {
  if (bags.empty()) throw InvalidInput("cannot evaluate on zero bags");
  std::size_t correct = 0;
  for (const auto& bag : bags) {
    if (!bag.true_label) throw DataError(fmt::format("test bag '{}' has no label", bag.id));
    const auto p = model.predict_bag(bag);
    if (p.predicted && model.labels().name(*p.predicted) == *bag.true_label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(bags.size());
}

BatchExperiment run_batch_experiment(const ExperimentPlan& plan, const Dataset& data) {
  validate_plan(plan);
  if (data.bags.empty()) throw InvalidInput("cannot evaluate an empty dataset");

  BatchExperiment result;
  for (std::uint64_t seed : plan.seeds) {
    ModelConfig config;
    config.seed = derive_seed(seed, 1);
    const auto perm = permutation(data.bags.size(), derive_seed(seed, 0));

    if (plan.folds) {
      const std::size_t k = *plan.folds;
      const std::size_t n = data.bags.size();
      for (std::size_t f = 0; f < k; ++f) {
        const std::size_t lo = f * n / k;
        const std::size_t hi = (f + 1) * n / k;
        if (lo == hi) throw InvalidInput(fmt::format("fold {} has zero test bags", f));
        std::vector<VideoBag> train, test;
        for (std::size_t pos = 0; pos < n; ++pos) {
          (pos >= lo && pos < hi ? test : train).push_back(data.bags[perm[pos]]);
        }
        const CoverModel model = train_full(train, config);
        result.folds.push_back({seed, f, test.size(), evaluate(model, test)});
      }
    } else {
      std::vector<VideoBag> train, test;
      for (std::size_t i : perm) {
        if (data.splits[i] == Split::Train) train.push_back(data.bags[i]);
      }
      for (std::size_t i = 0; i < data.bags.size(); ++i) {
        if (data.splits[i] == Split::Test) test.push_back(data.bags[i]);
      }
      if (test.empty()) throw InvalidInput("train/test evaluation has zero test bags");
      if (train.empty()) throw InvalidInput("train/test evaluation has zero training bags");
      const CoverModel model = train_full(train, config);
      result.folds.push_back({seed, 0, test.size(), evaluate(model, test)});
    }
  }

  std::vector<double> accs;
  for (const auto& f : result.folds) accs.push_back(f.accuracy);
  std::tie(result.mean_accuracy, result.std_accuracy) = mean_std(accs);
  return result;
}

void write_batch_csv(std::ostream& out, const BatchExperiment& result) {
  out << "# fiver-batch 1\n";
  out << "seed,fold,test_bags,accuracy\n";
  std::size_t total = 0;
  for (const auto& f : result.folds) {
    out << fmt::format("{},{},{},{}\n", f.seed, f.fold, f.test_bags, f.accuracy);
    total += f.test_bags;
  }
  out << fmt::format("summary,all,{},{}\n", total, result.mean_accuracy);
}

}  // namespace fiver
