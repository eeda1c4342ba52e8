#include "fiver/active_learning.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>

#include <fmt/format.h>

namespace fiver {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Full:
      return "full";
    case Variant::Rnd:
      return "rnd";
    case Variant::VarUn:
      return "varun";
    case Variant::VarUnFix:
      return "varunfix";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "full") return Variant::Full;
  if (lower == "rnd" || lower == "random") return Variant::Rnd;
  if (lower == "varun") return Variant::VarUn;
  if (lower == "varunfix") return Variant::VarUnFix;
  throw InvalidInput(fmt::format("unknown variant '{}'", name));
}

bool ActiveState::budget_allows() const {
  if (seen == 0) return false;
  return static_cast<double>(requested + 1) / static_cast<double>(seen) <= budget;
}

ActiveState make_active_state(double budget, double tau) {
  if (!(budget > 0.0 && budget <= 1.0)) throw InvalidInput(fmt::format("budget {} outside (0, 1]", budget));
  if (!(tau > 0.0 && tau <= 1.0)) throw InvalidInput(fmt::format("tau {} outside (0, 1]", tau));
  ActiveState s;
  s.budget = budget;
  s.tau = tau;
  return s;
}

bool var_un_decide(ActiveState& state, double confidence) {
  if (confidence < state.threshold) {
    state.threshold *= 1.0 - state.tau;
    return true;
  }
  state.threshold *= 1.0 + state.tau;
  return false;
}

double online_accuracy_update(double previous, std::uint64_t i, bool correct) {
  if (i == 0) throw InvalidInput("accuracy update needs i >= 1");
  const double inv = 1.0 / static_cast<double>(i);
  return (1.0 - inv) * previous + inv * (correct ? 1.0 : 0.0);
}

OracleSource OracleSource::from_bags(std::span<const VideoBag> bags) {
  OracleSource oracle;
  for (const auto& bag : bags) {
    if (!bag.true_label) throw DataError(fmt::format("bag '{}' has no stored label", bag.id));
    oracle.add(bag.id, *bag.true_label);
  }
  return oracle;
}

void OracleSource::add(std::string bag_id, ClassLabel label) { labels_.insert_or_assign(std::move(bag_id), std::move(label)); }

const ClassLabel& OracleSource::label(std::string_view bag_id) const {
  auto it = labels_.find(std::string(bag_id));
  if (it == labels_.end()) throw DataError(fmt::format("oracle has no label for bag '{}'", bag_id));
  return it->second;
}

StepRecord fiver_step(CoverModel& model, ActiveState& state, StreamStats& stats, const VideoBag& bag,
                      const OracleSource& oracle, const StreamPolicy& policy, std::mt19937_64& rng) {
  if (policy.variant == Variant::VarUnFix && !policy.max_balls) {
    throw InvalidInput("VarUnFix needs a ball cap");
  }
  const ClassLabel& truth = oracle.label(bag.id);
  const BagPrediction prediction = model.predict_bag(bag);

  ++state.seen;
  ++stats.seen;

  StepRecord rec;
  rec.index = state.seen;
  rec.bag_id = bag.id;
  if (prediction.predicted) rec.predicted = model.labels().name(*prediction.predicted);
  rec.confidence = prediction.top_confidence;
  rec.correct = rec.predicted && *rec.predicted == truth;
  stats.accuracy = online_accuracy_update(stats.accuracy, stats.seen, rec.correct);

  bool query = false;
  switch (policy.variant) {
    case Variant::Full:
      query = state.budget_allows();
      break;
    case Variant::Rnd: {
      const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      query = state.budget_allows() && u < state.budget;
      break;
    }
    case Variant::VarUn:
    case Variant::VarUnFix:
      // The strategy (and its threshold) is only consulted when the budget
      // leaves room for a query.
      query = state.budget_allows() && var_un_decide(state, prediction.top_confidence);
      break;
  }

  if (query) {
    ++state.requested;
    model.learn_bag(bag, truth);
    if (policy.variant == Variant::VarUnFix) model.evict_to(*policy.max_balls);
    rec.true_label = truth;
  }

  rec.queried = query;
  rec.threshold = state.threshold;
  rec.balls = model.size();
  rec.query_rate = state.query_rate();
  rec.accuracy = stats.accuracy;
  if (stats.keep_log) stats.log.push_back(rec);
  return rec;
}

void write_step_log(std::ostream& out, std::span<const StepRecord> log) {
  out << "# fiver-steplog 1\n";
  out << "index,bag_id,predicted,true_label,queried,correct,confidence,threshold,balls,query_rate,accuracy\n";
  for (const auto& r : log) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.index, r.bag_id, r.predicted.value_or(""),
                       r.true_label.value_or(""), r.queried ? 1 : 0, r.correct ? 1 : 0, r.confidence, r.threshold,
                       r.balls, r.query_rate, r.accuracy);
  }
}

}  // namespace fiver
