#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fiver/core_types.hpp"
#include "fiver/cover_model.hpp"

namespace fiver {

/// Labeling strategies compared by the streaming protocol.
enum class Variant {
  Full,      // label everything the budget allows
  Rnd,       // label with probability equal to the budget
  VarUn,     // variable-uncertainty threshold
  VarUnFix,  // VarUn plus a hard cap on the number of balls
};

std::string_view to_string(Variant v);
/// Accepts full, rnd, varun, varunfix (case-insensitive).
Variant parse_variant(std::string_view name);

/// Threshold and query accounting for one stream.
struct ActiveState {
  double threshold = 1.0;
  double tau = 0.01;
  double budget = 1.0;
  std::uint64_t seen = 0;
  std::uint64_t requested = 0;

  /// Cumulative fraction of observed bags whose label was requested.
  double query_rate() const { return seen == 0 ? 0.0 : static_cast<double>(requested) / static_cast<double>(seen); }
  /// True iff one more request keeps the cumulative rate within budget:
  /// (requested + 1) / seen <= budget.
  bool budget_allows() const;
};

/// Validates tau in (0, 1] and budget in (0, 1]; throws InvalidInput.
ActiveState make_active_state(double budget, double tau = 0.01);

/// Variable-uncertainty rule. Queries (and lowers the threshold by a factor
/// 1 - tau) when confidence is strictly below it; otherwise raises it by
/// 1 + tau and declines.
bool var_un_decide(ActiveState& state, double confidence);

/// A_i = (1 - 1/i) A_{i-1} + (1/i) [correct].
double online_accuracy_update(double previous, std::uint64_t i, bool correct);

/// One row of the step log.
struct StepRecord {
  std::uint64_t index = 0;
  std::string bag_id;
  std::optional<ClassLabel> predicted;   // empty = Unknown
  std::optional<ClassLabel> true_label;  // only when queried
  bool queried = false;
  bool correct = false;
  double confidence = 0.0;
  double threshold = 0.0;  // after the step
  std::size_t balls = 0;   // after the step
  double query_rate = 0.0;
  double accuracy = 0.0;
};

struct StreamStats {
  double accuracy = 0.0;
  std::uint64_t seen = 0;
  std::vector<StepRecord> log;
  bool keep_log = true;
};

/// Simulated annotator backed by stored labels.
class OracleSource {
 public:
  OracleSource() = default;
  /// Every bag must carry a true label; throws DataError otherwise.
  static OracleSource from_bags(std::span<const VideoBag> bags);

  void add(std::string bag_id, ClassLabel label);
  /// Throws DataError when the bag is unknown.
  const ClassLabel& label(std::string_view bag_id) const;

 private:
  std::unordered_map<std::string, ClassLabel> labels_;
};

struct StreamPolicy {
  Variant variant = Variant::VarUn;
  /// Required for VarUnFix.
  std::optional<std::size_t> max_balls;
};

/// One prequential step: predict, score, then decide whether to ask the
/// oracle and learn. Steps that do not query leave the model untouched. Rnd
/// consumes exactly one draw from `rng` per step.
StepRecord fiver_step(CoverModel& model, ActiveState& state, StreamStats& stats, const VideoBag& bag,
                      const OracleSource& oracle, const StreamPolicy& policy, std::mt19937_64& rng);

/// Step log CSV: a version line, a header row, one row per step.
void write_step_log(std::ostream& out, std::span<const StepRecord> log);

}  // namespace fiver
