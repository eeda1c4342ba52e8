// Model snapshot, text format version 1:
//
//   fiver-model 1
//   max_balls <N|none>
//   smoothing <real>
//   confidence <normalized|raw>
//   index <cover_tree|linear_scan>
//   seed <u64>
//   dim <N|none>
//   next_id <u64>
//   labels <K>
//   <one label per line, in id order>
//   pending <none|comma-separated coordinates>
//   balls <N>
//   <id> <R> <eps> <mistakes> <total> <center_count> <counts,...> <center,...>
//   rng <mt19937_64 state words>
//   end
//
// Reals are written in shortest round-trip form, so load(save(m)) restores
// every field bit-exactly. Balls are listed in storage order, which the
// eviction sampler depends on.

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "fiver/cover_model.hpp"
#include "text_util.hpp"

namespace fiver {

namespace {

constexpr std::string_view kMagic = "fiver-model";
constexpr int kVersion = 1;

std::string join(std::span<const double> xs) {
  return fmt::format("{}", fmt::join(xs, ","));
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string line() {
    std::string s;
    if (!std::getline(in_, s)) fail("unexpected end of snapshot");
    ++line_no_;
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
  }

  // Reads "<key> <value>" and returns value.
  std::string field(std::string_view key) {
    const std::string s = line();
    if (s.size() < key.size() + 1 || s.compare(0, key.size(), key) != 0 || s[key.size()] != ' ') {
      fail(fmt::format("expected '{}'", key));
    }
    return s.substr(key.size() + 1);
  }

  std::uint64_t u64(std::string_view s) {
    auto v = text::parse_u64(s);
    if (!v) fail(fmt::format("bad integer '{}'", s));
    return *v;
  }

  double real(std::string_view s) {
    auto v = text::parse_double(s);
    if (!v) fail(fmt::format("bad number '{}'", s));
    return *v;
  }

  std::vector<double> reals(std::string_view s) {
    std::vector<double> out;
    for (auto part : text::split(s, ',')) out.push_back(real(part));
    return out;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(fmt::format("model snapshot line {}: {}", line_no_, what));
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

}  // namespace

void CoverModel::save(std::ostream& out) const {
  out << kMagic << ' ' << kVersion << '\n';
  out << "max_balls " << (config_.max_balls ? std::to_string(*config_.max_balls) : "none") << '\n';
  out << fmt::format("smoothing {}\n", config_.smoothing);
  out << "confidence " << (config_.confidence == ConfidenceMode::Normalized ? "normalized" : "raw") << '\n';
  out << "index " << (config_.index == IndexKind::CoverTree ? "cover_tree" : "linear_scan") << '\n';
  out << "seed " << config_.seed << '\n';
  out << "dim " << (dim_ ? std::to_string(*dim_) : "none") << '\n';
  out << "next_id " << next_id_ << '\n';
  out << "labels " << labels_.size() << '\n';
  for (const auto& name : labels_.names()) out << name << '\n';
  out << "pending " << (pending_first_ ? join(pending_first_->coords()) : "none") << '\n';
  out << "balls " << balls_.size() << '\n';
  for (const auto& b : balls_) {
    out << fmt::format("{} {} {} {} {} {} {} {}\n", to_integer(b.id), b.initial_radius, b.radius, b.mistakes, b.total,
                       b.center_count, fmt::join(b.class_counts, ","), join(b.center.coords()));
  }
  out << "rng " << rng_ << '\n';
  out << "end\n";
}

CoverModel CoverModel::load(std::istream& in) {
  Reader r(in);
  if (r.line() != fmt::format("{} {}", kMagic, kVersion)) r.fail("not a version-1 model snapshot");

  ModelConfig config;
  if (auto v = r.field("max_balls"); v != "none") config.max_balls = r.u64(v);
  config.smoothing = r.real(r.field("smoothing"));
  if (auto v = r.field("confidence"); v == "normalized") {
    config.confidence = ConfidenceMode::Normalized;
  } else if (v == "raw") {
    config.confidence = ConfidenceMode::Raw;
  } else {
    r.fail("unknown confidence mode");
  }
  if (auto v = r.field("index"); v == "cover_tree") {
    config.index = IndexKind::CoverTree;
  } else if (v == "linear_scan") {
    config.index = IndexKind::LinearScan;
  } else {
    r.fail("unknown index kind");
  }
  config.seed = r.u64(r.field("seed"));

  CoverModel model(config);
  if (auto v = r.field("dim"); v != "none") model.dim_ = r.u64(v);
  model.next_id_ = r.u64(r.field("next_id"));

  const auto label_count = r.u64(r.field("labels"));
  for (std::uint64_t i = 0; i < label_count; ++i) model.labels_.intern(r.line());

  if (auto v = r.field("pending"); v != "none") model.pending_first_ = FeatureVector(r.reals(v));

  const auto ball_count = r.u64(r.field("balls"));
  for (std::uint64_t i = 0; i < ball_count; ++i) {
    const std::string s = r.line();
    const auto parts = text::split(s, ' ');
    if (parts.size() != 8) r.fail("ball record needs 8 fields");
    Ball b;
    b.id = BallId{r.u64(parts[0])};
    b.initial_radius = r.real(parts[1]);
    b.radius = r.real(parts[2]);
    b.mistakes = r.u64(parts[3]);
    b.total = r.u64(parts[4]);
    b.center_count = r.u64(parts[5]);
    for (auto c : text::split(parts[6], ',')) b.class_counts.push_back(r.u64(c));
    b.center = FeatureVector(r.reals(parts[7]));
    if (b.class_counts.size() > label_count) r.fail("ball references an unknown label");
    if (model.dim_ && b.center.size() != *model.dim_) r.fail("ball center has wrong dimensionality");
    if (model.slot_.contains(b.id)) r.fail("duplicate ball id");
    model.index_->insert(b.id, b.center);
    model.slot_.emplace(b.id, model.balls_.size());
    model.balls_.push_back(std::move(b));
  }

  std::istringstream rng_state(r.field("rng"));
  rng_state >> model.rng_;
  if (!rng_state) r.fail("bad sampler state");
  if (r.line() != "end") r.fail("missing end marker");
  return model;
}

}  // namespace fiver
