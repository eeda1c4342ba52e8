#include "fiver/ingest.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "text_util.hpp"

namespace fiver {

namespace fs = std::filesystem;

namespace {

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("{}: cannot open file", path.string()));
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("{}: cannot write file", path.string()));
  return out;
}

[[noreturn]] void fail_at(const fs::path& path, std::size_t line, const std::string& what) {
  throw DataError(fmt::format("{}:{}: {}", path.string(), line, what));
}

}  // namespace

std::vector<FeatureVector> read_feature_file(const fs::path& path, std::optional<std::size_t> dim) {
  auto in = open_in(path);
  std::vector<FeatureVector> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::vector<double> coords;
    for (auto token : text::split(body, ',')) {
      auto v = text::parse_double(token);
      if (!v) fail_at(path, line_no, fmt::format("non-numeric token '{}'", text::trim(token)));
      if (!std::isfinite(*v)) fail_at(path, line_no, "non-finite value");
      coords.push_back(*v);
    }
    const std::size_t expected = dim.value_or(rows.empty() ? coords.size() : rows.front().size());
    if (coords.size() != expected) {
      fail_at(path, line_no, fmt::format("row has {} values, expected {}", coords.size(), expected));
    }
    rows.emplace_back(std::move(coords));
  }
  if (rows.empty()) throw DataError(fmt::format("{}: no descriptors", path.string()));
  return rows;
}

void write_feature_file(const fs::path& path, std::span<const FeatureVector> rows) {
  auto out = open_out(path);
  out << "# fiver-features 1\n";
  for (const auto& row : rows) out << fmt::format("{}\n", fmt::join(row.coords(), ","));
}

Dataset load_dataset(const fs::path& manifest) {
  auto in = open_in(manifest);
  const fs::path base = manifest.parent_path();

  Dataset data;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::optional<std::size_t> dim;

  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (!have_header) {
      if (body != "fiver-manifest 1") fail_at(manifest, line_no, "expected 'fiver-manifest 1'");
      have_header = true;
      continue;
    }
    if (!dim) {
      if (body.substr(0, 4) != "dim ") fail_at(manifest, line_no, "expected 'dim <d>'");
      const auto d = text::parse_u64(body.substr(4));
      if (!d || *d == 0) fail_at(manifest, line_no, "bad dimensionality");
      dim = *d;
      continue;
    }
    const auto fields = text::split(body, ',');
    if (fields.size() != 3 && fields.size() != 4) fail_at(manifest, line_no, "expected <file>,<label>,<split>[,<id>]");
    const std::string rel(text::trim(fields[0]));
    const std::string label(text::trim(fields[1]));
    if (rel.empty() || label.empty()) fail_at(manifest, line_no, "empty file or label");
    const std::string id = fields.size() == 4 ? std::string(text::trim(fields[3])) : rel;
    if (id.empty()) fail_at(manifest, line_no, "empty bag id");
    if (!seen.insert(id).second) fail_at(manifest, line_no, fmt::format("duplicate bag id '{}'", id));

    Split split{};
    try {
      split = parse_split(text::trim(fields[2]));
    } catch (const InvalidInput& e) {
      fail_at(manifest, line_no, e.what());
    }

    const fs::path file = base / rel;
    if (!fs::exists(file)) fail_at(manifest, line_no, fmt::format("missing feature file {}", file.string()));

    VideoBag bag;
    bag.id = id;
    bag.true_label = label;
    bag.descriptors = read_feature_file(file, dim);
    data.bags.push_back(std::move(bag));
    data.splits.push_back(split);
  }
  if (!have_header || !dim) throw DataError(fmt::format("{}: incomplete manifest header", manifest.string()));
  data.dim = *dim;
  return data;
}

void write_dataset(const Dataset& data, const fs::path& dir) {
  if (data.bags.size() != data.splits.size()) throw InvalidInput("dataset split tags out of sync");
  fs::create_directories(dir / "bags");
  auto out = open_out(dir / "manifest.txt");
  out << "fiver-manifest 1\n";
  out << "dim " << data.dim << '\n';
  for (std::size_t i = 0; i < data.bags.size(); ++i) {
    const auto& bag = data.bags[i];
    if (!bag.true_label) throw InvalidInput(fmt::format("bag '{}' has no label to write", bag.id));
    const std::string rel = fmt::format("bags/{}.csv", bag.id);
    write_feature_file(dir / rel, bag.descriptors);
    out << fmt::format("{},{},{},{}\n", rel, *bag.true_label, to_string(data.splits[i]), bag.id);
  }
}

std::vector<std::string> read_label_sequence(const fs::path& path) {
  auto in = open_in(path);
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    labels.emplace_back(body);
  }
  return labels;
}

void write_label_sequence(const fs::path& path, std::span<const std::string> labels) {
  auto out = open_out(path);
  out << "# fiver-labels 1\n";
  for (const auto& l : labels) out << l << '\n';
}

void save_model(const CoverModel& model, const fs::path& path) {
  auto out = open_out(path);
  model.save(out);
}

CoverModel load_model(const fs::path& path) {
  auto in = open_in(path);
  return CoverModel::load(in);
}

}  // namespace fiver
