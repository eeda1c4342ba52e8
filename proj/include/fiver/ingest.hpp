#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fiver/core_types.hpp"
#include "fiver/cover_model.hpp"
#include "fiver/eval_harness.hpp"

namespace fiver {

// Text formats
// ------------
// Feature file: one descriptor per line, comma-separated decimals. Lines
// starting with '#' are comments; writers emit "# fiver-features 1" first.
//
// Manifest:
//   fiver-manifest 1
//   dim <d>
//   <feature file>,<label>,<train|test|stream>[,<bag id>]
//   ...
// Feature paths are relative to the manifest's directory. The bag id
// defaults to the feature path. '#' lines and blank lines are ignored.
//
// Label sequence: "# fiver-labels 1", then one label per line in temporal
// order.
//
// All readers throw DataError naming the file and line.

std::vector<FeatureVector> read_feature_file(const std::filesystem::path& path,
                                             std::optional<std::size_t> dim = std::nullopt);
void write_feature_file(const std::filesystem::path& path, std::span<const FeatureVector> rows);

Dataset load_dataset(const std::filesystem::path& manifest);
/// Writes `dir`/manifest.txt plus one feature file per bag under `dir`/bags.
void write_dataset(const Dataset& data, const std::filesystem::path& dir);

std::vector<std::string> read_label_sequence(const std::filesystem::path& path);
void write_label_sequence(const std::filesystem::path& path, std::span<const std::string> labels);

void save_model(const CoverModel& model, const std::filesystem::path& path);
CoverModel load_model(const std::filesystem::path& path);

}  // namespace fiver
