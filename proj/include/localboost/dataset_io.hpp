#pragma once

#include "localboost/datamodel.hpp"

#include "json.hpp"

#include <filesystem>

namespace localboost {

using Json = nlohmann::json;

// Dataset document, version 1:
//
//   {
//     "format": "localboost.dataset", "version": 1,
//     "label_space": C,
//     "label_convention": "one_based" | "wrench",      (optional, default one_based)
//     "instances": [{"id": str, "features": [num...], "clean_label": int|null}, ...],
//     "weak_labels": [[int...], ...],                  N x p
//     "lf_names": [str, ...]                           length p
//   }
//
// one_based: labels 1..C, abstain 0. wrench: labels 0..C-1, abstain -1; translated on load.
// Files are always written one_based.

inline constexpr int kDatasetFormatVersion = 1;

WeakLabeledSet dataset_from_json(const Json& doc);
Json dataset_to_json(const WeakLabeledSet& data);

WeakLabeledSet read_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, const WeakLabeledSet& data);

Json read_json_file(const std::filesystem::path& path);
/// Writes `doc` pretty-printed with a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& doc);

}  // namespace localboost
