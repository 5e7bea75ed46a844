#include "localboost/dataset_io.hpp"

#include "localboost/error.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace localboost {

namespace {

int translate_label(int raw, bool wrench) {
  if (!wrench) return raw;
  return raw < 0 ? LabelSpace::kAbstain : raw + 1;
}

}  // namespace

WeakLabeledSet dataset_from_json(const Json& doc) {
  try {
    if (doc.contains("format") && doc.at("format") != "localboost.dataset")
      throw ValidationError("not a localboost dataset document");
    if (doc.contains("version") && doc.at("version").get<int>() != kDatasetFormatVersion)
      throw ValidationError("unsupported dataset version " + doc.at("version").dump());
    const std::string convention = doc.value("label_convention", std::string("one_based"));
    if (convention != "one_based" && convention != "wrench")
      throw ValidationError("unknown label_convention '" + convention + "'");
    const bool wrench = convention == "wrench";

    WeakLabeledSet out;
    out.label_space = LabelSpace(doc.at("label_space").get<int>());
    const auto& instances = doc.at("instances");
    const auto& weak = doc.at("weak_labels");
    const auto n = instances.size();
    if (weak.size() != n) throw ValidationError("weak_labels row count differs from instance count");
    if (!doc.contains("lf_names")) throw ValidationError("dataset document lacks lf_names");
    out.lf_names = doc.at("lf_names").get<std::vector<std::string>>();

    std::size_t dim = 0;
    std::size_t p = out.lf_names.size();
    if (n > 0) {
      dim = instances.at(0).at("features").size();
      p = weak.at(0).size();
    }
    if (p == 0) throw ValidationError("dataset has no labeling functions");
    out.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    out.weak_labels.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    out.ids.reserve(n);
    out.clean_labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& inst = instances[i];
      out.ids.push_back(inst.contains("id") ? inst.at("id").get<std::string>() : std::to_string(i));
      const auto& f = inst.at("features");
      if (f.size() != dim) throw ValidationError("instance " + out.ids.back() + " has wrong feature dimension");
      for (std::size_t j = 0; j < dim; ++j) {
        if (!f[j].is_number()) throw ValidationError("instance " + out.ids.back() + " has a non-numeric feature");
        const double v = f[j].get<double>();
        if (!std::isfinite(v)) throw ValidationError("instance " + out.ids.back() + " has a non-finite feature");
        out.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      }
      if (inst.contains("clean_label") && !inst.at("clean_label").is_null())
        out.clean_labels.emplace_back(translate_label(inst.at("clean_label").get<int>(), wrench));
      else
        out.clean_labels.emplace_back(std::nullopt);
      const auto& row = weak[i];
      if (row.size() != p) throw ValidationError("weak_labels row " + std::to_string(i) + " has wrong length");
      for (std::size_t j = 0; j < p; ++j)
        out.weak_labels(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            translate_label(row[j].get<int>(), wrench);
    }
    out.validate();
    return out;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed dataset document: ") + e.what());
  }
}

Json dataset_to_json(const WeakLabeledSet& data) {
  Json doc;
  doc["format"] = "localboost.dataset";
  doc["version"] = kDatasetFormatVersion;
  doc["label_space"] = data.label_space.num_classes();
  doc["label_convention"] = "one_based";
  Json instances = Json::array();
  Json weak = Json::array();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto ri = static_cast<Eigen::Index>(i);
    Json inst;
    inst["id"] = data.ids.empty() ? std::to_string(i) : data.ids[i];
    std::vector<double> f(data.features.row(ri).data(), data.features.row(ri).data() + data.features.cols());
    inst["features"] = f;
    if (!data.clean_labels.empty() && data.clean_labels[i])
      inst["clean_label"] = *data.clean_labels[i];
    else
      inst["clean_label"] = nullptr;
    instances.push_back(std::move(inst));
    std::vector<int> row(data.weak_labels.row(ri).data(), data.weak_labels.row(ri).data() + data.weak_labels.cols());
    weak.push_back(row);
  }
  doc["instances"] = std::move(instances);
  doc["weak_labels"] = std::move(weak);
  doc["lf_names"] = data.lf_names;
  return doc;
}

WeakLabeledSet read_dataset(const std::filesystem::path& path) {
  return dataset_from_json(read_json_file(path));
}

void write_dataset(const std::filesystem::path& path, const WeakLabeledSet& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  // Compact: datasets are large.
  out << dataset_to_json(data).dump() << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const Json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace localboost
