#include "oodzoo/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "oodzoo/error.hpp"
#include "oodzoo/hash.hpp"

namespace oodzoo {
namespace {

using json = nlohmann::json;

const std::set<std::string> kTopKeys = {"models", "score", "k", "temperature", "normalize", "tpr0"};
const std::set<std::string> kModelKeys = {"name",  "features",    "logits",    "labels", "score",
                                          "k",     "temperature", "normalize", "cov_ridge"};

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) fail(Errc::SchemaError, where + ": unknown key '" + key + "'");
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(Errc::SchemaError, where + ": missing key '" + key + "'");
  return *it;
}

double as_number(const json& v, const std::string& what) {
  if (!v.is_number()) fail(Errc::SchemaError, what + " must be a number");
  return v.get<double>();
}

std::size_t as_count(const json& v, const std::string& what) {
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    fail(Errc::SchemaError, what + " must be a positive integer");
  }
  return static_cast<std::size_t>(v.get<long long>());
}

bool as_bool(const json& v, const std::string& what) {
  if (!v.is_boolean()) fail(Errc::SchemaError, what + " must be a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& what) {
  if (!v.is_string()) fail(Errc::SchemaError, what + " must be a string");
  return v.get<std::string>();
}

ScoreKind as_kind(const json& v, const std::string& what) {
  const auto name = as_string(v, what);
  try {
    return parse_score_kind(name);
  } catch (const Error&) {
    fail(Errc::SchemaError, what + ": unknown score kind '" + name + "'");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::map<std::string, std::filesystem::path> read_paths(const json& obj, const std::filesystem::path& base,
                                                        const std::string& where) {
  if (!obj.is_object()) fail(Errc::SchemaError, where + " must be an object of split -> path");
  std::map<std::string, std::filesystem::path> out;
  for (const auto& [split, value] : obj.items()) {
    if (split.empty()) fail(Errc::SchemaError, where + ": empty split name");
    out.emplace(split, resolve(base, as_string(value, where + "." + split)));
  }
  return out;
}

MatrixShape shape_of(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(Errc::UnreadableMatrix, "missing file " + path.string());
  try {
    return read_matrix_shape(path);
  } catch (const Error& e) {
    fail(Errc::UnreadableMatrix, path.string() + ": " + e.what());
  }
}

// Every split of one kind must share cols; returns that cols (0 if none).
std::size_t check_uniform_cols(const std::map<std::string, std::filesystem::path>& paths,
                               std::map<std::string, std::size_t>& rows_out, const std::string& where) {
  std::size_t cols = 0;
  std::string first;
  for (const auto& [split, path] : paths) {
    const auto shape = shape_of(path);
    if (cols == 0) {
      cols = shape.cols;
      first = split;
    } else if (shape.cols != cols) {
      fail(Errc::DimMismatch, where + ": split '" + split + "' has cols=" + std::to_string(shape.cols) +
                                  " but '" + first + "' has cols=" + std::to_string(cols));
    }
    rows_out[split] = shape.rows;
  }
  return cols;
}

}  // namespace

DatasetRole DatasetRole::parse(std::string_view name) {
  if (name.empty()) fail(Errc::ConfigError, "empty split name");
  DatasetRole role;
  role.name = std::string(name);
  if (name == kIdTrain) {
    role.kind = Kind::id_train;
  } else if (name == kIdVal) {
    role.kind = Kind::id_val;
  } else if (name == kTestId) {
    role.kind = Kind::test_id;
  } else {
    role.kind = Kind::test_ood;
  }
  return role;
}

bool ModelEntry::has_features(std::string_view split) const {
  return feature_paths.contains(std::string(split));
}

bool ModelEntry::has_logits(std::string_view split) const { return logit_paths.contains(std::string(split)); }

std::vector<std::string> ModelEntry::splits() const {
  std::set<std::string> names;
  for (const auto& [s, _] : feature_paths) names.insert(s);
  for (const auto& [s, _] : logit_paths) names.insert(s);
  return {names.begin(), names.end()};
}

std::vector<std::string> ZooManifest::model_names() const {
  std::vector<std::string> names;
  names.reserve(models.size());
  for (const auto& m : models) names.push_back(m.name);
  return names;
}

std::vector<std::string> ZooManifest::common_splits() const {
  if (models.empty()) return {};
  std::vector<std::string> common = models.front().splits();
  for (std::size_t j = 1; j < models.size(); ++j) {
    const auto other = models[j].splits();
    std::vector<std::string> keep;
    std::set_intersection(common.begin(), common.end(), other.begin(), other.end(), std::back_inserter(keep));
    common = std::move(keep);
  }
  return common;
}

std::vector<std::string> ZooManifest::ood_splits() const {
  std::vector<std::string> out;
  for (auto& s : common_splits()) {
    if (DatasetRole::parse(s).is_ood()) out.push_back(s);
  }
  return out;
}

ZooManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(Errc::SchemaError, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(Errc::SchemaError, "manifest root must be an object");
  reject_unknown(doc, kTopKeys, "manifest");

  ZooManifest zoo;
  zoo.base_dir = base_dir;
  zoo.source_hash = fnv1a64_hex(json_text);
  zoo.score.kind = as_kind(require(doc, "score", "manifest"), "score");
  if (doc.contains("k")) zoo.score.k = as_count(doc["k"], "k");
  if (doc.contains("temperature")) zoo.score.temperature = as_number(doc["temperature"], "temperature");
  if (doc.contains("normalize")) zoo.score.normalize = as_bool(doc["normalize"], "normalize");
  if (doc.contains("tpr0")) {
    const double t = as_number(doc["tpr0"], "tpr0");
    if (!(t > 0.0 && t < 1.0)) fail(Errc::SchemaError, "tpr0 must lie in (0, 1)");
    zoo.tpr0 = t;
  }
  try {
    zoo.score.validate();
  } catch (const Error& e) {
    fail(Errc::SchemaError, e.what());
  }

  const json& models = require(doc, "models", "manifest");
  if (!models.is_array()) fail(Errc::SchemaError, "models must be an array");
  if (models.empty()) fail(Errc::SchemaError, "models must not be empty");

  std::set<std::string> seen;
  std::map<std::string, std::pair<std::string, std::size_t>> split_rows;  // split -> (model, rows)
  for (std::size_t j = 0; j < models.size(); ++j) {
    const json& entry = models[j];
    const std::string where = "models[" + std::to_string(j) + "]";
    if (!entry.is_object()) fail(Errc::SchemaError, where + " must be an object");
    reject_unknown(entry, kModelKeys, where);

    ModelEntry model;
    model.name = as_string(require(entry, "name", where), where + ".name");
    if (model.name.empty()) fail(Errc::SchemaError, where + ".name must not be empty");
    if (!seen.insert(model.name).second) {
      fail(Errc::DuplicateModelName, "model name '" + model.name + "' appears more than once");
    }
    if (entry.contains("features")) model.feature_paths = read_paths(entry["features"], base_dir, where + ".features");
    if (entry.contains("logits")) model.logit_paths = read_paths(entry["logits"], base_dir, where + ".logits");
    if (entry.contains("labels")) model.labels_path = resolve(base_dir, as_string(entry["labels"], where + ".labels"));

    model.score = zoo.score;
    if (entry.contains("score")) model.score.kind = as_kind(entry["score"], where + ".score");
    if (entry.contains("k")) model.score.k = as_count(entry["k"], where + ".k");
    if (entry.contains("temperature")) model.score.temperature = as_number(entry["temperature"], where + ".temperature");
    if (entry.contains("normalize")) model.score.normalize = as_bool(entry["normalize"], where + ".normalize");
    if (entry.contains("cov_ridge")) model.score.cov_ridge = as_number(entry["cov_ridge"], where + ".cov_ridge");
    try {
      model.score.validate();
    } catch (const Error& e) {
      fail(Errc::SchemaError, where + ": " + e.what());
    }

    for (auto split : {kIdTrain, kIdVal}) {
      if (!model.has_features(split) && !model.has_logits(split)) {
        fail(Errc::MissingSplit, "model '" + model.name + "' lacks split '" + std::string(split) + "'");
      }
    }

    std::map<std::string, std::size_t> feature_rows, logit_rows;
    check_uniform_cols(model.feature_paths, feature_rows, "model '" + model.name + "' features");
    check_uniform_cols(model.logit_paths, logit_rows, "model '" + model.name + "' logits");
    for (const auto& [split, rows] : logit_rows) {
      auto it = feature_rows.find(split);
      if (it != feature_rows.end() && it->second != rows) {
        fail(Errc::DimMismatch, "model '" + model.name + "' split '" + split + "': features have " +
                                    std::to_string(it->second) + " rows, logits " + std::to_string(rows));
      }
      feature_rows.emplace(split, rows);
    }
    for (const auto& [split, rows] : feature_rows) {
      auto [it, inserted] = split_rows.emplace(split, std::make_pair(model.name, rows));
      if (!inserted && it->second.second != rows && DatasetRole::parse(split).kind != DatasetRole::Kind::id_train) {
        fail(Errc::DimMismatch, "split '" + split + "' has " + std::to_string(rows) + " rows for model '" +
                                    model.name + "' but " + std::to_string(it->second.second) + " for '" +
                                    it->second.first + "'");
      }
    }
    if (model.labels_path) {
      const auto shape = shape_of(*model.labels_path);
      auto it = feature_rows.find(std::string(kIdTrain));
      if (shape.cols != 1 || (it != feature_rows.end() && shape.rows != it->second)) {
        fail(Errc::DimMismatch, "model '" + model.name + "': labels must be an n_train x 1 matrix");
      }
    }
    zoo.models.push_back(std::move(model));
  }
  return zoo;
}

ZooManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::SchemaError, "cannot read manifest " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str(), path.parent_path());
}

std::vector<int> read_labels(const std::filesystem::path& path) {
  const auto m = read_matrix(path, true);
  if (m.cols() != 1) fail(Errc::DimMismatch, "labels file must have exactly one column");
  std::vector<int> labels;
  labels.reserve(m.rows());
  for (float v : m.data()) {
    if (v != std::floor(v) || v < 0.0f) fail(Errc::SchemaError, "labels must be nonnegative integers");
    labels.push_back(static_cast<int>(v));
  }
  return labels;
}

bool BundleSummary::all_ready() const noexcept {
  return std::all_of(models.begin(), models.end(), [](const ModelSummary& s) { return s.ready; });
}

BundleSummary validate_bundle(const ZooManifest& manifest) {
  if (manifest.models.empty()) fail(Errc::SchemaError, "models must not be empty");
  BundleSummary summary;
  summary.m = manifest.models.size();
  auto load = [](const std::filesystem::path& p) {
    try {
      return read_matrix(p, true);
    } catch (const Error& e) {
      fail(Errc::UnreadableMatrix, p.string() + ": " + e.what());
    }
  };
  for (const auto& model : manifest.models) {
    ModelSummary s;
    s.name = model.name;
    s.kind = model.score.kind;
    std::map<std::string, std::size_t> rows;
    for (const auto& [split, path] : model.feature_paths) {
      const auto m = load(path);
      s.feature_dim = m.cols();
      rows[split] = m.rows();
    }
    for (const auto& [split, path] : model.logit_paths) {
      const auto m = load(path);
      s.logit_dim = m.cols();
      rows[split] = m.rows();
    }
    s.n_train = rows[std::string(kIdTrain)];
    s.n_val = rows[std::string(kIdVal)];

    std::vector<std::string> missing;
    const auto& paths = model.score.needs_logits() ? model.logit_paths : model.feature_paths;
    const char* what = model.score.needs_logits() ? "logits" : "features";
    for (const auto& split : model.splits()) {
      if (split == kIdTrain && model.score.needs_logits()) continue;  // logit scores need no bank
      if (!paths.contains(split)) missing.push_back("missing " + std::string(what) + " for '" + split + "'");
    }
    if (model.score.kind == ScoreKind::knn && s.n_train > 0 && s.n_train < model.score.k) {
      missing.push_back("id_train has fewer rows than k=" + std::to_string(model.score.k));
    }
    if (model.score.kind == ScoreKind::mahalanobis) {
      if (!model.labels_path) {
        missing.push_back("missing labels for 'id_train'");
      } else {
        try {
          read_labels(*model.labels_path);
        } catch (const Error& e) {
          fail(Errc::UnreadableMatrix, model.labels_path->string() + ": " + e.what());
        }
      }
    }
    s.ready = missing.empty();
    for (std::size_t i = 0; i < missing.size(); ++i) s.reason += (i ? "; " : "") + missing[i];
    summary.models.push_back(std::move(s));
  }
  return summary;
}

}  // namespace oodzoo
