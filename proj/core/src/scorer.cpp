#include "oodzoo/score_table.hpp"

#include <fstream>

#include <json.hpp>

#include "oodzoo/error.hpp"
#include "oodzoo/parallel.hpp"

namespace oodzoo {

std::vector<double> ScoreTable::column(std::size_t j) const {
  std::vector<double> col(n);
  for (std::size_t i = 0; i < n; ++i) col[i] = values[i * m + j];
  return col;
}

ScoreTable ScoreTable::from_columns(const std::vector<std::vector<double>>& columns,
                                    std::vector<std::string> model_names, std::vector<ScoreConfig> configs,
                                    std::string split) {
  if (columns.size() != model_names.size()) fail(Errc::ModelOrderMismatch, "column/name count differ");
  ScoreTable t;
  t.m = columns.size();
  t.n = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != t.n) fail(Errc::DimMismatch, "score columns differ in length");
  }
  t.values.resize(t.n * t.m);
  for (std::size_t j = 0; j < t.m; ++j) {
    for (std::size_t i = 0; i < t.n; ++i) t.values[i * t.m + j] = columns[j][i];
  }
  t.model_names = std::move(model_names);
  t.configs = std::move(configs);
  if (t.configs.empty()) t.configs.resize(t.m);
  t.split = std::move(split);
  return t;
}

ModelScorer::ModelScorer(ScoreConfig config, const FeatureMatrix* train, std::span<const int> labels)
    : config_(config) {
  config_.validate();
  switch (config_.kind) {
    case ScoreKind::msp:
    case ScoreKind::energy:
      break;
    case ScoreKind::knn:
      if (train == nullptr) fail(Errc::MissingInput, "KNN needs id_train features");
      if (train->rows() < config_.k) {
        fail(Errc::KTooLarge, "k=" + std::to_string(config_.k) + " exceeds bank size " + std::to_string(train->rows()));
      }
      knn_.emplace(*train, config_.normalize);
      break;
    case ScoreKind::mahalanobis:
      if (train == nullptr) fail(Errc::MissingInput, "Mahalanobis needs id_train features");
      if (labels.empty()) fail(Errc::MissingInput, "Mahalanobis needs id_train labels");
      mahalanobis_ = fit_mahalanobis(*train, labels, std::nullopt, config_.cov_ridge);
      break;
  }
}

double ModelScorer::score_one(std::span<const float> input) const {
  switch (config_.kind) {
    case ScoreKind::msp: return msp_score(input);
    case ScoreKind::energy: return energy_score(input, config_.temperature);
    case ScoreKind::knn: return knn_->score(input, config_.k);
    case ScoreKind::mahalanobis: return mahalanobis_score(*mahalanobis_, input);
  }
  return 0.0;
}

std::vector<double> ModelScorer::score_rows(const FeatureMatrix& inputs, std::size_t threads) const {
  std::vector<double> out(inputs.rows());
  for_each_block(inputs.rows(), 256, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<double> scratch;
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = config_.kind == ScoreKind::knn ? knn_->score(inputs.row(i), config_.k, scratch)
                                              : score_one(inputs.row(i));
    }
  });
  return out;
}

ZooScorer::ZooScorer(const ZooManifest& manifest, std::size_t threads)
    : manifest_(&manifest), threads_(threads), scorers_(manifest.models.size()) {}
ZooScorer::~ZooScorer() = default;
ZooScorer::ZooScorer(ZooScorer&&) noexcept = default;
ZooScorer& ZooScorer::operator=(ZooScorer&&) noexcept = default;

const std::filesystem::path& ZooScorer::input_path(std::size_t j, const DatasetRole& role) const {
  const auto& model = manifest_->models[j];
  const auto& paths = model.score.needs_logits() ? model.logit_paths : model.feature_paths;
  auto it = paths.find(role.name);
  if (it == paths.end()) {
    const bool split_exists = model.has_features(role.name) || model.has_logits(role.name);
    if (!split_exists) fail(Errc::MissingSplit, "model '" + model.name + "' has no split '" + role.name + "'");
    fail(Errc::MissingInput, "model '" + model.name + "' is configured for " +
                                 std::string(to_string(model.score.kind)) + " but split '" + role.name +
                                 "' has no " + (model.score.needs_logits() ? "logits" : "features"));
  }
  return it->second;
}

const ModelScorer& ZooScorer::scorer(std::size_t j) {
  if (!scorers_[j]) {
    const auto& model = manifest_->models[j];
    if (model.score.needs_logits()) {
      scorers_[j] = std::make_unique<ModelScorer>(model.score, nullptr);
    } else {
      auto it = model.feature_paths.find(std::string(kIdTrain));
      if (it == model.feature_paths.end()) {
        fail(Errc::MissingInput, "model '" + model.name + "' needs id_train features for " +
                                     std::string(to_string(model.score.kind)));
      }
      const FeatureMatrix train = read_matrix(it->second, true);
      std::vector<int> labels;
      if (model.score.kind == ScoreKind::mahalanobis) {
        if (!model.labels_path) fail(Errc::MissingInput, "model '" + model.name + "' needs labels for mahalanobis");
        labels = read_labels(*model.labels_path);
      }
      scorers_[j] = std::make_unique<ModelScorer>(model.score, &train, labels);
    }
  }
  return *scorers_[j];
}

std::size_t ZooScorer::split_rows(const DatasetRole& role) const {
  if (manifest_->models.empty()) return 0;
  return read_matrix_shape(input_path(0, role)).rows;
}

ScoreTable ZooScorer::table(const DatasetRole& role, std::size_t first, std::size_t count) {
  const std::size_t m = manifest_->models.size();
  std::vector<std::vector<double>> columns(m);
  std::vector<ScoreConfig> configs(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& path = input_path(j, role);
    const ModelScorer& s = scorer(j);
    FeatureMatrix inputs = read_matrix(path, true);
    if (first != 0 || count != std::string::npos) {
      if (first >= inputs.rows()) {
        fail(Errc::ConfigError, "row " + std::to_string(first) + " out of range for split '" + role.name +
                                    "' with " + std::to_string(inputs.rows()) + " rows");
      }
      const std::size_t last = count == std::string::npos ? inputs.rows() : std::min(inputs.rows(), first + count);
      std::vector<float> slice(inputs.data().begin() + static_cast<std::ptrdiff_t>(first * inputs.cols()),
                               inputs.data().begin() + static_cast<std::ptrdiff_t>(last * inputs.cols()));
      inputs = FeatureMatrix(last - first, inputs.cols(), std::move(slice));
    }
    columns[j] = s.score_rows(inputs, threads_);
    configs[j] = s.config();
    if (j > 0 && columns[j].size() != columns[0].size()) {
      fail(Errc::DimMismatch, "split '" + role.name + "' row count differs between models");
    }
  }
  return ScoreTable::from_columns(columns, manifest_->model_names(), std::move(configs), role.name);
}

ScoreTable score_table(const ZooManifest& manifest, const DatasetRole& role, std::size_t threads) {
  ZooScorer scorer(manifest, threads);
  return scorer.table(role);
}

void write_score_table(const ScoreTable& table, const std::filesystem::path& stem) {
  if (table.n == 0 || table.m == 0) fail(Errc::EmptyInput, "cannot persist an empty score table");
  std::vector<float> data(table.values.begin(), table.values.end());
  write_matrix(FeatureMatrix(table.n, table.m, std::move(data)), stem.string() + ".zfm");

  nlohmann::ordered_json sidecar;
  sidecar["kind"] = "score_table";
  sidecar["split"] = table.split;
  sidecar["rows"] = table.n;
  sidecar["cols"] = table.m;
  sidecar["models"] = table.model_names;
  auto& cfgs = sidecar["score_configs"] = nlohmann::ordered_json::array();
  for (const auto& c : table.configs) {
    nlohmann::ordered_json e;
    e["kind"] = to_string(c.kind);
    e["k"] = c.k;
    e["temperature"] = c.temperature;
    e["normalize"] = c.normalize;
    e["cov_ridge"] = c.cov_ridge;
    cfgs.push_back(e);
  }
  std::ofstream out(stem.string() + ".json", std::ios::trunc);
  if (!out) fail(Errc::IoError, "cannot write " + stem.string() + ".json");
  out << sidecar.dump(2) << '\n';
}

}  // namespace oodzoo
