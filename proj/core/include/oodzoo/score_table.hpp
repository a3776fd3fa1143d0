#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oodzoo/manifest.hpp"
#include "oodzoo/matrix.hpp"
#include "oodzoo/scores.hpp"

namespace oodzoo {

/// n x m detection scores, column j from models[j] under configs[j].
struct ScoreTable {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> values;  // row-major
  std::vector<std::string> model_names;
  std::vector<ScoreConfig> configs;
  std::string split;

  double operator()(std::size_t i, std::size_t j) const noexcept { return values[i * m + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {values.data() + i * m, m}; }
  std::vector<double> column(std::size_t j) const;

  /// Builds a table from per-model score columns of equal length.
  static ScoreTable from_columns(const std::vector<std::vector<double>>& columns,
                                 std::vector<std::string> model_names, std::vector<ScoreConfig> configs = {},
                                 std::string split = {});
};

/// One model's fitted scorer: a prepared KNN bank, a fitted Mahalanobis
/// model, or nothing for the logit-based scores.
class ModelScorer {
 public:
  /// `train` is required for knn/mahalanobis; `labels` for mahalanobis.
  ModelScorer(ScoreConfig config, const FeatureMatrix* train, std::span<const int> labels = {});

  const ScoreConfig& config() const noexcept { return config_; }

  double score_one(std::span<const float> input) const;
  /// Scores every row of `inputs` (features or logits as the kind demands).
  std::vector<double> score_rows(const FeatureMatrix& inputs, std::size_t threads = 1) const;

 private:
  ScoreConfig config_;
  std::optional<KnnIndex> knn_;
  std::optional<MahalanobisModel> mahalanobis_;
};

/// Lazily loads each model's training inputs from a manifest and scores
/// whole splits. Column order follows the manifest.
class ZooScorer {
 public:
  explicit ZooScorer(const ZooManifest& manifest, std::size_t threads = 1);
  ~ZooScorer();
  ZooScorer(ZooScorer&&) noexcept;
  ZooScorer& operator=(ZooScorer&&) noexcept;

  /// Rows [first, first + count) of `role`; count == npos means to the end.
  ScoreTable table(const DatasetRole& role, std::size_t first = 0, std::size_t count = std::string::npos);
  std::size_t split_rows(const DatasetRole& role) const;

 private:
  const ModelScorer& scorer(std::size_t j);
  const std::filesystem::path& input_path(std::size_t j, const DatasetRole& role) const;

  const ZooManifest* manifest_;
  std::size_t threads_;
  std::vector<std::unique_ptr<ModelScorer>> scorers_;
};

ScoreTable score_table(const ZooManifest& manifest, const DatasetRole& role, std::size_t threads = 1);

/// Writes <stem>.zfm (float32 payload) and <stem>.json (column names, score
/// configs, split).
void write_score_table(const ScoreTable& table, const std::filesystem::path& stem);

}  // namespace oodzoo
