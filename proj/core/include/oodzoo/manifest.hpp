#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oodzoo/scores.hpp"

namespace oodzoo {

/// Role of a dataset split. id_val must come from the ID distribution and be
/// disjoint from id_train; that is a contract on the input files which the
/// library cannot check.
struct DatasetRole {
  enum class Kind { id_train, id_val, test_id, test_ood };
  Kind kind = Kind::id_val;
  std::string name;  // split key as it appears in the manifest

  static DatasetRole parse(std::string_view name);
  bool is_ood() const noexcept { return kind == Kind::test_ood; }

  friend bool operator==(const DatasetRole&, const DatasetRole&) = default;
};

inline constexpr std::string_view kIdTrain = "id_train";
inline constexpr std::string_view kIdVal = "id_val";
inline constexpr std::string_view kTestId = "test_id";

struct ModelEntry {
  std::string name;
  std::map<std::string, std::filesystem::path> feature_paths;
  std::map<std::string, std::filesystem::path> logit_paths;
  std::optional<std::filesystem::path> labels_path;  // class indices for id_train
  ScoreConfig score;                                   // effective (global + overrides)

  bool has_features(std::string_view split) const;
  bool has_logits(std::string_view split) const;
  /// Split names present in either features or logits, sorted.
  std::vector<std::string> splits() const;
};

struct ZooManifest {
  std::vector<ModelEntry> models;  // order defines column j downstream
  ScoreConfig score;               // global default
  std::optional<double> tpr0;
  std::filesystem::path base_dir;  // relative paths were resolved against this
  std::string source_hash;         // FNV-1a of the manifest text

  std::size_t size() const noexcept { return models.size(); }
  std::vector<std::string> model_names() const;
  /// Split names shared by every model, sorted.
  std::vector<std::string> common_splits() const;
  /// OOD split names shared by every model, sorted.
  std::vector<std::string> ood_splits() const;
};

/// Strict-schema JSON loader. Relative paths are resolved against the
/// directory containing the manifest. Checks that referenced matrices exist
/// and that all splits of one model agree on cols.
ZooManifest load_manifest(const std::filesystem::path& path);
ZooManifest parse_manifest(std::string_view json_text, const std::filesystem::path& base_dir);

struct ModelSummary {
  std::string name;
  ScoreKind kind = ScoreKind::knn;
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  std::size_t feature_dim = 0;  // 0 when no features
  std::size_t logit_dim = 0;    // 0 when no logits
  bool ready = false;
  std::string reason;  // why not ready
};

struct BundleSummary {
  std::size_t m = 0;
  std::vector<ModelSummary> models;
  bool all_ready() const noexcept;
};

/// Reads every referenced matrix (with NaN/Inf validation) and reports
/// per-model readiness. Missing inputs for a model's score kind are reported,
/// not thrown. Never writes.
BundleSummary validate_bundle(const ZooManifest& manifest);

/// Reads a labels file (n x 1 matrix of integral values).
std::vector<int> read_labels(const std::filesystem::path& path);

}  // namespace oodzoo
