#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oodzoo/matrix.hpp"

namespace oodzoo {

// All scores are oriented so that higher means more in-distribution.
enum class ScoreKind { msp, energy, mahalanobis, knn };

std::string_view to_string(ScoreKind kind) noexcept;
/// Throws ConfigError on an unknown name.
ScoreKind parse_score_kind(std::string_view name);

struct ScoreConfig {
  ScoreKind kind = ScoreKind::knn;
  std::size_t k = 50;
  double temperature = 1.0;
  bool normalize = true;
  double cov_ridge = 1e-6;

  /// Throws ConfigError when k == 0, temperature <= 0 or cov_ridge < 0.
  void validate() const;

  bool needs_logits() const noexcept { return kind == ScoreKind::msp || kind == ScoreKind::energy; }
  bool needs_features() const noexcept { return !needs_logits(); }

  friend bool operator==(const ScoreConfig&, const ScoreConfig&) = default;
};

double msp_score(std::span<const double> logits);
double msp_score(std::span<const float> logits);

/// Negated free energy, T * logsumexp(logits / T).
double energy_score(std::span<const double> logits, double temperature = 1.0);
double energy_score(std::span<const float> logits, double temperature = 1.0);

/// Class-conditional Gaussians with one shared covariance. Storage is
/// row-major: class_means is class_count x dim, precision is dim x dim.
struct MahalanobisModel {
  std::size_t class_count = 0;
  std::size_t dim = 0;
  std::vector<double> class_means;
  std::vector<double> precision;
  double cov_ridge = 0.0;

  std::span<const double> mean(std::size_t c) const noexcept {
    return {class_means.data() + c * dim, dim};
  }
};

/// Fits per-class means and the inverse of (pooled within-class scatter / n
/// + cov_ridge * I). When class_count is not given it is max(label) + 1.
MahalanobisModel fit_mahalanobis(const FeatureMatrix& features, std::span<const int> labels,
                                 std::optional<std::size_t> class_count = std::nullopt,
                                 double cov_ridge = 1e-6);

/// -min_c (z - mu_c)^T P (z - mu_c).
double mahalanobis_score(const MahalanobisModel& model, std::span<const double> feature);
double mahalanobis_score(const MahalanobisModel& model, std::span<const float> feature);

/// -(Euclidean distance from query to its k-th nearest bank row), with
/// optional L2 normalization of query and bank rows.
double knn_score(std::span<const float> query, const FeatureMatrix& bank, std::size_t k,
                 bool normalize = true);

/// Bank prepared once (normalized, widened to double) and reused across
/// queries. knn_score is a thin wrapper over this class, so both paths agree
/// bit-for-bit.
class KnnIndex {
 public:
  KnnIndex(const FeatureMatrix& bank, bool normalize);

  std::size_t size() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  bool normalized() const noexcept { return normalize_; }

  double score(std::span<const float> query, std::size_t k) const;
  /// Same as score() but reuses a caller-owned scratch buffer.
  double score(std::span<const float> query, std::size_t k, std::vector<double>& scratch) const;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  bool normalize_ = true;
  std::vector<double> bank_;
};

/// Converts a float row to double and, if requested, scales it to unit L2
/// norm. Throws ZeroNormVector when normalizing a zero vector.
std::vector<double> prepare_feature(std::span<const float> v, bool normalize);

}  // namespace oodzoo
