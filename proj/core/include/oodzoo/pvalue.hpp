#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "oodzoo/score_table.hpp"

namespace oodzoo {

enum class Label { id, ood };

std::string_view to_string(Label label) noexcept;

/// alpha = 1 - tpr0, snapped to a 1e-12 grid so that e.g. tpr0 = 0.95
/// gives exactly the double nearest 0.05 (the same double as 500 / 10000).
double alpha_from_tpr0(double tpr0) noexcept;

/// ID validation scores of one model, sorted ascending.
class EmpiricalCdf {
 public:
  EmpiricalCdf() = default;
  explicit EmpiricalCdf(std::vector<double> sorted_scores, std::string model_name = {});

  std::span<const double> sorted_scores() const noexcept { return sorted_; }
  std::size_t size() const noexcept { return sorted_.size(); }
  const std::string& model_name() const noexcept { return name_; }

  /// #{ref <= s}, by binary search.
  std::size_t count_at_or_below(double s) const noexcept;

 private:
  std::vector<double> sorted_;
  std::string name_;
};

EmpiricalCdf build_cdf(std::span<const double> ref_scores, std::string model_name = {});

struct PValueOptions {
  /// (count + 1) / (n_ref + 1) instead of count / n_ref.
  bool conformal_smoothing = false;
};

/// #{ref <= test_score} / n_ref.
double empirical_pvalue(const EmpiricalCdf& cdf, double test_score, PValueOptions options = {});

/// n x m p-values. Values are not range-checked here; the ensemble
/// functions reject anything outside [0, 1].
struct PValueMatrix {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> values;  // row-major
  std::vector<std::string> model_names;

  double operator()(std::size_t i, std::size_t j) const noexcept { return values[i * m + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {values.data() + i * m, m}; }
  std::vector<double> column(std::size_t j) const;
  /// Keeps only the listed model columns, in the given order.
  PValueMatrix select_columns(std::span<const std::size_t> columns) const;
};

std::vector<EmpiricalCdf> build_cdfs(const ScoreTable& ref);

/// Entry (i, j) = empirical_pvalue(cdf of ref column j, test(i, j)).
/// Throws ModelOrderMismatch unless ref and test list the same models in
/// the same order.
PValueMatrix pvalue_matrix(const ScoreTable& ref, const ScoreTable& test, PValueOptions options = {});
PValueMatrix pvalue_matrix(std::span<const EmpiricalCdf> cdfs, const ScoreTable& test, PValueOptions options = {});

inline constexpr double kNoThreshold = -std::numeric_limits<double>::infinity();

/// Number of reference points allowed below the threshold: floor((1 - tpr0) * n).
std::size_t rejection_rank(double tpr0, std::size_t n) noexcept;

/// The floor((1 - tpr0) * n)-th order statistic (1-indexed) of the reference,
/// or kNoThreshold when that rank is 0.
double threshold_at_tpr(const EmpiricalCdf& cdf, double tpr0);

/// ID iff score >= lambda.
Label threshold_decision(double score, double lambda) noexcept;

struct ThresholdSet {
  std::vector<double> lambdas;
  double tpr0 = 0.95;
};

ThresholdSet thresholds_at_tpr(std::span<const EmpiricalCdf> cdfs, double tpr0);

}  // namespace oodzoo
