#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oodzoo/ensemble.hpp"
#include "oodzoo/manifest.hpp"
#include "oodzoo/pvalue.hpp"
#include "oodzoo/score_table.hpp"

namespace oodzoo {

/// Contingency counts with ID as the null: U/V are ID samples detected
/// ID/OOD, T/S are OOD samples detected ID/OOD, k = V + S.
struct DetectionCounts {
  std::size_t U = 0, V = 0, T = 0, S = 0;
  std::size_t m0 = 0, m1 = 0, k = 0;

  bool consistent() const noexcept { return U + V == m0 && T + S == m1 && k == V + S; }
  friend bool operator==(const DetectionCounts&, const DetectionCounts&) = default;
};

DetectionCounts confusion(std::span<const Label> id_labels, std::span<const Label> ood_labels);
DetectionCounts confusion(std::span<const Decision> id_decisions, std::span<const Decision> ood_decisions);

struct Rates {
  double tpr = 0.0;  // U / m0
  double fpr = 0.0;  // T / m1
};

Rates tpr_fpr(const DetectionCounts& c);

struct AucPoint {
  double level = 0.0;  // target TPR level used for this point
  double tpr = 0.0;
  double fpr = 0.0;
};

struct AucGrid {
  double step = 0.0005;
  std::vector<AucPoint> points;  // 1/step + 1 entries, levels 0..1
};

struct AucResult {
  double auc = 0.0;
  AucGrid grid;
};

inline constexpr double kDefaultAucStep = 0.0005;

/// Number of grid intervals for `step`; throws ConfigError unless step > 0
/// divides 1 within 1e-9.
std::size_t grid_intervals(double step);

/// Sweeps the target level t over {0, step, ..., 1}, applies `scheme` at
/// tpr0 = t to both matrices, and integrates TPR against FPR with the
/// trapezoid rule after adding the (0,0) and (1,1) endpoints.
AucResult auc_sweep(const PValueMatrix& id_pvals, const PValueMatrix& ood_pvals, Scheme scheme,
                    double step = kDefaultAucStep);

/// Trapezoidal area under (fpr, tpr) points; sorts a copy and adds (0,0), (1,1).
double trapezoid_auc(std::vector<std::pair<double, double>> fpr_tpr);

/// Classic ROC AUC of raw scores (higher = ID), ties counted half.
double rank_auc(std::span<const double> id_scores, std::span<const double> ood_scores);

struct ReportRow {
  std::string method;
  std::string dataset;
  double tpr = 0.0;  // percent
  double fpr = 0.0;  // percent
  double auc = 0.0;  // percent
};

inline constexpr const char* kAverageDataset = "Average";

struct DetectionReport {
  std::vector<ReportRow> rows;
  std::vector<std::pair<std::string, std::string>> metadata;

  const ReportRow* find(std::string_view method, std::string_view dataset) const;
  std::vector<std::string> methods() const;
};

struct EvaluateOptions {
  std::vector<Scheme> schemes{Scheme::bh};
  double tpr0 = 0.95;
  bool include_single = false;  // add one "single:<model>" row group per model
  double auc_step = kDefaultAucStep;
  PValueOptions pvalue;
  std::size_t threads = 1;
};

/// Runs p-values -> ensemble -> metrics on precomputed score tables.
/// TPR comes from `id_test`; FPR and AUC from each OOD table. Each method
/// gets one row per dataset followed by an unweighted "Average" row.
DetectionReport evaluate_tables(const ScoreTable& reference, const ScoreTable& id_test,
                                const std::vector<std::pair<std::string, ScoreTable>>& ood_tests,
                                const EvaluateOptions& options);

struct BenchOptions {
  EvaluateOptions evaluate;
  std::vector<std::string> ood_splits;  // empty = every OOD split shared by all models
  std::string reference = std::string(kIdVal);
  std::string id_test = std::string(kTestId);
  std::uint64_t seed = 0;  // recorded only; the pipeline itself draws no randomness
};

DetectionReport bench(const ZooManifest& manifest, const BenchOptions& options);

}  // namespace oodzoo
