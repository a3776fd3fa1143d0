#include "oodzoo/pvalue.hpp"

#include <algorithm>
#include <cmath>

#include "oodzoo/error.hpp"

namespace oodzoo {
namespace {

void check_tpr0(double tpr0) {
  if (!(tpr0 > 0.0 && tpr0 < 1.0)) fail(Errc::ConfigError, "tpr0 must lie in (0, 1)");
}

}  // namespace

std::string_view to_string(Label label) noexcept { return label == Label::id ? "ID" : "OOD"; }

double alpha_from_tpr0(double tpr0) noexcept { return std::round((1.0 - tpr0) * 1e12) / 1e12; }

EmpiricalCdf::EmpiricalCdf(std::vector<double> sorted_scores, std::string model_name)
    : sorted_(std::move(sorted_scores)), name_(std::move(model_name)) {
  if (sorted_.empty()) fail(Errc::EmptyInput, "reference scores are empty");
  if (!std::is_sorted(sorted_.begin(), sorted_.end())) fail(Errc::ConfigError, "reference scores not sorted");
}

std::size_t EmpiricalCdf::count_at_or_below(double s) const noexcept {
  return static_cast<std::size_t>(std::upper_bound(sorted_.begin(), sorted_.end(), s) - sorted_.begin());
}

EmpiricalCdf build_cdf(std::span<const double> ref_scores, std::string model_name) {
  if (ref_scores.empty()) fail(Errc::EmptyInput, "reference scores are empty");
  std::vector<double> sorted(ref_scores.begin(), ref_scores.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) fail(Errc::NonFiniteInput, "non-finite reference score");
  }
  std::sort(sorted.begin(), sorted.end());
  return EmpiricalCdf(std::move(sorted), std::move(model_name));
}

double empirical_pvalue(const EmpiricalCdf& cdf, double test_score, PValueOptions options) {
  if (!std::isfinite(test_score)) fail(Errc::NonFiniteInput, "non-finite test score");
  const auto count = static_cast<double>(cdf.count_at_or_below(test_score));
  const auto n = static_cast<double>(cdf.size());
  return options.conformal_smoothing ? (count + 1.0) / (n + 1.0) : count / n;
}

std::vector<double> PValueMatrix::column(std::size_t j) const {
  std::vector<double> col(n);
  for (std::size_t i = 0; i < n; ++i) col[i] = values[i * m + j];
  return col;
}

PValueMatrix PValueMatrix::select_columns(std::span<const std::size_t> columns) const {
  PValueMatrix out;
  out.n = n;
  out.m = columns.size();
  out.values.resize(out.n * out.m);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] >= m) fail(Errc::ConfigError, "column index out of range");
    if (!model_names.empty()) out.model_names.push_back(model_names[columns[c]]);
    for (std::size_t i = 0; i < n; ++i) out.values[i * out.m + c] = values[i * m + columns[c]];
  }
  return out;
}

std::vector<EmpiricalCdf> build_cdfs(const ScoreTable& ref) {
  std::vector<EmpiricalCdf> cdfs;
  cdfs.reserve(ref.m);
  for (std::size_t j = 0; j < ref.m; ++j) {
    cdfs.push_back(build_cdf(ref.column(j), j < ref.model_names.size() ? ref.model_names[j] : std::string{}));
  }
  return cdfs;
}

PValueMatrix pvalue_matrix(std::span<const EmpiricalCdf> cdfs, const ScoreTable& test, PValueOptions options) {
  if (cdfs.size() != test.m) {
    fail(Errc::ModelOrderMismatch, "reference has " + std::to_string(cdfs.size()) + " models, test has " +
                                       std::to_string(test.m));
  }
  for (std::size_t j = 0; j < cdfs.size(); ++j) {
    const auto& ref_name = cdfs[j].model_name();
    if (j < test.model_names.size() && !ref_name.empty() && ref_name != test.model_names[j]) {
      fail(Errc::ModelOrderMismatch, "column " + std::to_string(j) + " is '" + ref_name + "' in the reference but '" +
                                         test.model_names[j] + "' in the test table");
    }
  }
  PValueMatrix out;
  out.n = test.n;
  out.m = test.m;
  out.model_names = test.model_names;
  out.values.resize(test.values.size());
  for (std::size_t i = 0; i < test.n; ++i) {
    for (std::size_t j = 0; j < test.m; ++j) out.values[i * test.m + j] = empirical_pvalue(cdfs[j], test(i, j), options);
  }
  return out;
}

PValueMatrix pvalue_matrix(const ScoreTable& ref, const ScoreTable& test, PValueOptions options) {
  if (ref.m != test.m) {
    fail(Errc::ModelOrderMismatch, "reference has " + std::to_string(ref.m) + " models, test has " +
                                       std::to_string(test.m));
  }
  const auto cdfs = build_cdfs(ref);
  return pvalue_matrix(cdfs, test, options);
}

std::size_t rejection_rank(double tpr0, std::size_t n) noexcept {
  const double exact = alpha_from_tpr0(tpr0) * static_cast<double>(n);
  return static_cast<std::size_t>(std::floor(exact + 1e-9));
}

double threshold_at_tpr(const EmpiricalCdf& cdf, double tpr0) {
  check_tpr0(tpr0);
  const std::size_t rank = rejection_rank(tpr0, cdf.size());
  if (rank == 0) return kNoThreshold;
  return cdf.sorted_scores()[rank - 1];
}

Label threshold_decision(double score, double lambda) noexcept { return score >= lambda ? Label::id : Label::ood; }

ThresholdSet thresholds_at_tpr(std::span<const EmpiricalCdf> cdfs, double tpr0) {
  ThresholdSet set;
  set.tpr0 = tpr0;
  for (const auto& cdf : cdfs) set.lambdas.push_back(threshold_at_tpr(cdf, tpr0));
  return set;
}

}  // namespace oodzoo
