#include "oodzoo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "oodzoo/error.hpp"
#include "oodzoo/parallel.hpp"
#include "oodzoo/report.hpp"

namespace oodzoo {
namespace {

// For each row, the largest grid index i at which the row is OOD, or -1.
// OOD is monotone in alpha, and alpha is nonincreasing in i, so the OOD
// levels of a row form a prefix [0, last] and binary search finds `last`.
std::vector<std::ptrdiff_t> last_ood_level(const PValueMatrix& pmat, Scheme scheme,
                                           std::span<const double> alphas) {
  std::vector<std::ptrdiff_t> out(pmat.n, -1);
  const auto levels = static_cast<std::ptrdiff_t>(alphas.size());
  for (std::size_t i = 0; i < pmat.n; ++i) {
    const SortedPValues row(pmat.row(i));
    std::ptrdiff_t lo = 0, hi = levels;  // first level in [lo, hi) that is ID
    while (lo < hi) {
      const std::ptrdiff_t mid = lo + (hi - lo) / 2;
      if (row.is_ood(scheme, alphas[static_cast<std::size_t>(mid)])) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    out[i] = lo - 1;
  }
  return out;
}

// id_counts[i] = rows labelled ID at level i.
std::vector<std::size_t> id_counts_per_level(const std::vector<std::ptrdiff_t>& last, std::size_t levels) {
  std::vector<std::size_t> became_id(levels + 1, 0);
  for (auto l : last) ++became_id[static_cast<std::size_t>(l + 1)];
  std::vector<std::size_t> counts(levels);
  std::size_t running = 0;
  for (std::size_t i = 0; i < levels; ++i) {
    running += became_id[i];
    counts[i] = running;
  }
  return counts;
}

void check_matrix(const PValueMatrix& p, const char* what) {
  if (p.n == 0) fail(Errc::EmptyInput, std::string(what) + " p-value matrix has no rows");
  if (p.m == 0 || p.values.size() != p.n * p.m) fail(Errc::DimMismatch, std::string(what) + " p-value matrix malformed");
}

}  // namespace

DetectionCounts confusion(std::span<const Label> id_labels, std::span<const Label> ood_labels) {
  if (id_labels.empty() || ood_labels.empty()) fail(Errc::EmptyInput, "confusion needs ID and OOD decisions");
  DetectionCounts c;
  c.m0 = id_labels.size();
  c.m1 = ood_labels.size();
  c.V = static_cast<std::size_t>(std::count(id_labels.begin(), id_labels.end(), Label::ood));
  c.U = c.m0 - c.V;
  c.S = static_cast<std::size_t>(std::count(ood_labels.begin(), ood_labels.end(), Label::ood));
  c.T = c.m1 - c.S;
  c.k = c.V + c.S;
  return c;
}

DetectionCounts confusion(std::span<const Decision> id_decisions, std::span<const Decision> ood_decisions) {
  const auto a = labels_of(id_decisions);
  const auto b = labels_of(ood_decisions);
  return confusion(a, b);
}

Rates tpr_fpr(const DetectionCounts& c) {
  if (c.m0 == 0 || c.m1 == 0) fail(Errc::DivisionByZeroGuard, "TPR/FPR need m0 > 0 and m1 > 0");
  return {static_cast<double>(c.U) / static_cast<double>(c.m0), static_cast<double>(c.T) / static_cast<double>(c.m1)};
}

std::size_t grid_intervals(double step) {
  if (!(step > 0.0 && step <= 1.0)) fail(Errc::ConfigError, "AUC step must lie in (0, 1]");
  const double intervals = std::round(1.0 / step);
  if (std::abs(intervals * step - 1.0) > 1e-9) fail(Errc::ConfigError, "AUC step must divide 1 evenly");
  return static_cast<std::size_t>(intervals);
}

double trapezoid_auc(std::vector<std::pair<double, double>> fpr_tpr) {
  fpr_tpr.emplace_back(0.0, 0.0);
  fpr_tpr.emplace_back(1.0, 1.0);
  std::sort(fpr_tpr.begin(), fpr_tpr.end());
  double area = 0.0;
  for (std::size_t i = 1; i < fpr_tpr.size(); ++i) {
    const auto [x0, y0] = fpr_tpr[i - 1];
    const auto [x1, y1] = fpr_tpr[i];
    area += (x1 - x0) * (y0 + y1) * 0.5;
  }
  return area;
}

AucResult auc_sweep(const PValueMatrix& id_pvals, const PValueMatrix& ood_pvals, Scheme scheme, double step) {
  check_matrix(id_pvals, "ID");
  check_matrix(ood_pvals, "OOD");
  if (id_pvals.m != ood_pvals.m) fail(Errc::ModelOrderMismatch, "ID and OOD p-values have different model counts");
  const std::size_t intervals = grid_intervals(step);
  const std::size_t levels = intervals + 1;

  std::vector<double> targets(levels), alphas(levels);
  for (std::size_t i = 0; i < levels; ++i) {
    targets[i] = static_cast<double>(i) / static_cast<double>(intervals);
    alphas[i] = alpha_from_tpr0(targets[i]);
  }

  const auto id_counts = id_counts_per_level(last_ood_level(id_pvals, scheme, alphas), levels);
  const auto ood_counts = id_counts_per_level(last_ood_level(ood_pvals, scheme, alphas), levels);

  AucResult result;
  result.grid.step = step;
  result.grid.points.reserve(levels);
  std::vector<std::pair<double, double>> curve;
  curve.reserve(levels);
  for (std::size_t i = 0; i < levels; ++i) {
    AucPoint pt;
    pt.level = targets[i];
    pt.tpr = static_cast<double>(id_counts[i]) / static_cast<double>(id_pvals.n);
    pt.fpr = static_cast<double>(ood_counts[i]) / static_cast<double>(ood_pvals.n);
    result.grid.points.push_back(pt);
    curve.emplace_back(pt.fpr, pt.tpr);
  }
  result.auc = trapezoid_auc(std::move(curve));
  return result;
}

double rank_auc(std::span<const double> id_scores, std::span<const double> ood_scores) {
  if (id_scores.empty() || ood_scores.empty()) fail(Errc::EmptyInput, "rank_auc needs both samples");
  std::vector<double> ood(ood_scores.begin(), ood_scores.end());
  std::sort(ood.begin(), ood.end());
  double wins = 0.0;
  for (double s : id_scores) {
    const auto below = std::lower_bound(ood.begin(), ood.end(), s) - ood.begin();
    const auto at_or_below = std::upper_bound(ood.begin(), ood.end(), s) - ood.begin();
    wins += static_cast<double>(below) + 0.5 * static_cast<double>(at_or_below - below);
  }
  return wins / (static_cast<double>(id_scores.size()) * static_cast<double>(ood.size()));
}

const ReportRow* DetectionReport::find(std::string_view method, std::string_view dataset) const {
  for (const auto& r : rows) {
    if (r.method == method && r.dataset == dataset) return &r;
  }
  return nullptr;
}

std::vector<std::string> DetectionReport::methods() const {
  std::vector<std::string> out;
  for (const auto& r : rows) {
    if (std::find(out.begin(), out.end(), r.method) == out.end()) out.push_back(r.method);
  }
  return out;
}

DetectionReport evaluate_tables(const ScoreTable& reference, const ScoreTable& id_test,
                                const std::vector<std::pair<std::string, ScoreTable>>& ood_tests,
                                const EvaluateOptions& options) {
  EnsembleConfig base{options.schemes.empty() ? Scheme::bh : options.schemes.front(), options.tpr0};
  base.validate();
  if (options.schemes.empty() && !options.include_single) fail(Errc::ConfigError, "no schemes requested");
  if (ood_tests.empty()) fail(Errc::ConfigError, "no OOD datasets to evaluate");
  grid_intervals(options.auc_step);

  const auto cdfs = build_cdfs(reference);
  const PValueMatrix id_p = pvalue_matrix(cdfs, id_test, options.pvalue);
  std::vector<PValueMatrix> ood_p;
  for (const auto& [name, table] : ood_tests) ood_p.push_back(pvalue_matrix(cdfs, table, options.pvalue));

  struct Method {
    std::string name;
    Scheme scheme;
    std::vector<std::size_t> columns;
  };
  std::vector<Method> methods;
  std::vector<std::size_t> all(reference.m);
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
  for (Scheme s : options.schemes) methods.push_back({std::string(to_string(s)), s, all});
  if (options.include_single) {
    for (std::size_t j = 0; j < reference.m; ++j) {
      methods.push_back({"single:" + reference.model_names[j], Scheme::bh, {j}});
    }
  }

  DetectionReport report;
  for (const auto& method : methods) {
    const PValueMatrix id_sel = id_p.select_columns(method.columns);
    const EnsembleConfig cfg{method.scheme, options.tpr0};
    const auto id_dec = decide_batch(id_sel, cfg, options.threads);
    ReportRow avg{method.name, kAverageDataset, 0.0, 0.0, 0.0};
    for (std::size_t d = 0; d < ood_tests.size(); ++d) {
      const PValueMatrix ood_sel = ood_p[d].select_columns(method.columns);
      const auto ood_dec = decide_batch(ood_sel, cfg, options.threads);
      const Rates r = tpr_fpr(confusion(id_dec, ood_dec));
      const double auc = auc_sweep(id_sel, ood_sel, method.scheme, options.auc_step).auc;
      ReportRow row{method.name, ood_tests[d].first, 100.0 * r.tpr, 100.0 * r.fpr, 100.0 * auc};
      avg.tpr += row.tpr;
      avg.fpr += row.fpr;
      avg.auc += row.auc;
      report.rows.push_back(std::move(row));
    }
    const auto count = static_cast<double>(ood_tests.size());
    avg.tpr /= count;
    avg.fpr /= count;
    avg.auc /= count;
    report.rows.push_back(std::move(avg));
  }

  std::string scheme_list;
  for (Scheme s : options.schemes) scheme_list += (scheme_list.empty() ? "" : ",") + std::string(to_string(s));
  report.metadata = {{"tpr0", format_number(options.tpr0)},
                     {"schemes", scheme_list},
                     {"include_single", options.include_single ? "true" : "false"},
                     {"auc_step", format_number(options.auc_step)},
                     {"conformal_smoothing", options.pvalue.conformal_smoothing ? "true" : "false"},
                     {"reference_split", reference.split},
                     {"id_split", id_test.split},
                     {"models", std::to_string(reference.m)}};
  return report;
}

DetectionReport bench(const ZooManifest& manifest, const BenchOptions& options) {
  std::vector<std::string> oods = options.ood_splits;
  const auto available = manifest.ood_splits();
  if (oods.empty()) oods = available;
  if (oods.empty()) fail(Errc::MissingSplit, "manifest has no OOD split shared by every model");
  std::set<std::string> seen;
  for (const auto& s : oods) {
    if (!DatasetRole::parse(s).is_ood()) fail(Errc::ConfigError, "'" + s + "' is not an OOD split name");
    if (std::find(available.begin(), available.end(), s) == available.end()) {
      fail(Errc::MissingSplit, "OOD split '" + s + "' is not present for every model");
    }
    if (!seen.insert(s).second) fail(Errc::ConfigError, "OOD split '" + s + "' listed twice");
  }
  const auto ref_role = DatasetRole::parse(options.reference);
  if (ref_role.kind != DatasetRole::Kind::id_val && ref_role.kind != DatasetRole::Kind::id_train) {
    fail(Errc::ConfigError, "reference split must be id_val or id_train");
  }

  ZooScorer scorer(manifest, options.evaluate.threads);
  const ScoreTable ref = scorer.table(ref_role);
  const ScoreTable id_test = scorer.table(DatasetRole::parse(options.id_test));
  std::vector<std::pair<std::string, ScoreTable>> ood_tables;
  for (const auto& s : oods) ood_tables.emplace_back(s, scorer.table(DatasetRole::parse(s)));

  DetectionReport report = evaluate_tables(ref, id_test, ood_tables, options.evaluate);
  report.metadata.insert(report.metadata.begin(), {"manifest_hash", manifest.source_hash});
  report.metadata.emplace_back("seed", std::to_string(options.seed));
  return report;
}

}  // namespace oodzoo
