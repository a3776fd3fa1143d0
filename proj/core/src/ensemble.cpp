#include "oodzoo/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oodzoo/error.hpp"
#include "oodzoo/log.hpp"
#include "oodzoo/parallel.hpp"

namespace oodzoo {
namespace {

void check_pvalues(std::span<const double> p) {
  if (p.empty()) fail(Errc::EmptyInput, "no p-values");
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) fail(Errc::PValueOutOfRange, "p-value " + std::to_string(v) + " outside [0, 1]");
  }
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(Errc::ConfigError, "alpha must lie in [0, 1]");
}

// Stable ascending order of p-values with their original indices.
Decision sorted_decision(std::span<const double> p, std::vector<std::size_t>& order) {
  order.resize(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  Decision d;
  d.sorted_pvalues.reserve(p.size());
  for (std::size_t j : order) d.sorted_pvalues.push_back(p[j]);
  return d;
}

Decision finish(Decision d, const std::vector<std::size_t>& order, std::size_t k) {
  d.k_reject = k;
  d.label = k > 0 ? Label::ood : Label::id;
  d.contributing_models.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  return d;
}

std::size_t count_below(std::span<const double> sorted, double alpha) noexcept {
  return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), alpha) - sorted.begin());
}

std::size_t bh_rejections(std::span<const double> sorted, double alpha) noexcept {
  const std::size_t m = sorted.size();
  for (std::size_t k = m; k >= 1; --k) {
    if (sorted[k - 1] <= bh_bound(k, m, alpha)) return k;
  }
  return 0;
}

// Summed in ascending order so the result does not depend on model order.
double mean_of(std::span<const double> p) noexcept {
  double s = 0.0;
  for (double v : p) s += v;
  return s / static_cast<double>(p.size());
}

}  // namespace

std::string_view to_string(Scheme scheme) noexcept {
  switch (scheme) {
    case Scheme::bh: return "bh";
    case Scheme::naive: return "naive";
    case Scheme::average: return "average";
    case Scheme::voting: return "voting";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "bh") return Scheme::bh;
  if (name == "naive") return Scheme::naive;
  if (name == "average") return Scheme::average;
  if (name == "voting") return Scheme::voting;
  fail(Errc::ConfigError, "unknown scheme '" + std::string(name) + "'");
}

std::vector<Scheme> parse_scheme_list(std::string_view list) {
  std::vector<Scheme> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = list.find(',', start);
    const auto item = list.substr(start, comma == std::string_view::npos ? list.size() - start : comma - start);
    out.push_back(parse_scheme(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void EnsembleConfig::validate() const {
  if (!(tpr0 > 0.0 && tpr0 < 1.0)) fail(Errc::ConfigError, "tpr0 must lie in (0, 1)");
}

void EnsembleConfig::warn_if_unguaranteed() const {
  if (tpr0 <= 0.5) log::warn("tpr0 <= 0.5: the ensemble TPR guarantee assumes tpr0 > 0.5");
}

Decision decide_at_alpha(std::span<const double> pvalues, Scheme scheme, double alpha) {
  check_pvalues(pvalues);
  check_alpha(alpha);
  std::vector<std::size_t> order;
  Decision d = sorted_decision(pvalues, order);
  const std::span<const double> sorted = d.sorted_pvalues;
  const std::size_t m = sorted.size();
  std::size_t k = 0;
  switch (scheme) {
    case Scheme::bh:
      k = bh_rejections(sorted, alpha);
      break;
    case Scheme::naive:
      k = count_below(sorted, alpha);
      break;
    case Scheme::average:
      k = mean_of(sorted) < alpha ? m : 0;
      break;
    case Scheme::voting: {
      const std::size_t votes = count_below(sorted, alpha);
      k = 2 * votes > m ? votes : 0;
      break;
    }
  }
  return finish(std::move(d), order, k);
}

Decision bh_decide(std::span<const double> pvalues, const EnsembleConfig& config) {
  config.validate();
  return decide_at_alpha(pvalues, Scheme::bh, config.alpha());
}

Decision naive_decide(std::span<const double> pvalues, const EnsembleConfig& config) {
  config.validate();
  return decide_at_alpha(pvalues, Scheme::naive, config.alpha());
}

Decision average_decide(std::span<const double> pvalues, const EnsembleConfig& config) {
  config.validate();
  return decide_at_alpha(pvalues, Scheme::average, config.alpha());
}

Decision voting_decide(std::span<const double> pvalues, const EnsembleConfig& config) {
  config.validate();
  return decide_at_alpha(pvalues, Scheme::voting, config.alpha());
}

Decision decide(std::span<const double> pvalues, const EnsembleConfig& config) {
  config.validate();
  return decide_at_alpha(pvalues, config.scheme, config.alpha());
}

std::vector<Decision> decide_batch(const PValueMatrix& pmat, const EnsembleConfig& config, std::size_t threads) {
  config.validate();
  if (pmat.n > 0 && pmat.m == 0) fail(Errc::EmptyInput, "p-value matrix has no model columns");
  if (pmat.values.size() != pmat.n * pmat.m) fail(Errc::DimMismatch, "p-value matrix storage does not match n*m");
  std::vector<Decision> out(pmat.n);
  const double alpha = config.alpha();
  for_each_block(pmat.n, 1024, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = decide_at_alpha(pmat.row(i), config.scheme, alpha);
  });
  return out;
}

std::vector<Label> labels_of(std::span<const Decision> decisions) {
  std::vector<Label> labels;
  labels.reserve(decisions.size());
  for (const auto& d : decisions) labels.push_back(d.label);
  return labels;
}

SortedPValues::SortedPValues(std::span<const double> pvalues) : sorted_(pvalues.begin(), pvalues.end()) {
  check_pvalues(pvalues);
  std::sort(sorted_.begin(), sorted_.end());
  mean_ = mean_of(sorted_);
}

bool SortedPValues::is_ood(Scheme scheme, double alpha) const noexcept {
  const std::size_t m = sorted_.size();
  switch (scheme) {
    case Scheme::bh: return bh_rejections(sorted_, alpha) > 0;
    case Scheme::naive: return sorted_.front() < alpha;
    case Scheme::average: return mean_ < alpha;
    case Scheme::voting: return 2 * count_below(sorted_, alpha) > m;
  }
  return false;
}

}  // namespace oodzoo
