#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oodzoo/pvalue.hpp"

namespace oodzoo {

enum class Scheme { bh, naive, average, voting };

std::string_view to_string(Scheme scheme) noexcept;
/// Throws ConfigError on an unknown name.
Scheme parse_scheme(std::string_view name);
/// Comma-separated list, e.g. "bh,naive".
std::vector<Scheme> parse_scheme_list(std::string_view list);

struct EnsembleConfig {
  Scheme scheme = Scheme::bh;
  double tpr0 = 0.95;

  /// Throws ConfigError unless 0 < tpr0 < 1.
  void validate() const;
  /// Logs a warning when tpr0 <= 0.5, where the TPR guarantee no longer holds.
  void warn_if_unguaranteed() const;
  double alpha() const noexcept { return alpha_from_tpr0(tpr0); }
};

/// Outcome for one test sample. contributing_models are original model
/// indices in ascending p-value order (ties by lower index) and are always
/// the first k_reject entries of that order, so they can be rebuilt from
/// sorted_pvalues and k_reject.
struct Decision {
  Label label = Label::id;
  std::size_t k_reject = 0;
  std::vector<std::size_t> contributing_models;
  std::vector<double> sorted_pvalues;
};

/// Benjamini-Hochberg step-up: OOD iff p_(k) <= (k/m) * alpha for some k;
/// k_reject is the largest such k.
Decision bh_decide(std::span<const double> pvalues, const EnsembleConfig& config);
/// OOD iff min p < alpha.
Decision naive_decide(std::span<const double> pvalues, const EnsembleConfig& config);
/// OOD iff mean p < alpha; reports every model when OOD.
Decision average_decide(std::span<const double> pvalues, const EnsembleConfig& config);
/// OOD iff #{p < alpha} > m / 2.
Decision voting_decide(std::span<const double> pvalues, const EnsembleConfig& config);

Decision decide(std::span<const double> pvalues, const EnsembleConfig& config);

/// Same rules with an explicit alpha in [0, 1]; the endpoints are needed by
/// the AUC sweep.
Decision decide_at_alpha(std::span<const double> pvalues, Scheme scheme, double alpha);

std::vector<Decision> decide_batch(const PValueMatrix& pmat, const EnsembleConfig& config, std::size_t threads = 1);
std::vector<Label> labels_of(std::span<const Decision> decisions);

/// Precomputed per-row state (sorted p-values, mean) for evaluating one
/// scheme at many alpha levels. label() agrees with decide_at_alpha().
class SortedPValues {
 public:
  explicit SortedPValues(std::span<const double> pvalues);

  bool is_ood(Scheme scheme, double alpha) const noexcept;
  std::span<const double> sorted() const noexcept { return sorted_; }

 private:
  std::vector<double> sorted_;
  double mean_ = 0.0;
};

/// Right-hand side of the BH inequality, (k/m) * alpha.
inline double bh_bound(std::size_t k, std::size_t m, double alpha) noexcept {
  return static_cast<double>(k) / static_cast<double>(m) * alpha;
}

}  // namespace oodzoo
