#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "oodzoo/ensemble.hpp"
#include "oodzoo/metrics.hpp"

namespace oodzoo {

/// ID samples under independent detectors: every p-value is U[0, 1].
struct IdUniformSimConfig {
  std::size_t m = 7;
  double tpr0 = 0.95;
  std::size_t trials = 1'000'000;
  std::uint64_t seed = 0;
  std::vector<Scheme> schemes{Scheme::bh, Scheme::naive, Scheme::average, Scheme::voting};
  std::size_t threads = 1;

  void validate() const;
};

struct SchemeRate {
  Scheme scheme = Scheme::bh;
  std::size_t accepted = 0;  // trials labelled ID
  std::size_t trials = 0;
  double tpr = 0.0;
  double std_error = 0.0;
};

struct IdUniformResult {
  IdUniformSimConfig config;
  std::vector<SchemeRate> rates;  // one per configured scheme, same order

  const SchemeRate& rate(Scheme scheme) const;
};

/// Draws trials x m i.i.d. U[0,1] p-values (trial t uses substream t of the
/// seed) and applies every scheme to the same draws.
IdUniformResult simulate_id_uniform(const IdUniformSimConfig& config);

/// OOD sample seen by m detectors of which round(pi * m) are active: null
/// p-values are U[0,1], active ones Beta(g_shape, 1) (CDF u^g_shape).
struct MixtureSimConfig {
  std::size_t m = 100;
  double pi = 0.2;
  double g_shape = 0.1;
  double alpha = 0.05;
  std::size_t trials = 100'000;
  std::uint64_t seed = 0;
  bool keep_counts = false;
  std::size_t threads = 1;

  void validate() const;
  std::size_t active_count() const noexcept;
};

struct PowerStats {
  double mean_tpr_like = 0.0;       // E[S / m1]; 0 when m1 == 0
  double fdr = 0.0;                 // E[V / max(k, 1)]
  double fdr_std_error = 0.0;
  double rejection_fraction = 0.0;  // E[k / m]
  double detection_rate = 0.0;      // P(S >= 1)
  double any_rejection_rate = 0.0;  // P(k >= 1)
  std::size_t trials = 0;
  std::size_t m0 = 0;
  std::size_t m1 = 0;
  std::vector<DetectionCounts> counts;  // per trial when keep_counts
};

/// Runs BH at level alpha on each trial and tallies the null/active
/// contingency counts.
PowerStats simulate_mixture(const MixtureSimConfig& config);

/// Draws one trial's p-values: the m0 null entries first, then the actives.
std::vector<double> draw_mixture_pvalues(const MixtureSimConfig& config, std::uint64_t trial);

}  // namespace oodzoo
