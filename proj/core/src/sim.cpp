#include "oodzoo/sim.hpp"

#include <cmath>

#include "oodzoo/error.hpp"
#include "oodzoo/parallel.hpp"
#include "oodzoo/rng.hpp"

namespace oodzoo {
namespace {

constexpr std::size_t kTrialBlock = 4096;

}  // namespace

void IdUniformSimConfig::validate() const {
  if (m == 0) fail(Errc::ConfigError, "m must be >= 1");
  if (trials == 0) fail(Errc::ConfigError, "trials must be >= 1");
  if (schemes.empty()) fail(Errc::ConfigError, "no schemes requested");
  EnsembleConfig{Scheme::bh, tpr0}.validate();
}

const SchemeRate& IdUniformResult::rate(Scheme scheme) const {
  for (const auto& r : rates) {
    if (r.scheme == scheme) return r;
  }
  fail(Errc::ConfigError, "scheme '" + std::string(to_string(scheme)) + "' was not simulated");
}

IdUniformResult simulate_id_uniform(const IdUniformSimConfig& config) {
  config.validate();
  const std::size_t s_count = config.schemes.size();
  const double alpha = alpha_from_tpr0(config.tpr0);
  const Rng base(config.seed);

  std::vector<std::size_t> ood_per_block(block_count(config.trials, kTrialBlock) * s_count, 0);
  for_each_block(config.trials, kTrialBlock, config.threads, [&](std::size_t b, std::size_t begin, std::size_t end) {
    std::vector<double> p(config.m);
    for (std::size_t t = begin; t < end; ++t) {
      Rng rng = base.substream(t);
      for (double& v : p) v = rng.uniform();
      const SortedPValues row(p);
      for (std::size_t s = 0; s < s_count; ++s) {
        if (row.is_ood(config.schemes[s], alpha)) ++ood_per_block[b * s_count + s];
      }
    }
  });

  IdUniformResult result;
  result.config = config;
  for (std::size_t s = 0; s < s_count; ++s) {
    std::size_t ood = 0;
    for (std::size_t b = 0; b * s_count < ood_per_block.size(); ++b) ood += ood_per_block[b * s_count + s];
    SchemeRate r;
    r.scheme = config.schemes[s];
    r.trials = config.trials;
    r.accepted = config.trials - ood;
    r.tpr = static_cast<double>(r.accepted) / static_cast<double>(r.trials);
    r.std_error = std::sqrt(r.tpr * (1.0 - r.tpr) / static_cast<double>(r.trials));
    result.rates.push_back(r);
  }
  return result;
}

void MixtureSimConfig::validate() const {
  if (m == 0) fail(Errc::ConfigError, "m must be >= 1");
  if (trials == 0) fail(Errc::ConfigError, "trials must be >= 1");
  if (!(pi > 0.0 && pi <= 1.0)) fail(Errc::ConfigError, "pi must lie in (0, 1]");
  if (!(g_shape > 0.0) || !std::isfinite(g_shape)) fail(Errc::ConfigError, "g_shape must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) fail(Errc::ConfigError, "alpha must lie in (0, 1)");
}

std::size_t MixtureSimConfig::active_count() const noexcept {
  return static_cast<std::size_t>(std::llround(pi * static_cast<double>(m)));
}

std::vector<double> draw_mixture_pvalues(const MixtureSimConfig& config, std::uint64_t trial) {
  const std::size_t m1 = config.active_count();
  const std::size_t m0 = config.m - m1;
  Rng rng = Rng(config.seed).substream(trial);
  std::vector<double> p(config.m);
  for (std::size_t j = 0; j < m0; ++j) p[j] = rng.uniform();
  // Inverse CDF of Beta(a, 1): G(u) = u^a  =>  G^-1(u) = u^(1/a).
  const double inv_shape = 1.0 / config.g_shape;
  for (std::size_t j = m0; j < config.m; ++j) p[j] = std::pow(rng.uniform(), inv_shape);
  return p;
}

PowerStats simulate_mixture(const MixtureSimConfig& config) {
  config.validate();
  const std::size_t m1 = config.active_count();
  const std::size_t m0 = config.m - m1;
  const std::size_t blocks = block_count(config.trials, kTrialBlock);

  struct Partial {
    double tpr_like = 0.0, fdp = 0.0, fdp_sq = 0.0, rejected = 0.0;
    std::size_t detected = 0, any = 0;
  };
  std::vector<Partial> partial(blocks);
  std::vector<DetectionCounts> counts(config.keep_counts ? config.trials : 0);

  for_each_block(config.trials, kTrialBlock, config.threads, [&](std::size_t b, std::size_t begin, std::size_t end) {
    Partial acc;
    for (std::size_t t = begin; t < end; ++t) {
      const auto p = draw_mixture_pvalues(config, t);
      const Decision d = decide_at_alpha(p, Scheme::bh, config.alpha);
      DetectionCounts c;
      c.m0 = m0;
      c.m1 = m1;
      c.k = d.k_reject;
      for (std::size_t j : d.contributing_models) {
        if (j < m0) ++c.V;
      }
      c.S = c.k - c.V;
      c.U = m0 - c.V;
      c.T = m1 - c.S;
      const double fdp = static_cast<double>(c.V) / static_cast<double>(std::max<std::size_t>(c.k, 1));
      acc.tpr_like += m1 > 0 ? static_cast<double>(c.S) / static_cast<double>(m1) : 0.0;
      acc.fdp += fdp;
      acc.fdp_sq += fdp * fdp;
      acc.rejected += static_cast<double>(c.k) / static_cast<double>(config.m);
      acc.detected += c.S >= 1 ? 1 : 0;
      acc.any += c.k >= 1 ? 1 : 0;
      if (config.keep_counts) counts[t] = c;
    }
    partial[b] = acc;
  });

  Partial total;
  for (const auto& p : partial) {
    total.tpr_like += p.tpr_like;
    total.fdp += p.fdp;
    total.fdp_sq += p.fdp_sq;
    total.rejected += p.rejected;
    total.detected += p.detected;
    total.any += p.any;
  }
  const auto n = static_cast<double>(config.trials);
  PowerStats stats;
  stats.trials = config.trials;
  stats.m0 = m0;
  stats.m1 = m1;
  stats.mean_tpr_like = total.tpr_like / n;
  stats.fdr = total.fdp / n;
  const double var = std::max(0.0, total.fdp_sq / n - stats.fdr * stats.fdr);
  stats.fdr_std_error = config.trials > 1 ? std::sqrt(var * n / (n - 1.0) / n) : 0.0;
  stats.rejection_fraction = total.rejected / n;
  stats.detection_rate = static_cast<double>(total.detected) / n;
  stats.any_rejection_rate = static_cast<double>(total.any) / n;
  stats.counts = std::move(counts);
  return stats;
}

}  // namespace oodzoo
