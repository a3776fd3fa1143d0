#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "oodzoo/ensemble.hpp"

namespace oodzoo {

/// Which zoo members drove one sample's decision.
struct Attribution {
  Label label = Label::id;
  Scheme scheme = Scheme::bh;
  double tpr0 = 0.95;
  std::size_t k_reject = 0;
  bool solo_detector = false;  // OOD on the strength of exactly one model
  std::vector<std::size_t> contributor_indices;
  std::vector<std::string> contributors;
  std::vector<std::string> model_names;
  std::vector<double> pvalues;         // original model order
  std::vector<double> sorted_pvalues;  // ascending
  std::vector<double> bh_bounds;       // (k/m) * alpha for k = 1..m
};

Attribution explain_sample(std::span<const double> pvalues, const EnsembleConfig& config,
                           std::span<const std::string> model_names);

/// Pretty-printed JSON record, numbers at six significant digits.
std::string attribution_json(const Attribution& a);

}  // namespace oodzoo
