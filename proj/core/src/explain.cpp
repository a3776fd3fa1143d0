#include "oodzoo/explain.hpp"

#include <json.hpp>

#include "oodzoo/error.hpp"
#include "oodzoo/report.hpp"

namespace oodzoo {

Attribution explain_sample(std::span<const double> pvalues, const EnsembleConfig& config,
                           std::span<const std::string> model_names) {
  if (model_names.size() != pvalues.size()) {
    fail(Errc::ModelOrderMismatch, std::to_string(model_names.size()) + " names for " +
                                       std::to_string(pvalues.size()) + " p-values");
  }
  const Decision d = decide(pvalues, config);
  Attribution a;
  a.label = d.label;
  a.scheme = config.scheme;
  a.tpr0 = config.tpr0;
  a.k_reject = d.k_reject;
  a.solo_detector = d.label == Label::ood && d.k_reject == 1;
  a.contributor_indices = d.contributing_models;
  for (auto j : d.contributing_models) a.contributors.push_back(model_names[j]);
  a.model_names.assign(model_names.begin(), model_names.end());
  a.pvalues.assign(pvalues.begin(), pvalues.end());
  a.sorted_pvalues = d.sorted_pvalues;
  for (std::size_t k = 1; k <= pvalues.size(); ++k) a.bh_bounds.push_back(bh_bound(k, pvalues.size(), config.alpha()));
  return a;
}

std::string attribution_json(const Attribution& a) {
  nlohmann::ordered_json doc;
  doc["label"] = to_string(a.label);
  doc["scheme"] = to_string(a.scheme);
  doc["tpr0"] = round_sig6(a.tpr0);
  doc["k_reject"] = a.k_reject;
  doc["solo_detector"] = a.solo_detector;
  doc["contributors"] = a.contributors;
  doc["contributor_indices"] = a.contributor_indices;
  auto& models = doc["models"] = nlohmann::ordered_json::array();
  for (std::size_t j = 0; j < a.model_names.size(); ++j) {
    nlohmann::ordered_json m;
    m["name"] = a.model_names[j];
    m["pvalue"] = round_sig6(a.pvalues[j]);
    models.push_back(std::move(m));
  }
  auto& sorted = doc["sorted_pvalues"] = nlohmann::ordered_json::array();
  for (double p : a.sorted_pvalues) sorted.push_back(round_sig6(p));
  auto& bounds = doc["bh_bounds"] = nlohmann::ordered_json::array();
  for (double b : a.bh_bounds) bounds.push_back(round_sig6(b));
  return doc.dump(2) + "\n";
}

}  // namespace oodzoo
