#include "oodzoo/sim_io.hpp"

#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "oodzoo/error.hpp"
#include "oodzoo/report.hpp"

namespace oodzoo {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

json parse_object(std::string_view text, const char* what) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(Errc::ConfigError, std::string(what) + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) fail(Errc::ConfigError, std::string(what) + ": root must be an object");
  return doc;
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) fail(Errc::ConfigError, where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(Errc::ConfigError, where + ": key '" + key + "' has the wrong type");
  }
}

std::size_t get_count(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) fail(Errc::ConfigError, where + ": '" + key + "' must be a nonnegative integer");
  return static_cast<std::size_t>(v.get<long long>());
}

std::uint64_t get_seed(const json& obj, const std::string& where) {
  const auto& v = obj.at("seed");
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    fail(Errc::ConfigError, where + ": 'seed' must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::vector<Scheme> get_schemes(const json& obj, const std::string& where) {
  std::vector<Scheme> out;
  for (const auto& s : get<std::vector<std::string>>(obj, "schemes", where)) out.push_back(parse_scheme(s));
  return out;
}

ojson scheme_names(const std::vector<Scheme>& schemes) {
  ojson arr = ojson::array();
  for (Scheme s : schemes) arr.push_back(std::string(to_string(s)));
  return arr;
}

}  // namespace

IdUniformSimConfig id_uniform_config_from_json(std::string_view text) {
  const std::string where = "id-uniform config";
  const json doc = parse_object(text, where.c_str());
  reject_unknown(doc, {"m", "tpr0", "trials", "seed", "schemes"}, where);
  IdUniformSimConfig c;
  if (doc.contains("m")) c.m = get_count(doc, "m", where);
  if (doc.contains("tpr0")) c.tpr0 = get<double>(doc, "tpr0", where);
  if (doc.contains("trials")) c.trials = get_count(doc, "trials", where);
  if (doc.contains("seed")) c.seed = get_seed(doc, where);
  if (doc.contains("schemes")) c.schemes = get_schemes(doc, where);
  c.validate();
  return c;
}

MixtureSimConfig mixture_config_from_json(std::string_view text) {
  const std::string where = "mixture config";
  const json doc = parse_object(text, where.c_str());
  reject_unknown(doc, {"m", "pi", "g_shape", "alpha", "trials", "seed", "keep_counts"}, where);
  MixtureSimConfig c;
  if (doc.contains("m")) c.m = get_count(doc, "m", where);
  if (doc.contains("pi")) c.pi = get<double>(doc, "pi", where);
  if (doc.contains("g_shape")) c.g_shape = get<double>(doc, "g_shape", where);
  if (doc.contains("alpha")) c.alpha = get<double>(doc, "alpha", where);
  if (doc.contains("trials")) c.trials = get_count(doc, "trials", where);
  if (doc.contains("seed")) c.seed = get_seed(doc, where);
  if (doc.contains("keep_counts")) c.keep_counts = get<bool>(doc, "keep_counts", where);
  c.validate();
  return c;
}

SynthBenchConfig synth_config_from_json(std::string_view text) {
  const std::string where = "synth config";
  const json doc = parse_object(text, where.c_str());
  reject_unknown(doc,
                 {"dim", "n_train", "n_val", "n_test", "n_ood", "id_mean", "id_scale", "clusters", "models", "k",
                  "normalize", "tpr0", "schemes", "auc_step", "seed"},
                 where);
  SynthBenchConfig c = SynthBenchConfig::complementary();
  if (doc.contains("dim")) c.dim = get_count(doc, "dim", where);
  if (doc.contains("n_train")) c.n_train = get_count(doc, "n_train", where);
  if (doc.contains("n_val")) c.n_val = get_count(doc, "n_val", where);
  if (doc.contains("n_test")) c.n_test = get_count(doc, "n_test", where);
  if (doc.contains("n_ood")) c.n_ood = get_count(doc, "n_ood", where);
  if (doc.contains("id_mean")) c.id_mean = get<std::vector<double>>(doc, "id_mean", where);
  if (doc.contains("id_scale")) c.id_scale = get<double>(doc, "id_scale", where);
  if (doc.contains("k")) c.k = get_count(doc, "k", where);
  if (doc.contains("normalize")) c.normalize = get<bool>(doc, "normalize", where);
  if (doc.contains("tpr0")) c.tpr0 = get<double>(doc, "tpr0", where);
  if (doc.contains("schemes")) c.schemes = get_schemes(doc, where);
  if (doc.contains("auc_step")) c.auc_step = get<double>(doc, "auc_step", where);
  if (doc.contains("seed")) c.seed = get_seed(doc, where);
  if (doc.contains("clusters")) {
    c.clusters.clear();
    for (const auto& e : doc.at("clusters")) {
      reject_unknown(e, {"name", "mean", "scale"}, where + ".clusters");
      SynthCluster cl;
      cl.name = get<std::string>(e, "name", where + ".clusters");
      cl.mean = get<std::vector<double>>(e, "mean", where + ".clusters");
      if (e.contains("scale")) cl.scale = get<double>(e, "scale", where + ".clusters");
      c.clusters.push_back(std::move(cl));
    }
  }
  if (doc.contains("models")) {
    c.models.clear();
    for (const auto& e : doc.at("models")) {
      reject_unknown(e, {"name", "axes"}, where + ".models");
      c.models.push_back({get<std::string>(e, "name", where + ".models"),
                          get<std::vector<std::size_t>>(e, "axes", where + ".models")});
    }
  }
  c.validate();
  return c;
}

std::string synth_config_to_json(const SynthBenchConfig& c) {
  ojson doc;
  doc["dim"] = c.dim;
  doc["n_train"] = c.n_train;
  doc["n_val"] = c.n_val;
  doc["n_test"] = c.n_test;
  doc["n_ood"] = c.n_ood;
  if (!c.id_mean.empty()) doc["id_mean"] = c.id_mean;
  doc["id_scale"] = c.id_scale;
  auto& clusters = doc["clusters"] = ojson::array();
  for (const auto& cl : c.clusters) clusters.push_back({{"name", cl.name}, {"mean", cl.mean}, {"scale", cl.scale}});
  auto& models = doc["models"] = ojson::array();
  for (const auto& m : c.models) models.push_back({{"name", m.name}, {"axes", m.axes}});
  doc["k"] = c.k;
  doc["normalize"] = c.normalize;
  doc["tpr0"] = c.tpr0;
  doc["schemes"] = scheme_names(c.schemes);
  doc["auc_step"] = c.auc_step;
  doc["seed"] = c.seed;
  return doc.dump(2) + "\n";
}

std::string id_uniform_result_json(const IdUniformResult& r) {
  ojson doc;
  auto& cfg = doc["config"];
  cfg["m"] = r.config.m;
  cfg["tpr0"] = round_sig6(r.config.tpr0);
  cfg["trials"] = r.config.trials;
  cfg["seed"] = r.config.seed;
  cfg["schemes"] = scheme_names(r.config.schemes);
  auto& rates = doc["rates"] = ojson::array();
  for (const auto& s : r.rates) {
    ojson row;
    row["scheme"] = to_string(s.scheme);
    row["tpr"] = round_sig6(s.tpr);
    row["std_error"] = round_sig6(s.std_error);
    row["accepted"] = s.accepted;
    row["trials"] = s.trials;
    rates.push_back(std::move(row));
  }
  return doc.dump(2) + "\n";
}

std::string id_uniform_result_csv(const IdUniformResult& r) {
  std::ostringstream out;
  out << "scheme,m,tpr0,trials,seed,tpr,std_error,accepted\n";
  for (const auto& s : r.rates) {
    out << to_string(s.scheme) << ',' << r.config.m << ',' << format_number(r.config.tpr0) << ',' << s.trials << ','
        << r.config.seed << ',' << format_number(s.tpr) << ',' << format_number(s.std_error) << ',' << s.accepted
        << '\n';
  }
  return out.str();
}

std::string id_uniform_result_text(const IdUniformResult& r) {
  std::ostringstream out;
  out << "m=" << r.config.m << " tpr0=" << format_number(r.config.tpr0) << " trials=" << r.config.trials
      << " seed=" << r.config.seed << '\n';
  out << std::left << std::setw(10) << "scheme" << std::right << std::setw(12) << "TPR" << std::setw(12) << "stderr"
      << '\n';
  for (const auto& s : r.rates) {
    out << std::left << std::setw(10) << to_string(s.scheme) << std::right << std::setw(12) << format_number(s.tpr)
        << std::setw(12) << format_number(s.std_error) << '\n';
  }
  return out.str();
}

std::string power_stats_json(const MixtureSimConfig& c, const PowerStats& s) {
  ojson doc;
  auto& cfg = doc["config"];
  cfg["m"] = c.m;
  cfg["pi"] = round_sig6(c.pi);
  cfg["g_shape"] = round_sig6(c.g_shape);
  cfg["alpha"] = round_sig6(c.alpha);
  cfg["trials"] = c.trials;
  cfg["seed"] = c.seed;
  auto& st = doc["stats"];
  st["m0"] = s.m0;
  st["m1"] = s.m1;
  st["mean_tpr_like"] = round_sig6(s.mean_tpr_like);
  st["fdr"] = round_sig6(s.fdr);
  st["fdr_std_error"] = round_sig6(s.fdr_std_error);
  st["fdr_bound"] = round_sig6(static_cast<double>(s.m0) / static_cast<double>(c.m) * c.alpha);
  st["rejection_fraction"] = round_sig6(s.rejection_fraction);
  st["detection_rate"] = round_sig6(s.detection_rate);
  st["any_rejection_rate"] = round_sig6(s.any_rejection_rate);
  if (!s.counts.empty()) {
    auto& counts = doc["counts"] = ojson::array();
    for (const auto& k : s.counts) counts.push_back({k.U, k.V, k.T, k.S, k.k});
  }
  return doc.dump(2) + "\n";
}

}  // namespace oodzoo
