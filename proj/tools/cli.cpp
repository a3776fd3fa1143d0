#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "oodzoo/explain.hpp"
#include "oodzoo/log.hpp"
#include "oodzoo/manifest.hpp"
#include "oodzoo/metrics.hpp"
#include "oodzoo/pvalue.hpp"
#include "oodzoo/report.hpp"
#include "oodzoo/score_table.hpp"
#include "oodzoo/sim.hpp"
#include "oodzoo/sim_io.hpp"
#include "oodzoo/synth.hpp"

namespace oodzoo::cli {
namespace {

namespace fs = std::filesystem;

struct Globals {
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  std::size_t threads = 1;
  bool quiet = false;
  std::string out;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::ConfigError, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split_list(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) fail(Errc::ConfigError, "empty entry in list '" + list + "'");
    out.push_back(item);
  }
  return out;
}

void check_tpr0(double tpr0) {
  if (!(tpr0 > 0.0 && tpr0 < 1.0)) fail(Errc::ConfigError, "--tpr0 must lie in (0, 1), got " + format_number(tpr0));
}

// Writes `csv` to path and `json` to its .json sibling.
void write_pair(const fs::path& path, const std::string& csv, const std::string& json) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_text_file(path, csv);
  auto json_path = path;
  json_path.replace_extension(".json");
  if (json_path == path) json_path += ".json";
  write_text_file(json_path, json);
}

// ---- score ---------------------------------------------------------------

struct ScoreArgs {
  std::string manifest;
  std::string split;
};

int cmd_score(const ScoreArgs& a, const Globals& g, std::ostream& out) {
  const auto role = DatasetRole::parse(a.split);
  const ZooManifest zoo = load_manifest(a.manifest);
  const auto splits = zoo.common_splits();
  if (std::find(splits.begin(), splits.end(), role.name) == splits.end()) {
    fail(Errc::MissingSplit, "split '" + role.name + "' is not present for every model");
  }
  const ScoreTable table = score_table(zoo, role, g.threads);
  const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(Errc::IoError, "cannot create " + dir.string());
  const fs::path stem = dir / (role.name + ".scores");
  write_score_table(table, stem);
  if (!g.quiet) {
    out << "wrote " << stem.string() << ".zfm (" << table.n << " x " << table.m << ") and " << stem.string()
        << ".json\n";
  }
  return kExitOk;
}

// ---- validate ------------------------------------------------------------

int cmd_validate(const std::string& manifest, std::ostream& out) {
  const ZooManifest zoo = load_manifest(manifest);
  const BundleSummary s = validate_bundle(zoo);
  out << "m=" << s.m << '\n';
  for (const auto& model : s.models) {
    out << model.name << " kind=" << to_string(model.kind) << " n_train=" << model.n_train << " n_val=" << model.n_val
        << " feature_dim=" << model.feature_dim << " logit_dim=" << model.logit_dim
        << " ready=" << (model.ready ? "true" : "false");
    if (!model.ready) out << " (" << model.reason << ")";
    out << '\n';
  }
  return kExitOk;
}

// ---- bench ---------------------------------------------------------------

struct BenchArgs {
  std::string manifest;
  double tpr0 = 0.95;
  CLI::Option* tpr0_opt = nullptr;
  std::string schemes = "bh";
  std::string ood;
  std::string report;
  std::string reference = std::string(kIdVal);
  bool single = false;
  bool smoothing = false;
  double auc_step = kDefaultAucStep;
};

int cmd_bench(const BenchArgs& a, const Globals& g, std::ostream& out) {
  BenchOptions opts;
  opts.evaluate.schemes = parse_scheme_list(a.schemes);
  if (a.tpr0_opt->count() > 0) check_tpr0(a.tpr0);
  grid_intervals(a.auc_step);
  opts.evaluate.include_single = a.single;
  opts.evaluate.auc_step = a.auc_step;
  opts.evaluate.pvalue.conformal_smoothing = a.smoothing;
  opts.evaluate.threads = g.threads;
  if (!a.ood.empty()) opts.ood_splits = split_list(a.ood);
  opts.reference = a.reference;
  opts.seed = g.seed;

  const ZooManifest zoo = load_manifest(a.manifest);
  opts.evaluate.tpr0 = a.tpr0_opt->count() > 0 ? a.tpr0 : zoo.tpr0.value_or(0.95);
  EnsembleConfig{Scheme::bh, opts.evaluate.tpr0}.warn_if_unguaranteed();
  const DetectionReport report = bench(zoo, opts);

  const std::string path = !a.report.empty() ? a.report : g.out;
  if (!path.empty()) write_pair(path, report_csv(report), report_json(report));
  if (!g.quiet) out << report_text(report);
  return kExitOk;
}

// ---- simulate ------------------------------------------------------------

struct IdUniformArgs {
  std::string config;
  std::size_t m = 7;
  CLI::Option* m_opt = nullptr;
  double tpr0 = 0.95;
  CLI::Option* tpr0_opt = nullptr;
  std::size_t trials = 1'000'000;
  CLI::Option* trials_opt = nullptr;
  std::string schemes;
};

int cmd_id_uniform(const IdUniformArgs& a, const Globals& g, std::ostream& out) {
  if (a.tpr0_opt->count() > 0) check_tpr0(a.tpr0);
  if (!a.schemes.empty()) parse_scheme_list(a.schemes);
  IdUniformSimConfig cfg = a.config.empty() ? IdUniformSimConfig{} : id_uniform_config_from_json(read_text(a.config));
  if (a.m_opt->count() > 0) cfg.m = a.m;
  if (a.tpr0_opt->count() > 0) cfg.tpr0 = a.tpr0;
  if (a.trials_opt->count() > 0) cfg.trials = a.trials;
  if (!a.schemes.empty()) cfg.schemes = parse_scheme_list(a.schemes);
  if (g.seed_opt->count() > 0) cfg.seed = g.seed;
  cfg.threads = g.threads;
  cfg.validate();
  EnsembleConfig{Scheme::bh, cfg.tpr0}.warn_if_unguaranteed();

  const IdUniformResult result = simulate_id_uniform(cfg);
  if (!g.out.empty()) write_pair(g.out, id_uniform_result_csv(result), id_uniform_result_json(result));
  if (!g.quiet) out << id_uniform_result_text(result);
  return kExitOk;
}

struct MixtureArgs {
  std::string config;
  std::size_t m = 100;
  CLI::Option* m_opt = nullptr;
  double pi = 0.2;
  CLI::Option* pi_opt = nullptr;
  double g_shape = 0.1;
  CLI::Option* g_opt = nullptr;
  double alpha = 0.05;
  CLI::Option* alpha_opt = nullptr;
  std::size_t trials = 100'000;
  CLI::Option* trials_opt = nullptr;
  bool keep_counts = false;
};

int cmd_mixture(const MixtureArgs& a, const Globals& g, std::ostream& out) {
  MixtureSimConfig cfg = a.config.empty() ? MixtureSimConfig{} : mixture_config_from_json(read_text(a.config));
  if (a.m_opt->count() > 0) cfg.m = a.m;
  if (a.pi_opt->count() > 0) cfg.pi = a.pi;
  if (a.g_opt->count() > 0) cfg.g_shape = a.g_shape;
  if (a.alpha_opt->count() > 0) cfg.alpha = a.alpha;
  if (a.trials_opt->count() > 0) cfg.trials = a.trials;
  if (a.keep_counts) cfg.keep_counts = true;
  if (g.seed_opt->count() > 0) cfg.seed = g.seed;
  cfg.threads = g.threads;
  cfg.validate();

  const PowerStats stats = simulate_mixture(cfg);
  const std::string json = power_stats_json(cfg, stats);
  if (!g.out.empty()) {
    fs::path p(g.out);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_text_file(p, json);
  }
  if (!g.quiet) out << json;
  return kExitOk;
}

struct SynthArgs {
  std::string config;
  std::string bundle_out;
};

int cmd_synth(const SynthArgs& a, const Globals& g, std::ostream& out) {
  SynthBenchConfig cfg = a.config.empty() ? SynthBenchConfig::complementary() : synth_config_from_json(read_text(a.config));
  if (g.seed_opt->count() > 0) cfg.seed = g.seed;
  cfg.threads = g.threads;
  cfg.validate();
  if (!a.bundle_out.empty()) {
    const auto manifest = write_synth_bundle(cfg, a.bundle_out);
    if (!g.quiet) out << "wrote bundle " << manifest.string() << '\n';
    return kExitOk;
  }
  const DetectionReport report = synth_benchmark(cfg);
  if (!g.out.empty()) write_pair(g.out, report_csv(report), report_json(report));
  if (!g.quiet) out << report_text(report);
  return kExitOk;
}

// ---- explain -------------------------------------------------------------

struct ExplainArgs {
  std::string manifest;
  std::string ood;
  long long index = -1;
  double tpr0 = 0.95;
  CLI::Option* tpr0_opt = nullptr;
  std::string scheme = "bh";
  std::string reference = std::string(kIdVal);
};

int cmd_explain(const ExplainArgs& a, const Globals& g, std::ostream& out) {
  if (a.index < 0) fail(Errc::ConfigError, "--index must be >= 0");
  if (a.tpr0_opt->count() > 0) check_tpr0(a.tpr0);
  const Scheme scheme = parse_scheme(a.scheme);
  const auto role = DatasetRole::parse(a.ood);
  const auto ref_role = DatasetRole::parse(a.reference);

  const ZooManifest zoo = load_manifest(a.manifest);
  const auto splits = zoo.common_splits();
  if (std::find(splits.begin(), splits.end(), role.name) == splits.end()) {
    fail(Errc::MissingSplit, "split '" + role.name + "' is not present for every model");
  }
  ZooScorer scorer(zoo, g.threads);
  const auto rows = scorer.split_rows(role);
  if (static_cast<std::size_t>(a.index) >= rows) {
    fail(Errc::ConfigError, "--index " + std::to_string(a.index) + " out of range for split '" + role.name +
                                "' with " + std::to_string(rows) + " rows");
  }
  const ScoreTable ref = scorer.table(ref_role);
  const ScoreTable sample = scorer.table(role, static_cast<std::size_t>(a.index), 1);
  const PValueMatrix p = pvalue_matrix(ref, sample);
  const EnsembleConfig cfg{scheme, a.tpr0_opt->count() > 0 ? a.tpr0 : zoo.tpr0.value_or(0.95)};
  const auto names = zoo.model_names();
  const Attribution attribution = explain_sample(p.row(0), cfg, names);
  out << attribution_json(attribution);
  return kExitOk;
}

}  // namespace

int exit_code_for(Errc code) noexcept {
  switch (code) {
    case Errc::IoError:
    case Errc::SingularCovariance:
    case Errc::NonFiniteInput:
    case Errc::ZeroNormVector:
    case Errc::DivisionByZeroGuard:
    case Errc::EmptyVector:
      return kExitRuntime;
    default:
      return kExitValidation;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Model-zoo OOD detection: scores, empirical p-values and Benjamini-Hochberg ensembling", "oodzoo"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  g.seed_opt = app.add_option("--seed", g.seed, "Random seed for simulations (recorded in reports)");
  app.add_option("--threads", g.threads, "Worker threads, 0 = all available")->capture_default_str();
  app.add_flag("--quiet", g.quiet, "Suppress warnings and console tables");
  app.add_option("--out", g.out, "Output path (directory for score, file for reports)");

  std::string validate_manifest;
  auto* validate = app.add_subcommand("validate", "Check a manifest and report per-model readiness");
  validate->add_option("--manifest", validate_manifest, "Manifest JSON")->required();

  ScoreArgs score_args;
  auto* score = app.add_subcommand("score", "Compute the score table of one split");
  score->add_option("--manifest", score_args.manifest, "Manifest JSON")->required();
  score->add_option("--split", score_args.split, "Split role, e.g. id_val, test_id or an OOD split name")->required();

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Score, ensemble and evaluate a zoo bundle");
  bench_cmd->add_option("--manifest", bench_args.manifest, "Manifest JSON")->required();
  bench_args.tpr0_opt = bench_cmd->add_option("--tpr0", bench_args.tpr0, "Target TPR level in (0, 1)");
  bench_cmd->add_option("--schemes", bench_args.schemes, "Comma list of bh,naive,average,voting")->capture_default_str();
  bench_cmd->add_option("--ood", bench_args.ood, "Comma list of OOD splits (default: all)");
  bench_cmd->add_option("--report", bench_args.report, "CSV report path; JSON written alongside");
  bench_cmd->add_option("--reference", bench_args.reference, "Reference split for p-values: id_val or id_train")
      ->capture_default_str();
  bench_cmd->add_flag("--single", bench_args.single, "Also report every single-model detector");
  bench_cmd->add_flag("--smoothing", bench_args.smoothing, "Use (count+1)/(n+1) p-values");
  bench_cmd->add_option("--auc-step", bench_args.auc_step, "AUC grid step")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo checks");
  simulate->require_subcommand(1);

  IdUniformArgs idu;
  auto* idu_cmd = simulate->add_subcommand("id-uniform", "ID acceptance rate under independent U[0,1] p-values");
  idu_cmd->add_option("--config", idu.config, "JSON config");
  idu.m_opt = idu_cmd->add_option("--m", idu.m, "Number of models");
  idu.tpr0_opt = idu_cmd->add_option("--tpr0", idu.tpr0, "Target TPR level");
  idu.trials_opt = idu_cmd->add_option("--trials", idu.trials, "Monte Carlo trials");
  idu_cmd->add_option("--schemes", idu.schemes, "Comma list of schemes (default: all four)");

  MixtureArgs mix;
  auto* mix_cmd = simulate->add_subcommand("mixture", "BH power and FDR under a null/active p-value mixture");
  mix_cmd->add_option("--config", mix.config, "JSON config");
  mix.m_opt = mix_cmd->add_option("--m", mix.m, "Models per trial");
  mix.pi_opt = mix_cmd->add_option("--pi", mix.pi, "Active-model fraction");
  mix.g_opt = mix_cmd->add_option("--g-shape", mix.g_shape, "Beta(a, 1) shape of active p-values");
  mix.alpha_opt = mix_cmd->add_option("--alpha", mix.alpha, "BH level");
  mix.trials_opt = mix_cmd->add_option("--trials", mix.trials, "Monte Carlo trials");
  mix_cmd->add_flag("--keep-counts", mix.keep_counts, "Include per-trial U/V/T/S/k counts");

  SynthArgs syn;
  auto* syn_cmd = simulate->add_subcommand("synth", "Complementary-models benchmark on synthetic features");
  syn_cmd->add_option("--config", syn.config, "JSON config (default: two complementary models)");
  syn_cmd->add_option("--bundle-out", syn.bundle_out, "Write the generated bundle here instead of benchmarking");

  ExplainArgs ex;
  auto* explain = app.add_subcommand("explain", "Attribute one sample's decision to zoo members");
  explain->add_option("--manifest", ex.manifest, "Manifest JSON")->required();
  explain->add_option("--ood", ex.ood, "Split holding the sample")->required();
  explain->add_option("--index", ex.index, "Row index within the split")->required();
  ex.tpr0_opt = explain->add_option("--tpr0", ex.tpr0, "Target TPR level");
  explain->add_option("--scheme", ex.scheme, "Ensemble scheme")->capture_default_str();
  explain->add_option("--reference", ex.reference, "Reference split for p-values")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  const bool was_quiet = log::quiet();
  log::set_quiet(g.quiet || was_quiet);
  int code = kExitOk;
  try {
    if (*validate) code = cmd_validate(validate_manifest, out);
    else if (*score) code = cmd_score(score_args, g, out);
    else if (*bench_cmd) code = cmd_bench(bench_args, g, out);
    else if (*idu_cmd) code = cmd_id_uniform(idu, g, out);
    else if (*mix_cmd) code = cmd_mixture(mix, g, out);
    else if (*syn_cmd) code = cmd_synth(syn, g, out);
    else if (*explain) code = cmd_explain(ex, g, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    code = exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    code = kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    code = kExitRuntime;
  }
  log::set_quiet(was_quiet);
  return code;
}

}  // namespace oodzoo::cli
