#include "oodzoo/synth.hpp"

#include <cmath>
#include <random>

#include <json.hpp>

#include "oodzoo/error.hpp"
#include "oodzoo/parallel.hpp"
#include "oodzoo/report.hpp"
#include "oodzoo/rng.hpp"
#include "oodzoo/score_table.hpp"

namespace oodzoo {
namespace {

// Sample i of split s uses substream (s << 40) + i.
constexpr unsigned kSplitShift = 40;

std::vector<double> id_center(const SynthBenchConfig& c) {
  return c.id_mean.empty() ? std::vector<double>(c.dim, 0.0) : c.id_mean;
}

FeatureMatrix draw_gaussian(std::uint64_t seed, std::uint64_t split, std::size_t rows, const std::vector<double>& mean,
                            double scale, std::size_t threads) {
  const std::size_t dim = mean.size();
  FeatureMatrix out(rows, dim);
  const Rng base(seed);
  for_each_block(rows, 1024, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = base.substream((split << kSplitShift) + i);
      std::normal_distribution<double> normal(0.0, 1.0);
      auto row = out.row(i);
      for (std::size_t d = 0; d < dim; ++d) row[d] = static_cast<float>(mean[d] + scale * normal(rng));
    }
  });
  return out;
}

FeatureMatrix project(const FeatureMatrix& full, const std::vector<std::size_t>& axes) {
  FeatureMatrix out(full.rows(), axes.size());
  for (std::size_t i = 0; i < full.rows(); ++i) {
    for (std::size_t a = 0; a < axes.size(); ++a) out(i, a) = full(i, axes[a]);
  }
  return out;
}

}  // namespace

SynthBenchConfig SynthBenchConfig::complementary(std::uint64_t seed) {
  SynthBenchConfig c;
  c.seed = seed;
  c.dim = 4;
  c.models = {{"view_a", {0, 1}}, {"view_b", {2, 3}}};
  c.clusters = {{"ood_a", {3.5, 0.0, 0.0, 0.0}, 1.0}, {"ood_b", {0.0, 0.0, 3.5, 0.0}, 1.0}};
  return c;
}

void SynthBenchConfig::validate() const {
  if (dim == 0) fail(Errc::ConfigError, "dim must be >= 1");
  if (n_train == 0 || n_val == 0 || n_test == 0 || n_ood == 0) fail(Errc::ConfigError, "sample counts must be >= 1");
  if (!id_mean.empty() && id_mean.size() != dim) fail(Errc::ConfigError, "id_mean must have dim entries");
  if (!(id_scale > 0.0)) fail(Errc::ConfigError, "id_scale must be > 0");
  if (models.empty()) fail(Errc::ConfigError, "at least one model is required");
  if (clusters.empty()) fail(Errc::ConfigError, "at least one OOD cluster is required");
  if (k == 0 || k > n_train) fail(Errc::ConfigError, "k must lie in [1, n_train]");
  if (schemes.empty()) fail(Errc::ConfigError, "no schemes requested");
  EnsembleConfig{Scheme::bh, tpr0}.validate();
  grid_intervals(auc_step);
  for (const auto& m : models) {
    if (m.name.empty() || m.axes.empty()) fail(Errc::ConfigError, "model needs a name and at least one axis");
    for (auto a : m.axes) {
      if (a >= dim) fail(Errc::ConfigError, "model '" + m.name + "' axis out of range");
    }
  }
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const auto& cl = clusters[c];
    if (cl.name.empty() || DatasetRole::parse(cl.name).kind != DatasetRole::Kind::test_ood) {
      fail(Errc::ConfigError, "cluster name '" + cl.name + "' must be a non-reserved split name");
    }
    if (cl.mean.size() != dim) fail(Errc::ConfigError, "cluster '" + cl.name + "' mean must have dim entries");
    if (!(cl.scale > 0.0)) fail(Errc::ConfigError, "cluster '" + cl.name + "' scale must be > 0");
    if (detectors_of(c).empty()) {
      fail(Errc::ConfigError, "cluster '" + cl.name + "' is indistinguishable from ID under every model");
    }
  }
}

std::vector<std::size_t> SynthBenchConfig::detectors_of(std::size_t cluster) const {
  const auto center = id_center(*this);
  const auto& cl = clusters.at(cluster);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < models.size(); ++j) {
    bool separates = cl.scale != id_scale;
    for (auto a : models[j].axes) separates = separates || cl.mean[a] != center[a];
    if (separates) out.push_back(j);
  }
  return out;
}

SynthData generate_synth_data(const SynthBenchConfig& config) {
  config.validate();
  const auto center = id_center(config);
  SynthData data;
  std::vector<FeatureMatrix> full;
  data.split_names = {std::string(kIdTrain), std::string(kIdVal), std::string(kTestId)};
  full.push_back(draw_gaussian(config.seed, 0, config.n_train, center, config.id_scale, config.threads));
  full.push_back(draw_gaussian(config.seed, 1, config.n_val, center, config.id_scale, config.threads));
  full.push_back(draw_gaussian(config.seed, 2, config.n_test, center, config.id_scale, config.threads));
  for (std::size_t c = 0; c < config.clusters.size(); ++c) {
    const auto& cl = config.clusters[c];
    data.split_names.push_back(cl.name);
    full.push_back(draw_gaussian(config.seed, 3 + c, config.n_ood, cl.mean, cl.scale, config.threads));
  }
  data.features.resize(config.models.size());
  for (std::size_t j = 0; j < config.models.size(); ++j) {
    for (const auto& f : full) data.features[j].push_back(project(f, config.models[j].axes));
  }
  return data;
}

DetectionReport synth_benchmark(const SynthBenchConfig& config) {
  const SynthData data = generate_synth_data(config);
  const std::size_t m = config.models.size();
  const std::size_t splits = data.split_names.size();

  ScoreConfig score;
  score.kind = ScoreKind::knn;
  score.k = config.k;
  score.normalize = config.normalize;

  // columns[split][model]
  std::vector<std::vector<std::vector<double>>> columns(splits, std::vector<std::vector<double>>(m));
  std::vector<std::string> names;
  for (std::size_t j = 0; j < m; ++j) {
    names.push_back(config.models[j].name);
    const ModelScorer scorer(score, &data.features[j][0]);
    for (std::size_t s = 1; s < splits; ++s) columns[s][j] = scorer.score_rows(data.features[j][s], config.threads);
  }
  auto table = [&](std::size_t s) {
    return ScoreTable::from_columns(columns[s], names, std::vector<ScoreConfig>(m, score), data.split_names[s]);
  };

  std::vector<std::pair<std::string, ScoreTable>> oods;
  for (std::size_t s = 3; s < splits; ++s) oods.emplace_back(data.split_names[s], table(s));

  EvaluateOptions options;
  options.schemes = config.schemes;
  options.tpr0 = config.tpr0;
  options.include_single = true;
  options.auc_step = config.auc_step;
  options.threads = config.threads;
  DetectionReport report = evaluate_tables(table(1), table(2), oods, options);
  report.metadata.emplace_back("generator", "synth");
  report.metadata.emplace_back("seed", std::to_string(config.seed));
  report.metadata.emplace_back("k", std::to_string(config.k));
  report.metadata.emplace_back("normalize", config.normalize ? "true" : "false");
  return report;
}

std::filesystem::path write_synth_bundle(const SynthBenchConfig& config, const std::filesystem::path& dir) {
  const SynthData data = generate_synth_data(config);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(Errc::IoError, "cannot create " + dir.string());

  nlohmann::ordered_json manifest;
  manifest["score"] = "knn";
  manifest["k"] = config.k;
  manifest["normalize"] = config.normalize;
  manifest["tpr0"] = config.tpr0;
  auto& models = manifest["models"] = nlohmann::ordered_json::array();
  for (std::size_t j = 0; j < config.models.size(); ++j) {
    nlohmann::ordered_json entry;
    entry["name"] = config.models[j].name;
    auto& feats = entry["features"] = nlohmann::ordered_json::object();
    for (std::size_t s = 0; s < data.split_names.size(); ++s) {
      const std::string file = config.models[j].name + "." + data.split_names[s] + ".zfm";
      write_matrix(data.features[j][s], dir / file);
      feats[data.split_names[s]] = file;
    }
    models.push_back(std::move(entry));
  }
  const auto path = dir / "manifest.json";
  write_text_file(path, manifest.dump(2) + "\n");
  return path;
}

}  // namespace oodzoo
