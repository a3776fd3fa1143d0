#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oodzoo/ensemble.hpp"
#include "oodzoo/matrix.hpp"
#include "oodzoo/metrics.hpp"

namespace oodzoo {

/// Isotropic Gaussian cluster in the shared feature space.
struct SynthCluster {
  std::string name;
  std::vector<double> mean;
  double scale = 1.0;
};

/// A synthetic "model" sees only a subset of the shared coordinates.
struct SynthModel {
  std::string name;
  std::vector<std::size_t> axes;
};

struct SynthBenchConfig {
  std::size_t dim = 4;
  std::size_t n_train = 5000;
  std::size_t n_val = 20000;
  std::size_t n_test = 20000;  // ID test samples
  std::size_t n_ood = 10000;   // per OOD cluster
  std::vector<double> id_mean;  // empty = origin
  double id_scale = 1.0;
  std::vector<SynthCluster> clusters;
  std::vector<SynthModel> models;
  std::size_t k = 50;
  bool normalize = false;
  double tpr0 = 0.95;
  std::vector<Scheme> schemes{Scheme::bh};
  double auc_step = kDefaultAucStep;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  /// Two models on disjoint coordinate pairs, two OOD clusters each shifted
  /// along one model's coordinates only, so each model is blind to one cluster.
  static SynthBenchConfig complementary(std::uint64_t seed = 0);

  /// Checks shapes, and that every cluster is separable by at least one
  /// model (its mean or scale differs from ID on an axis the model sees).
  void validate() const;
  /// Models that can separate cluster c.
  std::vector<std::size_t> detectors_of(std::size_t cluster) const;
};

/// Generated feature views: features[j][split] for model j.
struct SynthData {
  std::vector<std::string> split_names;  // id_train, id_val, test_id, then clusters
  std::vector<std::vector<FeatureMatrix>> features;
};

SynthData generate_synth_data(const SynthBenchConfig& config);

/// Full pipeline on generated data: KNN scores -> p-values -> ensemble,
/// plus one "single:<model>" row group per model.
DetectionReport synth_benchmark(const SynthBenchConfig& config);

/// Writes the generated bundle as ZFM1 files plus a manifest.json under
/// `dir`; returns the manifest path.
std::filesystem::path write_synth_bundle(const SynthBenchConfig& config, const std::filesystem::path& dir);

}  // namespace oodzoo
