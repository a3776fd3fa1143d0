#include "oodzoo/scores.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "oodzoo/error.hpp"
#include "oodzoo/log.hpp"

namespace oodzoo {
namespace {

template <typename T>
void check_logits(std::span<const T> logits) {
  if (logits.empty()) fail(Errc::EmptyVector, "logit vector is empty");
  for (T v : logits) {
    if (!std::isfinite(v)) fail(Errc::NonFiniteInput, "non-finite logit");
  }
}

template <typename T>
double max_of(std::span<const T> v) {
  return static_cast<double>(*std::max_element(v.begin(), v.end()));
}

template <typename T>
double msp_impl(std::span<const T> logits) {
  check_logits(logits);
  const double top = max_of(logits);
  double denom = 0.0;
  for (T v : logits) denom += std::exp(static_cast<double>(v) - top);
  // The max term contributes exactly 1 to denom, so the ratio is 1 / denom.
  return 1.0 / denom;
}

template <typename T>
double energy_impl(std::span<const T> logits, double temperature) {
  check_logits(logits);
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    fail(Errc::ConfigError, "temperature must be positive");
  }
  const double top = max_of(logits);
  double sum = 0.0;
  for (T v : logits) sum += std::exp((static_cast<double>(v) - top) / temperature);
  return top + temperature * std::log(sum);
}

template <typename T>
double mahalanobis_impl(const MahalanobisModel& model, std::span<const T> feature) {
  if (feature.size() != model.dim) {
    fail(Errc::DimMismatch, "feature has " + std::to_string(feature.size()) + " dims, model has " +
                                std::to_string(model.dim));
  }
  for (T v : feature) {
    if (!std::isfinite(v)) fail(Errc::NonFiniteInput, "non-finite feature");
  }
  const std::size_t d = model.dim;
  std::vector<double> diff(d);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < model.class_count; ++c) {
    const auto mu = model.mean(c);
    for (std::size_t i = 0; i < d; ++i) diff[i] = static_cast<double>(feature[i]) - mu[i];
    double q = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double* prow = model.precision.data() + i * d;
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += prow[j] * diff[j];
      q += diff[i] * acc;
    }
    best = std::min(best, q);
  }
  return -best;
}

}  // namespace

std::string_view to_string(ScoreKind kind) noexcept {
  switch (kind) {
    case ScoreKind::msp: return "msp";
    case ScoreKind::energy: return "energy";
    case ScoreKind::mahalanobis: return "mahalanobis";
    case ScoreKind::knn: return "knn";
  }
  return "unknown";
}

ScoreKind parse_score_kind(std::string_view name) {
  if (name == "msp") return ScoreKind::msp;
  if (name == "energy") return ScoreKind::energy;
  if (name == "mahalanobis") return ScoreKind::mahalanobis;
  if (name == "knn") return ScoreKind::knn;
  fail(Errc::ConfigError, "unknown score kind '" + std::string(name) + "'");
}

void ScoreConfig::validate() const {
  if (k == 0) fail(Errc::ConfigError, "k must be >= 1");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) fail(Errc::ConfigError, "temperature must be > 0");
  if (!(cov_ridge >= 0.0) || !std::isfinite(cov_ridge)) fail(Errc::ConfigError, "cov_ridge must be >= 0");
}

double msp_score(std::span<const double> logits) { return msp_impl(logits); }
double msp_score(std::span<const float> logits) { return msp_impl(logits); }

double energy_score(std::span<const double> logits, double temperature) {
  return energy_impl(logits, temperature);
}
double energy_score(std::span<const float> logits, double temperature) {
  return energy_impl(logits, temperature);
}

MahalanobisModel fit_mahalanobis(const FeatureMatrix& features, std::span<const int> labels,
                                 std::optional<std::size_t> class_count, double cov_ridge) {
  if (features.empty()) fail(Errc::EmptyInput, "no training features");
  if (labels.size() != features.rows()) {
    fail(Errc::DimMismatch, std::to_string(labels.size()) + " labels for " +
                                std::to_string(features.rows()) + " feature rows");
  }
  if (!(cov_ridge >= 0.0)) fail(Errc::ConfigError, "cov_ridge must be >= 0");
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();

  std::size_t classes = 0;
  if (class_count) {
    classes = *class_count;
  } else {
    const int top = *std::max_element(labels.begin(), labels.end());
    classes = top < 0 ? 0 : static_cast<std::size_t>(top) + 1;
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      fail(Errc::LabelOutOfRange, "label " + std::to_string(y) + " outside [0, " + std::to_string(classes) + ")");
    }
  }
  if (n <= d) {
    log::warn("fit_mahalanobis: n=" + std::to_string(n) + " <= d=" + std::to_string(d) +
              "; covariance relies on the ridge term");
  }

  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Mat means = Mat::Zero(static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(d));
  std::vector<std::size_t> counts(classes, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = features.row(i);
    const auto c = static_cast<Eigen::Index>(labels[i]);
    for (std::size_t j = 0; j < d; ++j) means(c, static_cast<Eigen::Index>(j)) += row[j];
    ++counts[static_cast<std::size_t>(labels[i])];
  }
  for (std::size_t c = 0; c < classes; ++c) {
    if (counts[c] == 0) fail(Errc::EmptyClass, "class " + std::to_string(c) + " has no samples");
    means.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(counts[c]);
  }

  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  Eigen::VectorXd centered(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = features.row(i);
    const auto c = static_cast<Eigen::Index>(labels[i]);
    for (std::size_t j = 0; j < d; ++j) {
      centered(static_cast<Eigen::Index>(j)) = row[j] - means(c, static_cast<Eigen::Index>(j));
    }
    scatter.selfadjointView<Eigen::Lower>().rankUpdate(centered);
  }
  Eigen::MatrixXd cov = scatter.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(n);
  cov.diagonal().array() += cov_ridge;

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    fail(Errc::SingularCovariance, "shared covariance is not positive definite (ridge " +
                                       std::to_string(cov_ridge) + ")");
  }
  const Eigen::MatrixXd L = llt.matrixL();
  if ((L.diagonal().array() <= 0.0).any()) fail(Errc::SingularCovariance, "non-positive Cholesky pivot");
  Eigen::MatrixXd precision = llt.solve(Eigen::MatrixXd::Identity(cov.rows(), cov.cols()));
  precision = 0.5 * (precision + precision.transpose()).eval();

  MahalanobisModel model;
  model.class_count = classes;
  model.dim = d;
  model.cov_ridge = cov_ridge;
  model.class_means.assign(means.data(), means.data() + means.size());
  model.precision.resize(d * d);
  Eigen::Map<Mat>(model.precision.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) = precision;
  return model;
}

double mahalanobis_score(const MahalanobisModel& model, std::span<const double> feature) {
  return mahalanobis_impl(model, feature);
}
double mahalanobis_score(const MahalanobisModel& model, std::span<const float> feature) {
  return mahalanobis_impl(model, feature);
}

std::vector<double> prepare_feature(std::span<const float> v, bool normalize) {
  std::vector<double> out(v.begin(), v.end());
  for (double x : out) {
    if (!std::isfinite(x)) fail(Errc::NonFiniteInput, "non-finite feature");
  }
  if (normalize) {
    double sq = 0.0;
    for (double x : out) sq += x * x;
    const double norm = std::sqrt(sq);
    if (norm == 0.0) fail(Errc::ZeroNormVector, "cannot L2-normalize a zero vector");
    for (double& x : out) x /= norm;
  }
  return out;
}

KnnIndex::KnnIndex(const FeatureMatrix& bank, bool normalize)
    : rows_(bank.rows()), dim_(bank.cols()), normalize_(normalize) {
  if (bank.empty()) fail(Errc::EmptyInput, "KNN bank is empty");
  bank_.reserve(rows_ * dim_);
  for (std::size_t i = 0; i < rows_; ++i) {
    const auto row = prepare_feature(bank.row(i), normalize);
    bank_.insert(bank_.end(), row.begin(), row.end());
  }
}

double KnnIndex::score(std::span<const float> query, std::size_t k) const {
  std::vector<double> scratch;
  return score(query, k, scratch);
}

double KnnIndex::score(std::span<const float> query, std::size_t k, std::vector<double>& scratch) const {
  if (k == 0) fail(Errc::ConfigError, "k must be >= 1");
  if (k > rows_) {
    fail(Errc::KTooLarge, "k=" + std::to_string(k) + " exceeds bank size " + std::to_string(rows_));
  }
  if (query.size() != dim_) {
    fail(Errc::DimMismatch, "query has " + std::to_string(query.size()) + " dims, bank has " + std::to_string(dim_));
  }
  const auto q = prepare_feature(query, normalize_);
  scratch.resize(rows_);
  const double* b = bank_.data();
  for (std::size_t i = 0; i < rows_; ++i, b += dim_) {
    double acc = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      const double diff = q[j] - b[j];
      acc += diff * diff;
    }
    scratch[i] = acc;
  }
  auto kth = scratch.begin() + static_cast<std::ptrdiff_t>(k - 1);
  std::nth_element(scratch.begin(), kth, scratch.end());
  return -std::sqrt(*kth);
}

double knn_score(std::span<const float> query, const FeatureMatrix& bank, std::size_t k, bool normalize) {
  if (k > bank.rows()) {
    fail(Errc::KTooLarge, "k=" + std::to_string(k) + " exceeds bank size " + std::to_string(bank.rows()));
  }
  return KnnIndex(bank, normalize).score(query, k);
}

}  // namespace oodzoo
