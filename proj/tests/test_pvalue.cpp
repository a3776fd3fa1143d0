#include <doctest.h>

#include <algorithm>
#include <random>

#include "oodzoo/error.hpp"
#include "oodzoo/pvalue.hpp"
#include "oodzoo/score_table.hpp"
#include "test_util.hpp"

using namespace oodzoo;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an oodzoo::Error");
  return Errc::ConfigError;
}

EmpiricalCdf cdf(std::vector<double> v) { return build_cdf(v); }

// Direct O(n) count with the inclusive comparison.
double count_pvalue(const std::vector<double>& ref, double s) {
  std::size_t c = 0;
  for (double r : ref) c += r <= s;
  return static_cast<double>(c) / ref.size();
}

}  // namespace

TEST_SUITE("pvalue") {

TEST_CASE("build_cdf") {
  const auto c = cdf({3, 1, 2});
  CHECK(std::vector<double>(c.sorted_scores().begin(), c.sorted_scores().end()) == std::vector<double>{1, 2, 3});
  CHECK(cdf({7}).size() == 1);
  CHECK(code_of([] { cdf({}); }) == Errc::EmptyInput);
  CHECK(code_of([] { cdf({1, NAN}); }) == Errc::NonFiniteInput);
}

TEST_CASE("empirical_pvalue examples") {
  const auto c = cdf({1, 2, 3, 4, 5});
  CHECK(empirical_pvalue(c, 2.5) == 0.4);
  CHECK(empirical_pvalue(c, 0.0) == 0.0);
  CHECK(empirical_pvalue(c, 5.0) == 1.0);
  CHECK(empirical_pvalue(c, 99.0) == 1.0);
  CHECK(empirical_pvalue(cdf({1, 1, 1, 2}), 1.0) == 0.75);
  CHECK(empirical_pvalue(c, 2.5, {.conformal_smoothing = true}) == doctest::Approx(3.0 / 6.0));
  CHECK(empirical_pvalue(c, 0.0, {.conformal_smoothing = true}) == doctest::Approx(1.0 / 6.0));
  CHECK(code_of([&] { empirical_pvalue(c, NAN); }) == Errc::NonFiniteInput);
}

TEST_CASE("binary search agrees with direct count, monotone and permutation invariant") {
  std::mt19937_64 gen(41);
  std::uniform_int_distribution<int> small(-20, 20);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> ref(1 + gen() % 60);
    for (auto& x : ref) x = small(gen) * 0.5;  // plenty of ties
    const auto c = build_cdf(ref);
    auto shuffled = ref;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    const auto c2 = build_cdf(shuffled);
    double prev = -1.0;
    for (double s = -12.0; s <= 12.0; s += 0.25) {
      const double p = empirical_pvalue(c, s);
      CHECK(p == count_pvalue(ref, s));
      CHECK(p == empirical_pvalue(c2, s));
      CHECK(p >= prev);
      prev = p;
    }
  }
}

TEST_CASE("pvalue_matrix") {
  auto ref = ScoreTable::from_columns({{1, 2, 3, 4, 5}}, {"a"});
  auto test = ScoreTable::from_columns({{2.5}}, {"a"});
  auto p = pvalue_matrix(ref, test);
  CHECK(p.n == 1);
  CHECK(p(0, 0) == 0.4);

  SUBCASE("self reference gives the rank multiset") {
    std::mt19937_64 gen(43);
    auto col0 = testutil::uniform_vector(500, gen), col1 = testutil::uniform_vector(500, gen);
    auto t = ScoreTable::from_columns({col0, col1}, {"a", "b"});
    auto self = pvalue_matrix(t, t);
    for (std::size_t j = 0; j < 2; ++j) {
      auto col = self.column(j);
      std::sort(col.begin(), col.end());
      for (std::size_t i = 0; i < col.size(); ++i) CHECK(col[i] == static_cast<double>(i + 1) / 500);
    }
  }

  SUBCASE("model order mismatch") {
    auto two = ScoreTable::from_columns({{1}, {2}}, {"a", "b"});
    CHECK(code_of([&] { pvalue_matrix(ref, two); }) == Errc::ModelOrderMismatch);
    auto renamed = ScoreTable::from_columns({{1}}, {"z"});
    CHECK(code_of([&] { pvalue_matrix(ref, renamed); }) == Errc::ModelOrderMismatch);
  }
}

TEST_CASE("p-values are uniform when reference and test share a distribution") {
  std::mt19937_64 gen(47);
  std::normal_distribution<double> nd;
  std::vector<double> ref(100000), test(100000);
  for (auto& x : ref) x = nd(gen);
  for (auto& x : test) x = nd(gen);
  const auto c = build_cdf(ref);
  std::vector<double> p;
  for (double s : test) p.push_back(empirical_pvalue(c, s));
  std::sort(p.begin(), p.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    ks = std::max({ks, std::fabs(p[i] - static_cast<double>(i) / p.size()),
                   std::fabs(p[i] - static_cast<double>(i + 1) / p.size())});
  }
  CHECK(ks <= 0.01);
}

TEST_CASE("threshold_at_tpr") {
  std::vector<double> ref;
  for (int i = 1; i <= 100; ++i) ref.push_back(i);
  const auto c = build_cdf(ref);
  const double lambda = threshold_at_tpr(c, 0.95);
  CHECK(lambda == 5.0);
  std::size_t keep_ge = 0, keep_gt = 0;
  for (double r : ref) {
    keep_ge += threshold_decision(r, lambda) == Label::id;
    keep_gt += r > lambda;
  }
  CHECK(keep_ge == 96);
  CHECK(keep_gt == 95);
  CHECK(threshold_at_tpr(c, 0.999) == kNoThreshold);
  CHECK(threshold_at_tpr(cdf({7}), 0.95) == kNoThreshold);
  CHECK(code_of([&] { threshold_at_tpr(c, 1.0); }) == Errc::ConfigError);
  CHECK(code_of([&] { threshold_at_tpr(c, 0.0); }) == Errc::ConfigError);
  CHECK(rejection_rank(0.95, 10000) == 500);
  CHECK(rejection_rank(0.935, 1000) == 65);
}

TEST_CASE("threshold_decision") {
  CHECK(threshold_decision(5.0, 5.0) == Label::id);
  CHECK(threshold_decision(4.999, 5.0) == Label::ood);
  CHECK(threshold_decision(-1e300, kNoThreshold) == Label::id);
}

TEST_CASE("p-value rule and hard threshold agree away from ties") {
  std::mt19937_64 gen(53);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 20 * (1 + gen() % 50);  // alpha * n integral at tpr0 = 0.95
    std::vector<double> ref(n);
    for (auto& x : ref) x = nd(gen);
    const auto c = build_cdf(ref);
    const double lambda = threshold_at_tpr(c, 0.95);
    for (int q = 0; q < 200; ++q) {
      const double s = nd(gen);
      if (std::binary_search(c.sorted_scores().begin(), c.sorted_scores().end(), s)) continue;
      CHECK((empirical_pvalue(c, s) < alpha_from_tpr0(0.95)) == (threshold_decision(s, lambda) == Label::ood));
    }
  }
}

TEST_CASE("rules can part ways when alpha * n is not an integer") {
  std::vector<double> ref;
  for (int i = 1; i <= 30; ++i) ref.push_back(i);  // alpha * n = 1.5, rank floors to 1
  const auto c = build_cdf(ref);
  const double lambda = threshold_at_tpr(c, 0.95);
  CHECK(lambda == 1.0);
  CHECK(empirical_pvalue(c, 1.5) < 0.05);
  CHECK(threshold_decision(1.5, lambda) == Label::id);
}

TEST_CASE("alpha snapping") {
  CHECK(alpha_from_tpr0(0.95) == 0.05);
  CHECK(alpha_from_tpr0(0.935) == 0.065);
  CHECK(alpha_from_tpr0(0.5) == 0.5);
}

}  // TEST_SUITE
