#include <doctest.h>

#include <random>

#include "oodzoo/error.hpp"
#include "oodzoo/metrics.hpp"
#include "oodzoo/report.hpp"
#include "oodzoo/score_table.hpp"
#include "oracles.hpp"
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

PValueMatrix column(std::vector<double> p) {
  PValueMatrix m;
  m.n = p.size();
  m.m = 1;
  m.values = std::move(p);
  m.model_names = {"a"};
  return m;
}

std::vector<double> normals(std::size_t n, std::mt19937_64& gen, double mean) {
  std::normal_distribution<double> nd(mean, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = nd(gen);
  return v;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("confusion and rates") {
  using L = Label;
  const std::vector<L> id{L::id, L::id, L::ood}, ood{L::ood, L::id};
  const auto c = confusion(id, ood);
  CHECK(c == DetectionCounts{2, 1, 1, 1, 3, 2, 2});
  CHECK(c.consistent());
  const std::vector<L> all_id{L::id}, all_ood{L::ood};
  const auto perfect = confusion(all_id, all_ood);
  CHECK(perfect.V == 0);
  CHECK(perfect.T == 0);
  CHECK(code_of([&] { confusion(std::vector<L>{}, ood); }) == Errc::EmptyInput);

  const auto r = tpr_fpr(DetectionCounts{95, 5, 10, 90, 100, 100, 95});
  CHECK(r.tpr == doctest::Approx(0.95));
  CHECK(r.fpr == doctest::Approx(0.10));
  const auto best = tpr_fpr(perfect);
  CHECK(best.tpr == 1.0);
  CHECK(best.fpr == 0.0);
  CHECK(code_of([] { tpr_fpr(DetectionCounts{1, 0, 0, 0, 1, 0, 0}); }) == Errc::DivisionByZeroGuard);
}

TEST_CASE("grid sizes") {
  CHECK(grid_intervals(0.0005) == 2000);
  CHECK(grid_intervals(0.25) == 4);
  CHECK(code_of([] { grid_intervals(0.3); }) == Errc::ConfigError);
  CHECK(code_of([] { grid_intervals(0.0); }) == Errc::ConfigError);
  const auto r = auc_sweep(column({0.5}), column({0.0}), Scheme::bh);
  CHECK(r.grid.points.size() == 2001);
  CHECK(r.grid.points.front().level == 0.0);
  CHECK(r.grid.points.back().level == 1.0);
}

TEST_CASE("trapezoid and rank oracles") {
  CHECK(trapezoid_auc({}) == doctest::Approx(0.5));
  CHECK(trapezoid_auc({{0.0, 1.0}}) == doctest::Approx(1.0));
  CHECK(trapezoid_auc({{0.5, 0.5}}) == doctest::Approx(0.5));
  std::mt19937_64 gen(71);
  std::uniform_int_distribution<int> d(0, 9);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> a(1 + gen() % 40), b(1 + gen() % 40);
    for (auto& x : a) x = d(gen);
    for (auto& x : b) x = d(gen) - 2;
    CHECK(rank_auc(a, b) == doctest::Approx(oracle::pair_auc(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("sweep matches hand-computed points") {
  // id p-values 0.1..1.0, ood p-values 0.0,0.05,0.1
  std::vector<double> id;
  for (int i = 1; i <= 10; ++i) id.push_back(i / 10.0);
  const auto r = auc_sweep(column(id), column({0.0, 0.05, 0.1}), Scheme::bh, 0.25);
  REQUIRE(r.grid.points.size() == 5);
  // level 0.75 -> alpha 0.25: ID rejected are p <= 0.25 (0.1, 0.2), all ood rejected
  CHECK(r.grid.points[3].tpr == doctest::Approx(0.8));
  CHECK(r.grid.points[3].fpr == doctest::Approx(0.0));
  // level 1 -> alpha 0: only p == 0 rejected
  CHECK(r.grid.points[4].tpr == doctest::Approx(1.0));
  CHECK(r.grid.points[4].fpr == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("sweep AUC properties") {
  std::mt19937_64 gen(73);
  SUBCASE("monotone transforms of scores leave the sweep unchanged") {
    const auto ref = normals(2000, gen, 0.0), id = normals(1000, gen, 0.0), ood = normals(1000, gen, -1.0);
    auto tr = [](std::vector<double> v) {
      for (auto& x : v) x = std::exp(x) * 3.0 - 1.0;
      return v;
    };
    auto p = [](const std::vector<double>& r, const std::vector<double>& s) {
      return pvalue_matrix(ScoreTable::from_columns({r}, {"a"}), ScoreTable::from_columns({s}, {"a"}));
    };
    const double a = auc_sweep(p(ref, id), p(ref, ood), Scheme::bh).auc;
    const double b = auc_sweep(p(tr(ref), tr(id)), p(tr(ref), tr(ood)), Scheme::bh).auc;
    CHECK(a == b);
  }
  SUBCASE("swapping ID and OOD reflects through one half") {
    auto id = testutil::uniform_vector(3000, gen), ood = testutil::uniform_vector(3000, gen);
    for (auto& x : ood) x = x * x;
    const double fwd = auc_sweep(column(id), column(ood), Scheme::bh).auc;
    const double back = auc_sweep(column(ood), column(id), Scheme::bh).auc;
    CHECK(std::fabs(fwd + back - 1.0) <= 2 * kDefaultAucStep);
  }
  SUBCASE("single model sweep agrees with rank statistics") {
    const auto ref = normals(20000, gen, 0.0), id = normals(5000, gen, 0.0), ood = normals(5000, gen, -1.5);
    const auto cdfs = build_cdfs(ScoreTable::from_columns({ref}, {"a"}));
    const auto pid = pvalue_matrix(cdfs, ScoreTable::from_columns({id}, {"a"}));
    const auto pood = pvalue_matrix(cdfs, ScoreTable::from_columns({ood}, {"a"}));
    const double sweep = auc_sweep(pid, pood, Scheme::bh).auc;
    CHECK(std::fabs(sweep - oracle::pair_auc(id, ood)) <= 2 * kDefaultAucStep);
  }
}

TEST_CASE("evaluate_tables report shape and the single-model reduction") {
  std::mt19937_64 gen(79);
  const auto ref = ScoreTable::from_columns({normals(4000, gen, 0), normals(4000, gen, 0)}, {"a", "b"});
  const auto id = ScoreTable::from_columns({normals(2000, gen, 0), normals(2000, gen, 0)}, {"a", "b"});
  std::vector<std::pair<std::string, ScoreTable>> oods{
      {"x", ScoreTable::from_columns({normals(1000, gen, -2), normals(1000, gen, 0)}, {"a", "b"})},
      {"y", ScoreTable::from_columns({normals(1000, gen, 0), normals(1000, gen, -2)}, {"a", "b"})}};
  EvaluateOptions o;
  o.schemes = parse_scheme_list("bh,naive,average,voting");
  o.include_single = true;
  const auto rep = evaluate_tables(ref, id, oods, o);
  CHECK(rep.rows.size() == 6 * 3);
  for (const char* s : {"bh", "naive", "average", "voting", "single:a", "single:b"}) {
    for (const char* d : {"x", "y", "Average"}) CHECK(rep.find(s, d) != nullptr);
  }
  const auto* avg = rep.find("bh", "Average");
  CHECK(avg->fpr == doctest::Approx((rep.find("bh", "x")->fpr + rep.find("bh", "y")->fpr) / 2));
  for (const auto& row : rep.rows) {
    CHECK(row.tpr >= 0.0);
    CHECK(row.tpr <= 100.0);
    CHECK(row.fpr >= 0.0);
    CHECK(row.fpr <= 100.0);
  }

  // one-model zoo: the ensemble rows equal the single-model rows
  auto one = [](const ScoreTable& t) { return ScoreTable::from_columns({t.column(0)}, {"a"}); };
  std::vector<std::pair<std::string, ScoreTable>> oods1{{"x", one(oods[0].second)}, {"y", one(oods[1].second)}};
  o.schemes = {Scheme::bh};
  const auto rep1 = evaluate_tables(one(ref), one(id), oods1, o);
  for (const char* d : {"x", "y", "Average"}) {
    const auto* e = rep1.find("bh", d);
    const auto* s = rep1.find("single:a", d);
    CHECK(e->tpr == s->tpr);
    CHECK(e->fpr == s->fpr);
    CHECK(e->auc == s->auc);
  }
}

TEST_CASE("report formatting") {
  CHECK(format_number(94.62) == "94.62");
  CHECK(format_number(1.0 / 3.0) == "0.333333");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(123456789.0) == "1.23457e+08");
  DetectionReport r;
  r.rows.push_back({"bh", "x", 95.0, 3.14159265, 99.5});
  r.metadata = {{"tpr0", "0.95"}};
  CHECK(report_csv(r) == "method,dataset,tpr,fpr,auc\nbh,x,95,3.14159,99.5\n");
  const auto j = report_json(r);
  CHECK(j.find("3.14159") != std::string::npos);
  CHECK(j.find("3.141592") == std::string::npos);
}

}  // TEST_SUITE
