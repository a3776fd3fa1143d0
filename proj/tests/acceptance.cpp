// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "oodzoo/ensemble.hpp"
#include "oodzoo/metrics.hpp"
#include "oodzoo/pvalue.hpp"
#include "oodzoo/score_table.hpp"
#include "oodzoo/scores.hpp"
#include "oodzoo/sim.hpp"
#include "oodzoo/sim_io.hpp"
#include "oodzoo/synth.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace oodzoo;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
  std::fflush(stdout);
}

// Shared m=7 run backing criteria 2-4.
const IdUniformResult& seven_model_run() {
  static const IdUniformResult r = [] {
    IdUniformSimConfig cfg;
    cfg.m = 7;
    cfg.trials = 1'000'000;
    cfg.seed = 20240701;
    return simulate_id_uniform(cfg);
  }();
  return r;
}

Outcome simes_tpr_control() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (std::size_t m : {1u, 2u, 7u, 50u}) {
    IdUniformSimConfig cfg;
    cfg.m = m;
    cfg.trials = 1'000'000;
    cfg.seed = 1000 + m;
    cfg.schemes = {Scheme::bh};
    cfg.threads = 1;
    const double tpr = simulate_id_uniform(cfg).rate(Scheme::bh).tpr;
    ok &= std::fabs(tpr - 0.95) <= 0.001;
    detail += fmt("m=%zu tpr=%.5f ", m, tpr);
  }
  const double secs = seconds_since(t0);
  ok &= secs < 60.0;
  return {ok, detail + fmt("(%.1fs single-threaded, limit 60s)", secs)};
}

Outcome naive_collapse() {
  const double expect = std::pow(0.95, 7);
  const double tpr = seven_model_run().rate(Scheme::naive).tpr;
  return {std::fabs(tpr - expect) <= 0.005, fmt("tpr=%.5f target=%.5f tol=0.005", tpr, expect)};
}

Outcome average_scheme() {
  const double tpr = seven_model_run().rate(Scheme::average).tpr;
  const double oracle_tpr = 1.0 - static_cast<double>(oracle::irwin_hall_cdf(7, 0.35L));
  return {tpr >= 0.9999, fmt("tpr=%.7f oracle=%.10f floor=0.9999", tpr, oracle_tpr)};
}

Outcome voting_scheme() {
  const double expect = 1.0 - static_cast<double>(oracle::binomial_upper_tail(7, 0.05L, 4));
  const double tpr = seven_model_run().rate(Scheme::voting).tpr;
  return {std::fabs(tpr - expect) <= 0.001, fmt("tpr=%.6f oracle=%.6f tol=0.001", tpr, expect)};
}

Outcome fdr_and_power() {
  MixtureSimConfig cfg;
  cfg.m = 100;
  cfg.pi = 0.2;
  cfg.g_shape = 0.1;
  cfg.alpha = 0.05;
  cfg.trials = 100'000;
  cfg.seed = 77;
  const auto s = simulate_mixture(cfg);
  const double bound = 0.04 + 3.0 * s.fdr_std_error;
  bool ok = s.fdr <= bound;
  std::string detail = fmt("fdr=%.5f bound=%.5f; detection_rate", s.fdr, bound);
  double prev = -1.0;
  for (std::size_t m : {10u, 50u, 200u, 1000u}) {
    MixtureSimConfig c = cfg;
    c.m = m;
    c.seed = 4242;  // paired across m
    const double rate = simulate_mixture(c).detection_rate;
    ok &= rate >= prev;
    prev = rate;
    detail += fmt(" m=%zu:%.5f", m, rate);
  }
  return {ok, detail};
}

Outcome threshold_equivalence() {
  std::mt19937_64 gen(606);
  std::normal_distribution<double> nd;
  std::size_t checked = 0, agree = 0;
  const double tpr0 = 0.95;
  const double alpha = alpha_from_tpr0(tpr0);
  for (int inst = 0; inst < 1000; ++inst) {
    const double loc = nd(gen) * 5.0, scale = std::exp(nd(gen));
    std::vector<double> ref;
    std::set<double> seen;
    while (ref.size() < 10000) {
      const double v = loc + scale * nd(gen);
      if (seen.insert(v).second) ref.push_back(v);
    }
    const auto cdf = build_cdf(ref);
    const double lambda = threshold_at_tpr(cdf, tpr0);
    for (int q = 0; q < 200; ++q) {
      const double s = loc + scale * nd(gen) * 1.5;
      if (seen.count(s)) continue;
      ++checked;
      agree += (empirical_pvalue(cdf, s) < alpha) == (threshold_decision(s, lambda) == Label::ood);
    }
  }
  return {checked > 0 && agree == checked, fmt("%zu/%zu non-tied points agree over 1000 instances", agree, checked)};
}

Outcome score_oracles() {
  std::mt19937_64 gen(707);
  std::normal_distribution<double> nd;
  bool ok = true;

  std::size_t knn_exact = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + gen() % 1000, d = 1 + gen() % 16, k = 1 + gen() % std::min<std::size_t>(n, 60);
    const bool normalize = gen() % 2;
    const auto bank = testutil::gaussian_matrix(n, d, gen);
    const auto q = testutil::gaussian_matrix(1, d, gen);
    std::vector<std::vector<double>> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = prepare_feature(bank.row(i), normalize);
    const double expect = -oracle::knn_distance(prepare_feature(q.row(0), normalize), rows, k);
    knn_exact += knn_score(q.row(0), bank, k, normalize) == expect;
  }
  ok &= knn_exact == 200;

  double maha_rel = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t d = 2 + gen() % 8, classes = 1 + gen() % 4, n = 40 * d;
    auto f = testutil::gaussian_matrix(n, d, gen);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % classes);
    for (std::size_t i = 0; i < n; ++i) f(i, 0) += static_cast<float>(3 * y[i]);
    const auto model = fit_mahalanobis(f, y, classes, 1e-6);
    std::vector<std::vector<double>> x(n, std::vector<double>(d));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) x[i][j] = f(i, j);
    std::vector<std::vector<long double>> means;
    const auto cov = oracle::pooled_cov(x, y, classes, 1e-6L, means);
    for (int q = 0; q < 20; ++q) {
      std::vector<double> z(d);
      for (auto& v : z) v = 2.0 * nd(gen);
      const long double expect = oracle::mahalanobis(cov, means, std::vector<long double>(z.begin(), z.end()));
      const double got = mahalanobis_score(model, z);
      maha_rel = std::max(maha_rel, static_cast<double>(std::fabs((got - expect) / expect)));
    }
  }
  ok &= maha_rel <= 1e-9;

  double logit_err = 0.0;
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> l(1 + gen() % 100);
    const double mag = (t % 2) ? 1000.0 : 10.0;
    for (auto& v : l) v = mag * nd(gen);
    if (t % 3 == 0) l[0] = (t % 2 ? 1000.0 : -1000.0);
    const double temp = std::exp(nd(gen));
    logit_err = std::max(logit_err, std::fabs(msp_score(std::span<const double>(l)) -
                                              static_cast<double>(oracle::max_softmax(l))));
    logit_err = std::max(logit_err, std::fabs(energy_score(std::span<const double>(l), temp) -
                                              static_cast<double>(oracle::energy(l, temp))));
  }
  ok &= logit_err <= 1e-6;

  return {ok, fmt("knn exact %zu/200; mahalanobis max rel err %.2e (tol 1e-9); msp/energy max abs err %.2e (tol 1e-6)",
                  knn_exact, maha_rel, logit_err)};
}

Outcome complementarity() {
  const auto t0 = Clock::now();
  int wins = 0;
  bool tpr_ok = true;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto cfg = SynthBenchConfig::complementary(seed);
    cfg.threads = 0;
    const auto rep = synth_benchmark(cfg);
    const auto* e = rep.find("bh", kAverageDataset);
    double best = 101.0;
    for (const auto& m : cfg.models) best = std::min(best, rep.find("single:" + m.name, kAverageDataset)->fpr);
    wins += e->fpr < best;
    tpr_ok &= e->tpr >= 94.0 && e->tpr <= 96.0;
    detail += fmt(" s%llu:%.2f/%.2f@%.2f", static_cast<unsigned long long>(seed), e->fpr, best, e->tpr);
  }
  const double secs = seconds_since(t0);
  return {wins >= 9 && tpr_ok && secs < 300.0,
          fmt("ensemble beats best single in %d/10 seeds, TPR in [94,96]: %s, %.1fs (limit 300s); fpr/best@tpr:",
              wins, tpr_ok ? "yes" : "no", secs) +
              detail};
}

PValueMatrix one_column(std::vector<double> p) {
  PValueMatrix m;
  m.n = p.size();
  m.m = 1;
  m.values = std::move(p);
  m.model_names = {"a"};
  return m;
}

Outcome auc_protocol() {
  std::mt19937_64 gen(909);
  const auto perfect = auc_sweep(one_column(std::vector<double>(1000, 0.75)), one_column(std::vector<double>(1000, 0.0)),
                                 Scheme::bh, 0.0005);
  const std::size_t points = perfect.grid.points.size();

  const auto same = auc_sweep(one_column(testutil::uniform_vector(10000, gen)),
                              one_column(testutil::uniform_vector(10000, gen)), Scheme::bh, 0.0005);

  std::normal_distribution<double> nd;
  std::vector<double> ref(20000), id(5000), ood(5000);
  for (auto& x : ref) x = nd(gen);
  for (auto& x : id) x = nd(gen);
  for (auto& x : ood) x = nd(gen) - 1.0;
  const auto cdfs = build_cdfs(ScoreTable::from_columns({ref}, {"a"}));
  const auto sweep = auc_sweep(pvalue_matrix(cdfs, ScoreTable::from_columns({id}, {"a"})),
                               pvalue_matrix(cdfs, ScoreTable::from_columns({ood}, {"a"})), Scheme::bh, 0.0005);
  const double rank = oracle::pair_auc(id, ood);

  const bool ok = points == 2001 && std::fabs(perfect.auc - 1.0) <= 1e-6 && std::fabs(same.auc - 0.5) <= 0.01 &&
                  std::fabs(sweep.auc - rank) <= 0.001;
  return {ok, fmt("grid points=%zu; perfect=%.8f; identical=%.4f; m=1 sweep=%.5f vs rank-sum=%.5f", points,
                  perfect.auc, same.auc, sweep.auc, rank)};
}

Outcome determinism() {
  testutil::TempDir dir;
  auto cli_run = [](std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    if (code != 0) throw std::runtime_error("command failed: " + err.str());
    return out.str();
  };

  auto small = SynthBenchConfig::complementary(3);
  small.n_train = 2000;
  small.n_val = 5000;
  small.n_test = 5000;
  small.n_ood = 2000;
  small.k = 20;
  testutil::spit(dir / "synth.json", synth_config_to_json(small));
  cli_run({"simulate", "synth", "--config", (dir / "synth.json").string(), "--bundle-out",
           (dir / "bundle").string(), "--quiet"});
  const std::string manifest = (dir / "bundle" / "manifest.json").string();

  struct Cmd {
    std::vector<std::string> args;
    std::vector<std::string> files;
  };
  auto commands = [&](const std::string& tag) {
    const auto p = [&](const std::string& f) { return (dir / (tag + "_" + f)).string(); };
    std::filesystem::create_directories(dir / (tag + "_scores"));
    return std::vector<Cmd>{
        {{"--seed", "11", "--out", p("idu.csv"), "simulate", "id-uniform", "--trials", "200000", "--quiet"},
         {p("idu.csv"), p("idu.json")}},
        {{"--seed", "12", "--out", p("mix.json"), "simulate", "mixture", "--trials", "20000", "--quiet"},
         {p("mix.json")}},
        {{"--seed", "13", "--out", p("synth.csv"), "simulate", "synth", "--config", (dir / "synth.json").string(),
          "--quiet"},
         {p("synth.csv"), p("synth.json")}},
        {{"--seed", "14", "--out", p("bench.csv"), "bench", "--manifest", manifest, "--schemes",
          "bh,naive,average,voting", "--single", "--quiet"},
         {p("bench.csv"), p("bench.json")}},
        {{"--out", p("scores"), "score", "--manifest", manifest, "--split", "ood_a", "--quiet"},
         {p("scores/ood_a.scores.zfm"), p("scores/ood_a.scores.json")}},
    };
  };

  const auto first = commands("a"), second = commands("b");
  std::size_t identical = 0, total = 0;
  std::string mismatched;
  for (std::size_t i = 0; i < first.size(); ++i) {
    cli_run(first[i].args);
    cli_run(second[i].args);
    for (std::size_t f = 0; f < first[i].files.size(); ++f) {
      ++total;
      const auto a = testutil::slurp(first[i].files[f]);
      const auto b = testutil::slurp(second[i].files[f]);
      if (!a.empty() && a == b) ++identical;
      else mismatched += " " + std::filesystem::path(first[i].files[f]).filename().string();
    }
  }
  return {identical == total, fmt("%zu/%zu report files byte-identical across reruns", identical, total) + mismatched};
}

}  // namespace

int main() {
  report(1, "BH TPR control on independent uniform p-values", simes_tpr_control);
  report(2, "naive ensemble TPR collapse, m=7", naive_collapse);
  report(3, "average scheme TPR, m=7", average_scheme);
  report(4, "voting scheme TPR, m=7", voting_scheme);
  report(5, "mixture FDR bound and detection-rate growth", fdr_and_power);
  report(6, "p-value vs hard-threshold equivalence", threshold_equivalence);
  report(7, "score functions vs independent oracles", score_oracles);
  report(8, "complementary two-model benchmark", complementarity);
  report(9, "AUC sweep protocol", auc_protocol);
  report(10, "determinism of simulate/bench/score outputs", determinism);
  std::printf("%s: %d failing criteria\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
