#include <doctest.h>

#include <sstream>

#include "cli.hpp"
#include "oodzoo/matrix.hpp"
#include "oodzoo/sim_io.hpp"
#include "oodzoo/synth.hpp"
#include "test_util.hpp"

using namespace oodzoo;
using testutil::TempDir;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Small complementary bundle shared by the tests in this file.
const std::filesystem::path& bundle() {
  static TempDir dir;
  static std::filesystem::path manifest = [] {
    auto cfg = SynthBenchConfig::complementary(9);
    cfg.n_train = 300;
    cfg.n_val = 1000;
    cfg.n_test = 400;
    cfg.n_ood = 200;
    cfg.k = 5;
    return write_synth_bundle(cfg, dir.path());
  }();
  return manifest;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and usage errors") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"bench"}).code == 1);
}

TEST_CASE("validate") {
  auto r = run({"validate", "--manifest", bundle().string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("m=2") != std::string::npos);
  CHECK(run({"validate", "--manifest", "/nonexistent/manifest.json"}).code == 1);
}

TEST_CASE("score") {
  TempDir out;
  auto r = run({"score", "--manifest", bundle().string(), "--split", "id_val", "--out", out.path().string()});
  CHECK(r.code == 0);
  const auto m = read_matrix(out / "id_val.scores.zfm");
  CHECK(m.rows() == 1000);
  CHECK(m.cols() == 2);
  CHECK(std::filesystem::exists(out / "id_val.scores.json"));
  CHECK(run({"score", "--manifest", bundle().string(), "--split", "unknown_name"}).code == 1);
  CHECK(run({"score", "--manifest", "/nonexistent.json", "--split", "id_val"}).code == 1);
}

TEST_CASE("bench") {
  TempDir out;
  auto r = run({"bench", "--manifest", bundle().string(), "--schemes", "bh", "--report",
                (out / "r.csv").string(), "--quiet"});
  CHECK(r.code == 0);
  const auto csv = testutil::slurp(out / "r.csv");
  CHECK(csv.rfind("method,dataset,tpr,fpr,auc\n", 0) == 0);
  CHECK(csv.find("bh,ood_a,") != std::string::npos);
  CHECK(csv.find("bh,Average,") != std::string::npos);
  CHECK(std::filesystem::exists(out / "r.json"));

  CHECK(run({"bench", "--manifest", bundle().string(), "--tpr0", "0.935", "--quiet"}).code == 0);
  CHECK(run({"bench", "--manifest", bundle().string(), "--tpr0", "1.5"}).code == 1);
  CHECK(run({"bench", "--manifest", bundle().string(), "--schemes", "fisher"}).code == 1);
  CHECK(run({"bench", "--manifest", bundle().string(), "--ood", "nope"}).code == 1);

  r = run({"bench", "--manifest", bundle().string(), "--schemes", "bh,naive,average,voting"});
  CHECK(r.code == 0);
  CHECK(r.out.find("voting") != std::string::npos);
}

TEST_CASE("simulate") {
  auto r = run({"simulate", "id-uniform", "--m", "7", "--tpr0", "0.95", "--trials", "20000", "--seed", "1"});
  CHECK(r.code == 0);
  CHECK(r.out.find("naive") != std::string::npos);
  r = run({"simulate", "mixture", "--m", "100", "--pi", "0.2", "--g-shape", "0.1", "--alpha", "0.05", "--trials",
           "2000"});
  CHECK(r.code == 0);
  CHECK(r.out.find("\"fdr\"") != std::string::npos);

  TempDir dir;
  auto cfg = SynthBenchConfig::complementary();
  cfg.n_train = 200;
  cfg.n_val = 500;
  cfg.n_test = 300;
  cfg.n_ood = 100;
  cfg.k = 5;
  testutil::spit(dir / "synth.json", synth_config_to_json(cfg));
  r = run({"simulate", "synth", "--config", (dir / "synth.json").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("Average") != std::string::npos);

  CHECK(run({"simulate", "id-uniform", "--tpr0", "2"}).code == 1);
  CHECK(run({"simulate", "mixture", "--pi", "0"}).code == 1);
  CHECK(run({"simulate", "id-uniform", "--config", (dir / "missing.json").string()}).code == 1);
  CHECK(run({"simulate"}).code == 1);
}

TEST_CASE("explain") {
  auto r = run({"explain", "--manifest", bundle().string(), "--ood", "ood_a", "--index", "0"});
  CHECK(r.code == 0);
  CHECK(r.out.find("\"label\"") != std::string::npos);
  r = run({"explain", "--manifest", bundle().string(), "--ood", "test_id", "--index", "3"});
  CHECK(r.code == 0);
  CHECK(run({"explain", "--manifest", bundle().string(), "--ood", "ood_a", "--index", "100000"}).code == 1);
  CHECK(run({"explain", "--manifest", bundle().string(), "--ood", "ood_a", "--index", "0", "--scheme", "x"}).code ==
        1);
}

TEST_CASE("exit code mapping") {
  CHECK(cli::exit_code_for(Errc::IoError) == 2);
  CHECK(cli::exit_code_for(Errc::SingularCovariance) == 2);
  CHECK(cli::exit_code_for(Errc::SchemaError) == 1);
  CHECK(cli::exit_code_for(Errc::MissingSplit) == 1);
}

}  // TEST_SUITE
