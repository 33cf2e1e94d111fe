#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "shiftlab/error.hpp"
#include "shiftlab/runner.hpp"

using namespace shiftlab;
namespace fs = std::filesystem;

namespace {

bool has_rule(const std::vector<Violation>& v, const std::string& rule) {
  for (const auto& x : v)
    if (x.rule == rule) return true;
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("shiftlab_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("runner") {

TEST_CASE("config parsing") {
  const auto c = Config::parse("# comment\nseed = 4\n[process]\nfamily = garch  # trailing\n\nmu=2\n");
  CHECK(c.get("seed") == "4");
  CHECK(c.get("process.family") == "garch");
  CHECK(c.get("process.mu") == "2");
  CHECK_FALSE(c.has("mu"));
  CHECK_THROWS_AS(Config::parse("seed 4\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[process\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("seed = 1\nseed = 2\n"), ConfigError);
}

TEST_CASE("minimal config is valid") {
  CHECK(validate(Config::parse("experiment = variance-report\n")).empty());
  CHECK(validate(Config{}).empty());
}

TEST_CASE("unknown and inapplicable keys") {
  CHECK(has_rule(validate(Config::parse("colour = blue\n")), "unknown-key"));
  CHECK(has_rule(validate(Config::parse("process.mu = 2\n")), "inapplicable-key"));
  CHECK(has_rule(validate(Config::parse("experiment = variance-report\nrate.n = 4\n")),
                 "inapplicable-key"));
  CHECK(has_rule(validate(Config::parse("experiment = nonsense\n")), "unknown-experiment"));
}

TEST_CASE("model constraints surface as violations") {
  const auto lam = validate(Config::parse(
      "experiment = block-identities\nprocess.coefficients = explicit(1, 0.5)\nblocks.n = 4096\n"
      "blocks.lambda = 0.5\nblocks.p = 3\n"));
  CHECK(has_rule(lam, "lambda-range"));
  const auto rec = validate(Config::parse("process.family = recursion\nprocess.a = constant(1)\n"));
  CHECK(has_rule(rec, "recursion-contraction"));
  const auto garch = validate(
      Config::parse("process.family = garch\nprocess.alpha = 0.6\nprocess.beta = 0.6\n"));
  CHECK(has_rule(garch, "garch-stationarity"));
  const auto plan = validate(Config::parse(
      "experiment = block-identities\nprocess.coefficients = explicit(1, 0.5)\nblocks.n = 100\n"));
  CHECK(has_rule(plan, "block-plan-infeasible"));
  const auto mdep = validate(Config::parse("experiment = block-identities\n"));
  CHECK(has_rule(mdep, "not-m-dependent"));
  const auto lags = validate(Config::parse(
      "experiment = dependence-profile\nprocess.coefficients = explicit(1, 0.5)\ndependence.lags = 1..3\n"));
  CHECK(has_rule(lags, "lag-range"));
  const auto p = validate(Config::parse("experiment = dependence-profile\ndependence.p = 4\n"));
  CHECK(has_rule(p, "moment-order"));
  const auto R = validate(Config::parse("replications = 10\n"));
  CHECK(has_rule(R, "replications"));
  const auto num = validate(Config::parse("process.scale = abc\n"));
  CHECK_FALSE(num.empty());
}

TEST_CASE("violations carry the config path") {
  const auto v = validate(
      Config::parse("process.family = garch\nprocess.alpha = 0.6\nprocess.beta = 0.6\n"));
  REQUIRE_FALSE(v.empty());
  CHECK(v.front().path.rfind("process.", 0) == 0);
}

TEST_CASE("exit statuses") {
  const auto out = scratch("exit");
  CHECK(run(Config::parse("process.family = garch\nprocess.alpha = 0.6\nprocess.beta = 0.6\n"),
            {out, 1})
            .exit_code == exit_validation);
  CHECK(run(Config::parse("experiment = block-identities\nprocess.coefficients = explicit(1, 0.5)\n"
                          "blocks.n = 100\n"),
            {out, 1})
            .exit_code == exit_gate);
  CHECK(run(Config::parse("process.coefficients = explicit(1, -1)\nreplications = 2000\n"), {out, 1})
            .exit_code == exit_gate);
  const auto garch = run(
      Config::parse("process.family = garch\nprocess.alpha = 0.6\nprocess.beta = 0.6\n"), {out, 1});
  CHECK(garch.summary.find("garch-stationarity") != std::string::npos);
}

TEST_CASE("report bundle layout") {
  const auto out = scratch("bundle");
  const auto r = run(Config::parse("experiment = variance-report\nvariance.max_lag = 4\n"
                                   "process.coefficients = explicit(1, 0.5)\n"),
                     {out, 1});
  REQUIRE(r.exit_code == exit_ok);
  for (const char* f : {"report.json", "config.echo", "run_meta.json", "autocovariance.csv"})
    CHECK(fs::exists(out / f));
  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(report["experiment"] == "variance-report");
  CHECK(report["results"]["s2"].get<double>() == doctest::Approx(2.25));
  CHECK(report["config"]["process.innovation"] == "normal");
  CHECK_FALSE(report["config"].contains("process.mu"));
  const auto echo = slurp(out / "config.echo");
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(echo)));
  CHECK(report["config_hash"] == hash);
  CHECK(echo.find("variance.max_lag = 4\n") != std::string::npos);
}

TEST_CASE("fnv1a reference values") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("oracle check passes") {
  const auto out = scratch("oracle");
  CHECK(run(oracle_config(), {out, 2}).exit_code == exit_ok);
}

TEST_CASE("rate sweep reports underpowered with status 4") {
  const auto out = scratch("rate");
  const auto r = run(Config::parse("experiment = rate-sweep\nreplications = 2000\n"
                                   "process.coefficients = explicit(1)\nrate.n = 4,8,16,32\n"
                                   "rate.normalizer_replications = 100\n"),
                     {out, 1});
  CHECK(r.exit_code == exit_underpowered);
}

}
