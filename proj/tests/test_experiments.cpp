// test_experiments.cpp

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "incstat/errors.hpp"
#include "incstat/experiments.hpp"

using namespace incstat;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("incstat_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write(const fs::path& p, const std::string& s) {
  std::ofstream os(p, std::ios::binary);
  os << s;
}

std::string config_field(const std::string& sub, const std::string& text) {
  try {
    parse_config(sub, text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

const char* kScaling1d =
    "schema_version = 1\n"
    "d = 1\n"
    "generator = iid\n"
    "mu_max = 0.25\n"
    "mu_min = 0.0009765625\n"
    "mu_points = 5\n"
    "n = 40\n"
    "seed = 3\n";

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config("green", "# comment\nschema_version = 1\nd = 2  # inline\nL = 32\nmu = 0.5\n");
  CHECK(cfg.get_int("d") == 2);
  CHECK(cfg.get("p") == "1,2");
  CHECK(cfg.get_doubles("p") == std::vector<double>{1.0, 2.0});
  CHECK(cfg.serialize().find("L = 32\n") != std::string::npos);

  CHECK(config_field("green", "schema_version = 1\nd = 2\nL = 32\nmu = 0.5\nmuu = 1\n") == "muu");
  CHECK(config_field("green", "d = 2\nL = 32\nmu = 0.5\n") == "schema_version");
  CHECK(config_field("green", "schema_version = 2\nd = 2\nL = 32\nmu = 0.5\n") == "schema_version");
  CHECK(config_field("green", "schema_version = 1\nd = 2\nmu = 0.5\n") == "L");
  CHECK(config_field("green", "schema_version = 1\nd = 2\nd = 3\nL = 8\nmu = 0.5\n") == "d");
  CHECK(config_field("green", "schema_version = 1\nd 2\n") == "line 2");
  CHECK(config_field("green", "schema_version = 1\nd = 2\nL = 32\nmu = 0.5\nseed = -1\n") == "seed");
  CHECK(config_field("report", "") == "subcommand");

  const auto over = parse_config("green", "schema_version = 1\nd = 1\nL = 32\nmu = 1\nseed = 5\n", 77);
  CHECK(over.get_u64("seed") == 77);
}

TEST_CASE("field-level validation before computation") {
  const fs::path out = scratch("validate");
  auto check_field = [&](const std::string& sub, const std::string& text, const std::string& field) {
    const auto cfg = parse_config(sub, text);
    try {
      run(cfg, RunOptions{out, 1});
      FAIL("expected a config error for " << field);
    } catch (const ConfigError& e) {
      CHECK(e.field() == field);
    }
  };
  check_field("green", "schema_version = 1\nd = 4\nL = 32\nmu = 1\n", "d");
  check_field("green", "schema_version = 1\nd = 1\nL = 32\nmu = -1\n", "mu");
  check_field("green", "schema_version = 1\nd = 1\nL = 32\nmu = 1\np = 0.5\n", "p");
  check_field("corrector-scaling", "schema_version = 1\nd = 1\ngenerator = iid\nmu_list = 0.25\n", "mu_grid");
  check_field("corrector-scaling", "schema_version = 1\nd = 1\ngenerator = nope\n", "generator");
  check_field("corrector-scaling", "schema_version = 1\nd = 1\ngenerator = gff\n", "generator");
  check_field("corrector-scaling", "schema_version = 1\nd = 2\ngenerator = iid\naxis = 2\n", "axis");
  check_field("corrector-scaling", "schema_version = 1\nd = 1\ngenerator = iid\nmu_list = 0.25,0.2,0.1,0.01,0.001\n",
              "mu_list");
  check_field("energy", "schema_version = 1\ngenerator = renewal\nbox_sizes = 16,64\n", "box_sizes");
  check_field("energy", "schema_version = 1\ngenerator = renewal\nbox_sizes = 16,64,256\ntau = uniform\ntau_a = 2\n",
              "tau");
  check_field("covariance", "schema_version = 1\nd = 1\nL = 32\ngenerator = iid\nlags = 1,1\n", "lags");

  const auto big = parse_config("corrector-scaling",
                                "schema_version = 1\nd = 3\ngenerator = iid\nmu_min = 1e-8\nmemory_budget_mb = 10\n");
  CHECK_THROWS_AS(run(big, RunOptions{out, 1}), BudgetError);
  // Nothing was computed, so nothing was written.
  CHECK((!fs::exists(out) || fs::is_empty(out)));
}

TEST_CASE("runs are byte-identical and thread-independent") {
  const auto cfg = parse_config("corrector-scaling", kScaling1d);
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const auto ra = run(cfg, RunOptions{a, 1});
  run(cfg, RunOptions{b, 3});
  CHECK(slurp(a / "scaling.csv") == slurp(b / "scaling.csv"));
  CHECK(slurp(a / "scaling_report.json") == slurp(b / "scaling_report.json"));
  CHECK(ra.summary == "verdict: diverging-powerlaw (not stationary up to translation)");
  const std::string csv = slurp(a / "scaling.csv");
  CHECK(csv.rfind("# incstat corrector-scaling\n", 0) == 0);
  CHECK(csv.find("# seed = 3\n") != std::string::npos);
  CHECK(csv.find("mu,mean,stderr,L,n\n") != std::string::npos);
  CHECK(slurp(a / "scaling_report.json").find("\"text\"") != std::string::npos);

  for (const std::string sub : {"green", "covariance", "energy"}) {
    std::string text = "schema_version = 1\n";
    if (sub == "green") text += "d = 2\nL = 32\nmu = 0.01\n";
    if (sub == "covariance") text += "d = 2\nL = 16\ngenerator = decay_alpha\nsamples = 6\nlags = 0,1;1,0;2,0\n";
    if (sub == "energy") text += "generator = renewal\nbox_sizes = 16,32,64\nexport_points = true\n";
    const auto c = parse_config(sub, text);
    const fs::path x = scratch(sub + "_x"), y = scratch(sub + "_y");
    const auto rx = run(c, RunOptions{x, 1});
    run(c, RunOptions{y, 2});
    for (const auto& art : rx.artifacts) CHECK(slurp(art) == slurp(y / art.filename()));
  }
}

TEST_CASE("report") {
  CHECK_THROWS_WITH_AS(report({}), doctest::Contains("usage"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(report({"/nonexistent/artifact.json"}), doctest::Contains("/nonexistent/artifact.json"),
                       IoError);

  const fs::path dir = scratch("report");
  fs::create_directories(dir);
  write(dir / "corrupt.json", "{ not json");
  CHECK_THROWS_WITH_AS(report({dir / "corrupt.json"}), doctest::Contains("corrupt.json"), IoError);
  write(dir / "partial.json", "{\"kind\": \"scaling\"}");
  CHECK_THROWS_WITH_AS(report({dir / "partial.json"}), doctest::Contains("partial.json"), IoError);

  write(dir / "d3.json", R"({"kind": "scaling", "report": {"generator": "iid", "d": 3, "verdict": "bounded",
    "energy_violations": 0, "fit": {"loglog_slope": -0.02, "loglog_r2": 0.5, "loglinear_slope": 0.001,
    "loglinear_r2": 0.5, "boundedness_ratio": 1.3}}})");
  const std::string text = report({dir / "d3.json"});
  CHECK(text.find("verdict: bounded (stationary up to translation)") != std::string::npos);

  const auto cfg = parse_config("corrector-scaling", kScaling1d);
  run(cfg, RunOptions{dir / "d1", 1});
  const std::string mixed = report({dir / "d3.json", dir / "d1" / "scaling_report.json"});
  const auto p1 = mixed.find("== d = 1 ==");
  const auto p3 = mixed.find("== d = 3 ==");
  REQUIRE(p1 != std::string::npos);
  REQUIRE(p3 != std::string::npos);
  CHECK(p1 < p3);
  CHECK(mixed.find("diverging-powerlaw", p1) < p3);
}

TEST_CASE("exit codes and error documents") {
  std::string doc;
  CHECK(classify_exception(std::make_exception_ptr(ConfigError("mu", "bad")), doc) == ExitCode::config);
  CHECK(doc.find("\"field\":\"mu\"") != std::string::npos);
  CHECK(classify_exception(std::make_exception_ptr(BudgetError("memory_budget_mb", "x")), doc) == ExitCode::budget);
  CHECK(classify_exception(std::make_exception_ptr(IoError("x")), doc) == ExitCode::io);
  CHECK(classify_exception(std::make_exception_ptr(GeneratorError(4, "x")), doc) == ExitCode::generator);
  CHECK(doc.find("\"realization\":4") != std::string::npos);
  CHECK(classify_exception(std::make_exception_ptr(std::runtime_error("x")), doc) == ExitCode::numerical);
}

TEST_CASE("command-line tool") {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  write(dir / "bad.cfg", "schema_version = 1\nd = 1\ngenerator = iid\nmu_list = 0.25\n");
  write(dir / "good.cfg", "schema_version = 1\nd = 1\nL = 64\nmu = 0.1\n");
  const std::string exe = INCSTAT_CLI_PATH;
  auto sh = [](const std::string& cmd) {
    const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
  };
  CHECK(sh(exe + " corrector-scaling --config " + (dir / "bad.cfg").string() + " --out " + (dir / "o1").string()) ==
        2);
  CHECK(fs::exists(dir / "o1" / "error.json"));
  CHECK_FALSE(fs::exists(dir / "o1" / "scaling.csv"));
  CHECK(sh(exe + " green --config " + (dir / "missing.cfg").string() + " --out " + (dir / "o2").string()) == 3);
  CHECK(sh(exe + " green --config " + (dir / "good.cfg").string() + " --out " + (dir / "o3").string() +
           " --seed 9 --threads 2") == 0);
  CHECK(fs::exists(dir / "o3" / "green_summary.json"));
  CHECK(sh("INCSTAT_OUT=" + (dir / "o4").string() + " " + exe + " green --config " + (dir / "good.cfg").string()) ==
        0);
  CHECK(fs::exists(dir / "o4" / "green_annuli.csv"));
  CHECK(sh(exe + " report") == 64);
  CHECK(sh(exe + " report " + (dir / "o3" / "green_summary.json").string()) == 0);
  CHECK(sh(exe + " frobnicate") == 64);
}
