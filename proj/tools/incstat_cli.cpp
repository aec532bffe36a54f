// incstat_cli.cpp
//
// incstat <subcommand> --config <file> [--out <dir>] [--seed <u64>] [--threads <n>]
// incstat report <artifact.json>...
//
// INCSTAT_OUT and INCSTAT_THREADS override the output directory and thread
// count; command-line flags take precedence over both.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "incstat/errors.hpp"
#include "incstat/experiments.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw incstat::IoError("cannot read config '" + path + "'");
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

int env_threads() {
  const char* s = std::getenv("INCSTAT_THREADS");
  if (!s || !*s) return 1;
  char* end = nullptr;
  const long v = std::strtol(s, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024) throw incstat::ConfigError("INCSTAT_THREADS", "must be an integer in [1, 1024]");
  return static_cast<int>(v);
}

int fail(std::exception_ptr e, const std::filesystem::path* out_dir) {
  std::string doc;
  const auto code = incstat::classify_exception(e, doc);
  std::cerr << doc << "\n";
  if (out_dir) {
    std::error_code ec;
    if (std::filesystem::is_directory(*out_dir, ec)) {
      std::ofstream os(*out_dir / "error.json");
      os << doc << "\n";
    }
  }
  return static_cast<int>(code);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Increment-stationary point sets: corrector, Green function and energy experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  std::vector<std::string> artifacts;

  for (const auto& name : incstat::subcommands()) {
    if (name == "report") continue;
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "key = value config file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "master seed override");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
  }
  auto* rep = app.add_subcommand("report", "summarize JSON artifacts");
  rep->add_option("artifacts", artifacts, "JSON artifacts written by the other subcommands");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(incstat::ExitCode::usage);
  }

  auto* chosen = app.get_subcommands().front();
  if (chosen == rep) {
    if (artifacts.empty()) {
      std::cerr << "usage: incstat report <artifact.json>...\n";
      return static_cast<int>(incstat::ExitCode::usage);
    }
    std::vector<std::filesystem::path> paths(artifacts.begin(), artifacts.end());
    try {
      std::cout << incstat::report(paths);
    } catch (...) {
      return fail(std::current_exception(), nullptr);
    }
    return 0;
  }

  incstat::RunOptions opts;
  if (const char* env = std::getenv("INCSTAT_OUT"); env && *env) opts.out_dir = env;
  if (!out_dir.empty()) opts.out_dir = out_dir;
  try {
    opts.threads = threads > 0 ? threads : env_threads();
    std::optional<std::uint64_t> seed_override;
    if (chosen->count("--seed")) seed_override = seed;
    const auto cfg = incstat::parse_config(chosen->get_name(), read_file(config_path), seed_override);
    const auto result = incstat::run(cfg, opts);
    for (const auto& a : result.artifacts) std::cout << "wrote " << a.string() << "\n";
    if (!result.summary.empty()) std::cout << result.summary << "\n";
  } catch (...) {
    return fail(std::current_exception(), &opts.out_dir);
  }
  return 0;
}
