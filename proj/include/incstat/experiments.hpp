// experiments.hpp
//
// Configuration, orchestration and reporting behind the command-line tool.
// A config is a key = value file; each subcommand accepts a fixed key set
// and rejects anything else.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "incstat/corrector.hpp"

namespace incstat {

inline constexpr int kConfigSchemaVersion = 1;

struct ExperimentConfig {
  std::string subcommand;
  // Effective values after defaults and overrides, sorted by key.
  std::map<std::string, std::string> values;
  // The config file as read.
  std::string text;

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;

  // "key = value" lines in key order; embedded in every artifact.
  std::string serialize() const;
};

const std::vector<std::string>& subcommands();

// Parses and checks keys against the subcommand schema; fills defaults.
// A --seed override replaces the "seed" key.
ExperimentConfig parse_config(const std::string& subcommand, const std::string& text,
                              std::optional<std::uint64_t> seed_override = {});

ScalingConfig scaling_config_from(const ExperimentConfig& cfg, int threads);

struct RunOptions {
  std::filesystem::path out_dir = ".";
  int threads = 1;
};

struct RunResult {
  std::vector<std::filesystem::path> artifacts;
  std::string summary;
};

// Validates every field, then computes and writes the CSV and JSON artifacts.
RunResult run(const ExperimentConfig& cfg, const RunOptions& opts);

// Human-readable summary of JSON artifacts written by run(), grouped by d.
std::string report(const std::vector<std::filesystem::path>& artifacts);

std::string verdict_sentence(Verdict v);

enum class ExitCode : int {
  ok = 0,
  config = 2,
  io = 3,
  budget = 4,
  generator = 5,
  numerical = 6,
  usage = 64,
};

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Maps the active exception to an exit code and a JSON error document.
ExitCode classify_exception(std::exception_ptr e, std::string& error_json);

}  // namespace incstat
