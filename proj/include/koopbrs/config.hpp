#pragma once

#include "koopbrs/systems.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace koopbrs {

struct SamplingConfig {
  enum class Kind { Random, Grid };
  Kind kind = Kind::Random;
  int count = 1000;
  Vec spacing;        ///< grid spacings over (x, u)
  int holdout = 200;  ///< direct route only
  int ks = 50;        ///< direct route only
};

struct ErrorConfig {
  enum class Route { Direct, Lipschitz };
  Route route = Route::Direct;
  int batch = 5;
  double alpha = 0.05;
  int n_fit = 40000;  ///< Lipschitz route: slope samples fitted
  int n_ks = 10000;   ///< Lipschitz route: slope samples held out for KS
  bool enforce_ks = true;
};

struct ExperimentConfig {
  SystemSpec system;
  std::vector<std::string> lifting;
  enum class Mode { Global, Local };
  Mode mode = Mode::Global;
  SamplingConfig sampling;
  ErrorConfig error;
  int horizon = 10;
  double threshold = 0.18;
  int split_cap = 6;
  bool adapt_B = false;
  /// Base seed: fit data and slope pairs use seed, the holdout seed + 1, the KS set seed + 2.
  std::uint64_t seed = 0;
  std::filesystem::path output = "out";
};

/// Parses YAML text. `source` names the input in error messages, which carry
/// the offending line number.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Checks the cross-field invariants; throws ConfigError.
void validate(const ExperimentConfig& cfg);

std::string to_string(ExperimentConfig::Mode mode);
ExperimentConfig::Mode parse_mode(const std::string& text);

}  // namespace koopbrs
