#pragma once

// Experiment orchestration behind the command-line tool. A run is described by
// one JSON document; command-line flags override individual fields.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kc/markov_pipeline.hpp"
#include "kc/scenario_gen.hpp"
#include "kc/selection_dual.hpp"

namespace kc {

enum class Mode { Generate, Select, Pipeline, Evaluate };

std::optional<Mode> parse_mode(const std::string& name);
std::string to_string(Mode mode);

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::string> out;
  bool emit_plot_data = false;
  std::vector<std::pair<std::string, std::string>> assignments;  // dotted.path=value
};

struct PipelineSettings {
  Point x0;
  double carry = 0.5;
  CandidateMode candidates = CandidateMode::Sobol;
  std::vector<StageSpec> stages;
};

struct EvaluateSettings {
  std::filesystem::path system_path;
  std::vector<std::string> costs;
  std::string risk = "expectation";
  double kappa = 0.0;
};

struct ExperimentConfig {
  Mode mode = Mode::Select;
  std::vector<GaussianComponent> components;
  std::size_t samples_per_component = 100;
  std::size_t candidate_count = 0;
  std::size_t budget = 0;
  double order = 1.0;
  CandidateMode candidates = CandidateMode::Sobol;
  std::optional<std::pair<Point, Point>> box;
  double box_margin = 0.05;
  SolverConfig solver;
  std::vector<std::uint64_t> seeds{0};
  std::size_t threads = 1;
  std::filesystem::path out_dir = "out";
  bool emit_plot_data = false;
  PipelineSettings pipeline;
  EvaluateSettings evaluate;
};

/// Sets `root[a][b]... = value` for "a.b...=value"; the value is read as JSON
/// when it parses, otherwise as a string.
void apply_override(nlohmann::json& root, const std::string& dotted_path, const std::string& value);

/// Validates every mode-specific field before anything runs. Throws
/// ConfigValidation naming the offending field.
ExperimentConfig parse_config(nlohmann::json document, std::optional<Mode> mode, const ConfigOverrides& overrides);

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Mode> mode,
                             const ConfigOverrides& overrides);

struct SelectRun {
  std::uint64_t seed = 0;
  std::vector<std::vector<Point>> clouds;
  std::vector<Point> candidates;
  SelectionResult result;
  double wall_seconds = 0.0;
  std::size_t dim_beta = 0;
  std::size_t dim_gamma = 0;
  double distance = 0.0;  // objective^(1/p)
};

/// One selection run on the mixture with sources weighted uniformly.
SelectRun run_selection(const ExperimentConfig& config, std::uint64_t seed);

/// Runs the configured mode and writes its artifacts to config.out_dir.
void execute(const ExperimentConfig& config);

/// Full command path: load, validate, execute. Returns the process exit code
/// (0 success, 2 configuration errors, 1 anything else) after printing a
/// one-line diagnostic on failure.
int run_experiment(const std::filesystem::path& config_path, std::optional<Mode> mode,
                   const ConfigOverrides& overrides);

}  // namespace kc
