#include "kc/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "kc/risk_eval.hpp"
#include "kc/selection_instance.hpp"

namespace kc {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("KC_LOG");
  if (!env) return LogLevel::Error;
  const std::string value(env);
  if (value == "debug") return LogLevel::Debug;
  if (value == "info") return LogLevel::Info;
  return LogLevel::Error;
}

void log(LogLevel level, const std::string& message) {
  if (level <= log_level()) std::cerr << "[kc] " << message << '\n';
}

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ConfigValidation, "field '" + field + "': " + what);
}

template <typename T>
T field(const json& obj, const std::string& key, const std::string& path, T fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    invalid(path, "has the wrong type");
  }
}

template <typename T>
T required(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key) || obj.at(key).is_null()) invalid(path, "is required");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    invalid(path, "has the wrong type");
  }
}

std::size_t positive_size(const json& obj, const std::string& key, const std::string& path,
                          std::optional<std::size_t> fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) {
    if (!fallback) invalid(path, "is required");
    return *fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() <= 0) invalid(path, "must be a positive integer");
  return v.get<std::size_t>();
}

std::vector<GaussianComponent> parse_components(const json& doc) {
  if (!doc.contains("mixture")) return reference_mixture();
  std::vector<GaussianComponent> out;
  const json& comps = doc.at("mixture").at("components");
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const std::string path = "mixture.components[" + std::to_string(c) + "]";
    try {
      auto mean = comps[c].at("mean").get<std::vector<double>>();
      std::vector<double> cov;
      for (const auto& row : comps[c].at("cov")) {
        for (double v : row.get<std::vector<double>>()) cov.push_back(v);
      }
      out.emplace_back(Point(std::move(mean)), std::move(cov));
    } catch (const json::exception&) {
      invalid(path, "needs 'mean' (array) and 'cov' (matrix)");
    } catch (const Error& e) {
      invalid(path, e.what());
    }
  }
  if (out.empty()) invalid("mixture.components", "must not be empty");
  return out;
}

CandidateMode parse_candidate_mode(const json& obj, const std::string& path) {
  const auto name = field<std::string>(obj, "candidates", path, "sobol");
  if (name == "sobol") return CandidateMode::Sobol;
  if (name == "particles") return CandidateMode::ParticleSubset;
  invalid(path, "must be 'sobol' or 'particles'");
}

SolverConfig parse_solver(const json& doc) {
  SolverConfig s;
  if (!doc.contains("solver")) return s;
  const json& j = doc.at("solver");
  s.alpha0 = field(j, "alpha0", "solver.alpha0", s.alpha0);
  s.epsilon = field(j, "epsilon", "solver.epsilon", s.epsilon);
  s.kappa1 = field(j, "kappa1", "solver.kappa1", s.kappa1);
  s.kappa2 = field(j, "kappa2", "solver.kappa2", s.kappa2);
  s.band = field(j, "band", "solver.band", s.band);
  s.max_iter = positive_size(j, "max_iter", "solver.max_iter", s.max_iter);
  if (j.contains("batch") && !j.at("batch").is_null()) s.batch = positive_size(j, "batch", "solver.batch", {});
  s.recovery_window = positive_size(j, "recovery_window", "solver.recovery_window", s.recovery_window);
  s.recovery_tolerance = field(j, "recovery_tolerance", "solver.recovery_tolerance", s.recovery_tolerance);
  s.recovery_sampling = field(j, "recovery_sampling", "solver.recovery_sampling", s.recovery_sampling);
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::string format_row(std::span<const double> values) {
  std::string line;
  char buf[64];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, i == 0 ? "%.17g" : ",%.17g", values[i]);
    line += buf;
  }
  return line;
}

std::string coords_header(std::size_t dim) {
  std::string header;
  for (std::size_t d = 0; d < dim; ++d) header += (d ? ",x" : "x") + std::to_string(d);
  return header;
}

std::string points_csv(const std::vector<Point>& points) {
  std::ostringstream out;
  out << coords_header(points.empty() ? 0 : points[0].dim()) << '\n';
  for (const auto& p : points) out << format_row(p.coords()) << '\n';
  return out.str();
}

std::string seed_suffix(const ExperimentConfig& config, std::uint64_t seed) {
  return config.seeds.size() > 1 ? "_seed" + std::to_string(seed) : std::string();
}

void write_plot_data(const fs::path& dir, const SelectRun& run, const std::string& suffix) {
  const std::size_t dim = run.candidates.empty() ? 0 : run.candidates[0].dim();
  std::ostringstream samples;
  samples << coords_header(dim) << ",group\n";
  for (std::size_t g = 0; g < run.clouds.size(); ++g) {
    for (const auto& x : run.clouds[g]) samples << format_row(x.coords()) << ',' << g << '\n';
  }
  write_text(dir / ("plot_samples" + suffix + ".csv"), samples.str());

  std::ostringstream candidates;
  candidates << coords_header(dim) << ",selected\n";
  for (std::size_t k = 0; k < run.candidates.size(); ++k) {
    candidates << format_row(run.candidates[k].coords()) << ',' << int(run.result.gamma[k]) << '\n';
  }
  write_text(dir / ("plot_candidates" + suffix + ".csv"), candidates.str());
}

void execute_generate(const ExperimentConfig& config) {
  for (std::uint64_t seed : config.seeds) {
    const auto clouds = sample_gaussian_mixture(config.components, config.samples_per_component, seed);
    const std::string suffix = seed_suffix(config, seed);
    json dists = json::array();
    for (std::size_t c = 0; c < clouds.size(); ++c) {
      write_text(config.out_dir / ("cloud_" + std::to_string(c) + suffix + ".csv"), points_csv(clouds[c]));
      dists.push_back(DiscreteDistribution::uniform(clouds[c]));
    }
    write_text(config.out_dir / ("clouds" + suffix + ".json"), dists.dump(2) + "\n");
    if (config.candidate_count > 0) {
      const auto box = config.box ? *config.box : candidate_box(clouds, config.box_margin);
      const auto lattice = sobol_lattice(box.first.dim(), config.candidate_count, box.first, box.second);
      write_text(config.out_dir / ("candidates" + suffix + ".csv"), points_csv(lattice));
    }
    log(LogLevel::Info, "generated " + std::to_string(clouds.size()) + " clouds for seed " + std::to_string(seed));
  }
}

void execute_select(const ExperimentConfig& config) {
  std::ostringstream summary;
  summary << "seed,dim_beta,dim_gamma,wall_time_s,W,gap,selected,iterations,status\n";
  json metadata = json::array();
  for (std::uint64_t seed : config.seeds) {
    const SelectRun run = run_selection(config, seed);
    const std::string suffix = seed_suffix(config, seed);

    // Rebuild the instance view for serialization (groups and candidates).
    std::vector<ParticleGroup> groups;
    for (const auto& cloud : run.clouds) {
      groups.push_back({1.0 / (static_cast<double>(run.clouds.size()) * static_cast<double>(cloud.size())), cloud});
    }
    const SelectionInstance instance(std::move(groups), run.candidates, config.order, config.budget);
    json result = result_to_json(instance, run.result);
    result["seed"] = seed;
    write_text(config.out_dir / ("result" + suffix + ".json"), result.dump(2) + "\n");

    std::ostringstream history;
    write_history_csv(history, run.result.history);
    write_text(config.out_dir / ("diagnostics" + suffix + ".csv"), history.str());
    if (config.emit_plot_data) write_plot_data(config.out_dir, run, suffix);

    char line[256];
    std::snprintf(line, sizeof line, "%llu,%zu,%zu,%.3f,%.6f,%.6g,%zu,%zu,%s\n",
                  static_cast<unsigned long long>(seed), run.dim_beta, run.dim_gamma, run.wall_seconds, run.distance,
                  run.result.gap, count_selected(run.result.gamma), run.result.iterations,
                  run.result.status == SolverStatus::Converged ? "converged" : "max_iter_exceeded");
    summary << line;
    metadata.push_back({{"seed", seed}, {"wall_time_s", run.wall_seconds}});
    log(LogLevel::Info, std::string("select: ") + line);
  }
  write_text(config.out_dir / "summary.csv", summary.str());
  write_text(config.out_dir / "metadata.json", metadata.dump(2) + "\n");
}

void execute_pipeline(const ExperimentConfig& config) {
  const MixtureKernel kernel(config.components, config.pipeline.carry);
  PipelineOptions options;
  options.candidates = config.pipeline.candidates;
  options.box_margin = config.box_margin;
  options.seed = config.seeds.front();
  options.solver = config.solver;
  options.solver.threads = config.threads;

  const auto start = std::chrono::steady_clock::now();
  const PipelineRun run = approximate_system(kernel, config.pipeline.x0, config.pipeline.stages, options);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const auto& system = run.system;
  for (std::size_t t = 0; t < system.supports.size(); ++t) {
    write_text(config.out_dir / ("stage_" + std::to_string(t) + ".json"), stage_to_json(system, t).dump(2) + "\n");
  }
  write_text(config.out_dir / "system.json", system_to_json(system).dump(2) + "\n");

  std::ostringstream summary;
  summary << "t,sources,selected_support,delta,gap,iterations\n";
  for (std::size_t t = 0; t < run.stages.size(); ++t) {
    std::ostringstream history;
    write_history_csv(history, run.stages[t].selection.history);
    write_text(config.out_dir / ("diagnostics_stage_" + std::to_string(t) + ".csv"), history.str());
    char line[256];
    std::snprintf(line, sizeof line, "%zu,%zu,%zu,%.17g,%.17g,%zu\n", t, system.supports[t].size(),
                  system.supports[t + 1].size(), system.errors[t], run.stages[t].selection.gap,
                  run.stages[t].selection.iterations);
    summary << line;
  }
  write_text(config.out_dir / "summary.csv", summary.str());
  write_text(config.out_dir / "metadata.json", json{{"wall_time_s", wall}}.dump(2) + "\n");
  log(LogLevel::Info, "pipeline: " + std::to_string(run.stages.size()) + " stages in " + std::to_string(wall) + " s");
}

void execute_evaluate(const ExperimentConfig& config) {
  std::ifstream in(config.evaluate.system_path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + config.evaluate.system_path.string());
  ApproximateSystem system;
  try {
    system = system_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigParse, "system file: " + std::string(e.what()));
  }
  std::vector<CostFunction> costs;
  for (const auto& text : config.evaluate.costs) costs.push_back(CostExpression::parse(text));
  const RiskMapping sigma =
      config.evaluate.risk == "semideviation" ? semideviation_mapping(config.evaluate.kappa) : expectation_mapping();
  const ValueTable table = evaluate_backward(system, costs, sigma);
  std::ostringstream out;
  write_value_table_csv(out, table);
  write_text(config.out_dir / "values.csv", out.str());
  log(LogLevel::Info, "evaluate: v_0 = " + std::to_string(table.values.front().front()));
}

}  // namespace

std::optional<Mode> parse_mode(const std::string& name) {
  if (name == "generate") return Mode::Generate;
  if (name == "select") return Mode::Select;
  if (name == "pipeline") return Mode::Pipeline;
  if (name == "evaluate") return Mode::Evaluate;
  return std::nullopt;
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Generate: return "generate";
    case Mode::Select: return "select";
    case Mode::Pipeline: return "pipeline";
    case Mode::Evaluate: return "evaluate";
  }
  return "unknown";
}

void apply_override(json& root, const std::string& dotted_path, const std::string& value) {
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::exception&) {
    parsed = value;
  }
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted_path.find('.', start);
    const std::string key = dotted_path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw Error(ErrorCode::ConfigParse, "bad override path '" + dotted_path + "'");
    if (!node->is_object()) *node = json::object();
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(parsed);
}

ExperimentConfig parse_config(json doc, std::optional<Mode> mode, const ConfigOverrides& overrides) {
  if (!doc.is_object()) throw Error(ErrorCode::ConfigParse, "configuration must be a JSON object");
  for (const auto& [path, value] : overrides.assignments) apply_override(doc, path, value);

  ExperimentConfig config;
  if (doc.contains("mode")) {
    const auto named = parse_mode(field<std::string>(doc, "mode", "mode", ""));
    if (!named) invalid("mode", "must be one of generate, select, pipeline, evaluate");
    if (mode && *mode != *named) invalid("mode", "config says " + to_string(*named) + ", command says " + to_string(*mode));
    config.mode = *named;
  } else if (mode) {
    config.mode = *mode;
  } else {
    invalid("mode", "is required");
  }

  config.components = parse_components(doc);
  config.samples_per_component = positive_size(doc, "samples_per_component", "samples_per_component", 100);
  config.order = field(doc, "p", "p", 1.0);
  if (!(config.order >= 1.0)) invalid("p", "must be >= 1");
  config.candidates = parse_candidate_mode(doc, "candidates");
  config.box_margin = field(doc, "box_margin", "box_margin", 0.05);
  if (doc.contains("box")) {
    try {
      config.box = std::make_pair(doc.at("box").at("low").get<Point>(), doc.at("box").at("high").get<Point>());
    } catch (const std::exception&) {
      invalid("box", "needs 'low' and 'high' points");
    }
  }
  config.solver = parse_solver(doc);

  if (doc.contains("seeds")) {
    config.seeds = required<std::vector<std::uint64_t>>(doc, "seeds", "seeds");
    if (config.seeds.empty()) invalid("seeds", "must not be empty");
  } else {
    config.seeds = {field<std::uint64_t>(doc, "seed", "seed", 0)};
  }
  if (overrides.seed) config.seeds = {*overrides.seed};
  config.threads = positive_size(doc, "threads", "threads", 1);
  if (overrides.threads) config.threads = *overrides.threads;
  if (config.threads == 0) invalid("threads", "must be positive");
  config.solver.threads = config.threads;
  config.out_dir = field<std::string>(doc, "out", "out", "out");
  if (overrides.out) config.out_dir = *overrides.out;
  config.emit_plot_data = field(doc, "emit_plot_data", "emit_plot_data", false) || overrides.emit_plot_data;

  switch (config.mode) {
    case Mode::Generate:
      if (doc.contains("K")) config.candidate_count = positive_size(doc, "K", "K", {});
      break;
    case Mode::Select: {
      config.candidate_count = positive_size(doc, "K", "K", {});
      config.budget = positive_size(doc, "M", "M", {});
      if (config.budget > config.candidate_count) invalid("M", "must not exceed K");
      try {
        config.solver.validate(config.candidate_count);
      } catch (const Error& e) {
        invalid("solver", e.what());
      }
      break;
    }
    case Mode::Pipeline: {
      if (!doc.contains("pipeline")) invalid("pipeline", "is required");
      const json& pj = doc.at("pipeline");
      try {
        config.pipeline.x0 = required<Point>(pj, "x0", "pipeline.x0");
      } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigValidation) throw;
        invalid("pipeline.x0", e.what());
      }
      config.pipeline.carry = field(pj, "carry", "pipeline.carry", 0.5);
      config.pipeline.candidates = parse_candidate_mode(pj, "pipeline.candidates");
      if (!pj.contains("stages") || !pj.at("stages").is_array() || pj.at("stages").empty()) {
        invalid("pipeline.stages", "must be a nonempty array");
      }
      const json& stages = pj.at("stages");
      for (std::size_t t = 0; t < stages.size(); ++t) {
        const std::string path = "pipeline.stages[" + std::to_string(t) + "]";
        StageSpec spec;
        spec.samples_per_source = positive_size(stages[t], "samples_per_source", path + ".samples_per_source", 100);
        spec.candidate_count = positive_size(stages[t], "K", path + ".K", {});
        spec.budget = positive_size(stages[t], "M", path + ".M", {});
        spec.order = field(stages[t], "p", path + ".p", config.order);
        try {
          spec.validate();
        } catch (const Error& e) {
          invalid(path, e.what());
        }
        config.pipeline.stages.push_back(spec);
      }
      if (config.pipeline.x0.dim() != config.components.front().dim()) {
        invalid("pipeline.x0", "dimension differs from the mixture");
      }
      break;
    }
    case Mode::Evaluate: {
      if (!doc.contains("evaluate")) invalid("evaluate", "is required");
      const json& ej = doc.at("evaluate");
      config.evaluate.system_path = required<std::string>(ej, "system", "evaluate.system");
      const json& costs = ej.contains("costs") ? ej.at("costs") : json();
      if (costs.is_string()) {
        config.evaluate.costs = {costs.get<std::string>()};
      } else if (costs.is_array() && !costs.empty()) {
        config.evaluate.costs = costs.get<std::vector<std::string>>();
      } else {
        invalid("evaluate.costs", "must be an expression or a nonempty array of expressions");
      }
      for (const auto& text : config.evaluate.costs) {
        try {
          (void)CostExpression::parse(text);
        } catch (const Error& e) {
          invalid("evaluate.costs", e.what());
        }
      }
      config.evaluate.risk = field<std::string>(ej, "risk", "evaluate.risk", "expectation");
      if (config.evaluate.risk != "expectation" && config.evaluate.risk != "semideviation") {
        invalid("evaluate.risk", "must be 'expectation' or 'semideviation'");
      }
      config.evaluate.kappa = field(ej, "kappa", "evaluate.kappa", 0.0);
      if (!(config.evaluate.kappa >= 0.0 && config.evaluate.kappa <= 1.0)) invalid("evaluate.kappa", "must lie in [0,1]");
      break;
    }
  }
  return config;
}

ExperimentConfig load_config(const fs::path& path, std::optional<Mode> mode, const ConfigOverrides& overrides) {
  json doc = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigParse, "cannot open config " + path.string());
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ConfigParse, path.string() + ": " + e.what());
    }
  }
  return parse_config(std::move(doc), mode, overrides);
}

SelectRun run_selection(const ExperimentConfig& config, std::uint64_t seed) {
  SelectRun run;
  run.seed = seed;
  run.clouds = sample_gaussian_mixture(config.components, config.samples_per_component, seed);

  if (config.candidates == CandidateMode::Sobol) {
    const auto box = config.box ? *config.box : candidate_box(run.clouds, config.box_margin);
    run.candidates = sobol_lattice(box.first.dim(), config.candidate_count, box.first, box.second);
  } else {
    std::vector<Point> pooled;
    for (const auto& c : run.clouds) pooled.insert(pooled.end(), c.begin(), c.end());
    Rng rng(seed, 0x5eed0000ULL);
    auto picked = rng.sample_without_replacement(pooled.size(), config.candidate_count);
    std::sort(picked.begin(), picked.end());
    for (std::size_t idx : picked) run.candidates.push_back(pooled[idx]);
    if (config.budget > run.candidates.size()) {
      throw Error(ErrorCode::ConfigValidation, "field 'M': exceeds the number of particle candidates");
    }
  }

  // Sources z^s are the component means, weighted uniformly.
  std::vector<Point> sources;
  for (const auto& c : config.components) sources.push_back(c.mean());
  const auto marginal = DiscreteDistribution::uniform(sources);
  const SelectionInstance instance =
      build_stage_instance(marginal, run.clouds, run.candidates, config.order, config.budget);

  SolverConfig solver = config.solver;
  solver.seed = seed;
  solver.threads = config.threads;
  const auto start = std::chrono::steady_clock::now();
  run.result = run_subgradient(instance, solver);
  run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  run.dim_gamma = instance.candidate_count();
  run.dim_beta = instance.particle_count() * instance.candidate_count();
  run.distance = config.order == 1.0 ? run.result.objective : std::pow(run.result.objective, 1.0 / config.order);
  return run;
}

void execute(const ExperimentConfig& config) {
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + config.out_dir.string() + ": " + ec.message());
  switch (config.mode) {
    case Mode::Generate: execute_generate(config); break;
    case Mode::Select: execute_select(config); break;
    case Mode::Pipeline: execute_pipeline(config); break;
    case Mode::Evaluate: execute_evaluate(config); break;
  }
}

int run_experiment(const fs::path& config_path, std::optional<Mode> mode, const ConfigOverrides& overrides) {
  try {
    const ExperimentConfig config = load_config(config_path, mode, overrides);
    execute(config);
    return 0;
  } catch (const Error& e) {
    std::cerr << "kc: " << e.what() << '\n';
    return (e.code() == ErrorCode::ConfigParse || e.code() == ErrorCode::ConfigValidation) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "kc: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace kc
