#include "kc/markov_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kc/transport.hpp"

namespace kc {

void StageSpec::validate() const {
  if (samples_per_source == 0 || candidate_count == 0 || budget == 0) {
    throw Error(ErrorCode::InvalidArgument, "stage sizes must be positive");
  }
  if (budget > candidate_count) {
    throw Error(ErrorCode::StageBudgetInfeasible, "budget " + std::to_string(budget) + " exceeds " +
                                                      std::to_string(candidate_count) + " candidates");
  }
  check_order(order);
}

MixtureKernel::MixtureKernel(std::vector<GaussianComponent> components, double carry)
    : components_(std::move(components)), carry_(carry) {
  if (components_.empty()) throw Error(ErrorCode::InvalidArgument, "mixture needs at least one component");
}

std::vector<Point> MixtureKernel::sample(std::size_t, const Point& from, std::size_t count, Rng& rng) const {
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& component = components_[rng.uniform_index(components_.size())];
    const Point y = component.sample(rng);
    if (y.dim() != from.dim()) throw Error(ErrorCode::DimensionMismatch, "mixture and state dimensions differ");
    std::vector<double> coords(y.dim());
    for (std::size_t d = 0; d < y.dim(); ++d) coords[d] = carry_ * from[d] + y[d];
    out.emplace_back(std::move(coords));
  }
  return out;
}

ApproximateSystem make_discrete_system(const Point& x0, std::vector<DiscreteKernel> kernels) {
  ApproximateSystem system;
  system.marginals.push_back(DiscreteDistribution::dirac(x0));
  for (auto& kernel : kernels) {
    system.supports.push_back(kernel.sources());
    system.marginals.push_back(compose_marginal(system.marginals.back(), kernel));
    system.kernels.push_back(std::move(kernel));
  }
  if (system.kernels.empty()) system.supports.push_back({x0});
  else system.supports.push_back(system.marginals.back().support());
  system.errors.assign(system.kernels.size(), 0.0);
  return system;
}

SelectionInstance build_stage_instance(const DiscreteDistribution& marginal,
                                       const std::vector<std::vector<Point>>& clouds, std::vector<Point> candidates,
                                       double p, std::size_t budget) {
  if (clouds.size() != marginal.size()) {
    throw Error(ErrorCode::SourceMismatch, std::to_string(clouds.size()) + " clouds for " +
                                               std::to_string(marginal.size()) + " sources");
  }
  std::vector<ParticleGroup> groups;
  groups.reserve(clouds.size());
  for (std::size_t s = 0; s < clouds.size(); ++s) {
    if (clouds[s].empty()) throw Error(ErrorCode::EmptyCloud, "source " + std::to_string(s) + " has no particles");
    const double lambda = marginal.weights()[s];
    if (lambda <= 0.0) continue;  // zero-mass sources carry no transport cost
    groups.push_back({lambda / static_cast<double>(clouds[s].size()), clouds[s]});
  }
  return SelectionInstance(std::move(groups), std::move(candidates), p, budget);
}

DiscreteKernel implied_kernel(const SelectionInstance& instance, const BitVector& gamma,
                              std::span<const std::size_t> assignment, std::span<const Point> sources) {
  if (sources.size() != instance.group_count()) {
    throw Error(ErrorCode::SourceMismatch, "one source per particle group required");
  }
  if (assignment.size() != instance.particle_count() || gamma.size() != instance.candidate_count()) {
    throw Error(ErrorCode::DimensionMismatch, "assignment or gamma has the wrong length");
  }
  std::vector<DiscreteDistribution> rows;
  std::vector<std::size_t> counts(instance.candidate_count());
  for (std::size_t s = 0; s < instance.group_count(); ++s) {
    std::fill(counts.begin(), counts.end(), 0);
    const std::size_t offset = instance.group_offset(s);
    const std::size_t size = instance.group_size(s);
    for (std::size_t i = 0; i < size; ++i) {
      const std::size_t k = assignment[offset + i];
      if (k >= gamma.size() || !gamma[k]) {
        throw Error(ErrorCode::UnselectedAssignment, "particle assigned to unselected candidate " + std::to_string(k));
      }
      ++counts[k];
    }
    std::vector<Point> support;
    std::vector<double> weights;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (counts[k] == 0) continue;
      support.push_back(instance.candidates()[k]);
      weights.push_back(static_cast<double>(counts[k]) / static_cast<double>(size));
    }
    rows.push_back(validate_distribution(std::move(support), std::move(weights)));
  }
  return DiscreteKernel(std::vector<Point>(sources.begin(), sources.end()), std::move(rows));
}

std::pair<Point, Point> candidate_box(const std::vector<std::vector<Point>>& clouds, double margin) {
  std::vector<double> low;
  std::vector<double> high;
  for (const auto& cloud : clouds) {
    for (const auto& x : cloud) {
      if (low.empty()) {
        low.assign(x.coords().begin(), x.coords().end());
        high = low;
      }
      for (std::size_t d = 0; d < x.dim(); ++d) {
        low[d] = std::min(low[d], x[d]);
        high[d] = std::max(high[d], x[d]);
      }
    }
  }
  if (low.empty()) throw Error(ErrorCode::EmptyCloud, "no particles to bound");
  for (std::size_t d = 0; d < low.size(); ++d) {
    const double pad = high[d] > low[d] ? margin * (high[d] - low[d]) : 0.5;
    low[d] -= pad;
    high[d] += pad;
  }
  return {Point(std::move(low)), Point(std::move(high))};
}

namespace {

std::vector<Point> stage_candidates(const std::vector<std::vector<Point>>& clouds, const StageSpec& spec,
                                    const PipelineOptions& options, std::size_t t) {
  if (options.candidates == CandidateMode::Sobol) {
    auto [low, high] = candidate_box(clouds, options.box_margin);
    return sobol_lattice(low.dim(), spec.candidate_count, low, high);
  }
  std::vector<Point> pooled;
  for (const auto& cloud : clouds) pooled.insert(pooled.end(), cloud.begin(), cloud.end());
  if (spec.candidate_count >= pooled.size()) return pooled;
  Rng rng(options.seed, 0x5eed0000ULL + t);
  auto picked = rng.sample_without_replacement(pooled.size(), spec.candidate_count);
  std::sort(picked.begin(), picked.end());
  std::vector<Point> out;
  out.reserve(picked.size());
  for (std::size_t idx : picked) out.push_back(pooled[idx]);
  return out;
}

}  // namespace

PipelineRun approximate_system(const GenerativeKernel& kernel, const Point& x0, std::span<const StageSpec> stages,
                               const PipelineOptions& options) {
  PipelineRun run;
  auto& system = run.system;
  system.marginals.push_back(DiscreteDistribution::dirac(x0));
  system.supports.push_back({x0});

  for (std::size_t t = 0; t < stages.size(); ++t) {
    const StageSpec& spec = stages[t];
    spec.validate();
    const DiscreteDistribution& marginal = system.marginals[t];
    const auto& sources = marginal.support();

    StageDiagnostics diag;
    diag.clouds.resize(sources.size());
    for (std::size_t s = 0; s < sources.size(); ++s) {
      Rng rng(mix_seed(options.seed, t), s);
      diag.clouds[s] = kernel.sample(t, sources[s], spec.samples_per_source, rng);
      if (diag.clouds[s].empty()) throw Error(ErrorCode::EmptyCloud, "kernel returned no samples");
    }
    diag.candidates = stage_candidates(diag.clouds, spec, options, t);
    if (spec.budget > diag.candidates.size()) {
      throw Error(ErrorCode::StageBudgetInfeasible, "stage " + std::to_string(t) + ": budget exceeds candidates");
    }

    const SelectionInstance instance =
        build_stage_instance(marginal, diag.clouds, diag.candidates, spec.order, spec.budget);
    SolverConfig solver = options.solver;
    solver.seed = mix_seed(options.seed ^ solver.seed, 0xa11ce + t);
    diag.selection = run_subgradient(instance, solver);

    // Groups exist only for sources with positive mass.
    std::vector<Point> group_sources;
    for (std::size_t s = 0; s < sources.size(); ++s) {
      if (marginal.weights()[s] > 0.0) group_sources.push_back(sources[s]);
    }
    DiscreteKernel partial = implied_kernel(instance, diag.selection.gamma, diag.selection.assignment, group_sources);
    std::vector<DiscreteDistribution> rows;
    for (std::size_t s = 0, g = 0; s < sources.size(); ++s) {
      if (marginal.weights()[s] > 0.0) {
        rows.push_back(partial.row(g++));
      } else {
        // Unreached source: map it to its nearest selected candidate.
        std::vector<Point> selected;
        for (std::size_t k = 0; k < diag.candidates.size(); ++k) {
          if (diag.selection.gamma[k]) selected.push_back(diag.candidates[k]);
        }
        const std::vector<Point> self{sources[s]};
        const std::vector<double> one{1.0};
        const auto nearest = assignment_distance(self, one, selected, spec.order);
        rows.push_back(DiscreteDistribution::dirac(selected[nearest.assignment[0]]));
      }
    }
    DiscreteKernel q_tilde(sources, std::move(rows));

    const double objective = diag.selection.objective;
    system.errors.push_back(spec.order == 1.0 ? objective : std::pow(objective, 1.0 / spec.order));
    system.marginals.push_back(compose_marginal(marginal, q_tilde));
    system.supports.push_back(system.marginals.back().support());
    system.kernels.push_back(std::move(q_tilde));
    run.stages.push_back(std::move(diag));
  }
  return run;
}

nlohmann::json stage_to_json(const ApproximateSystem& system, std::size_t t) {
  nlohmann::json j;
  j["t"] = t;
  j["support"] = system.supports.at(t);
  j["marginal"] = system.marginals.at(t);
  if (t < system.kernels.size()) {
    j["kernel"] = system.kernels[t];
    j["delta"] = system.errors.at(t);
  }
  return j;
}

nlohmann::json system_to_json(const ApproximateSystem& system) {
  nlohmann::json stages = nlohmann::json::array();
  for (std::size_t t = 0; t < system.supports.size(); ++t) stages.push_back(stage_to_json(system, t));
  return nlohmann::json{{"horizon", system.horizon()}, {"stages", stages}};
}

ApproximateSystem system_from_json(const nlohmann::json& j) {
  ApproximateSystem system;
  for (const auto& stage : j.at("stages")) {
    system.supports.push_back(stage.at("support").get<std::vector<Point>>());
    system.marginals.push_back(stage.at("marginal").get<DiscreteDistribution>());
    if (stage.contains("kernel")) {
      system.kernels.push_back(stage.at("kernel").get<DiscreteKernel>());
      system.errors.push_back(stage.at("delta").get<double>());
    }
  }
  if (system.supports.size() != system.kernels.size() + 1) {
    throw Error(ErrorCode::ConfigValidation, "system needs one more stage support than kernels");
  }
  return system;
}

}  // namespace kc
