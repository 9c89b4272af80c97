#pragma once

// Stage-by-stage compression of a Markov system: sample particle clouds from
// every support point, select at most M representatives with the dual
// subgradient method, form the implied kernel and push the marginal forward.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

#include "kc/core_model.hpp"
#include "kc/random.hpp"
#include "kc/scenario_gen.hpp"
#include "kc/selection_dual.hpp"
#include "kc/selection_instance.hpp"

namespace kc {

struct StageSpec {
  std::size_t samples_per_source = 100;
  std::size_t candidate_count = 256;
  std::size_t budget = 50;
  double order = 1.0;

  void validate() const;
};

/// Sampling access to the kernels Q_t(. | z).
class GenerativeKernel {
 public:
  virtual ~GenerativeKernel() = default;
  virtual std::vector<Point> sample(std::size_t stage, const Point& from, std::size_t count, Rng& rng) const = 0;
};

/// next = carry * from + Y, Y drawn from an equally weighted Gaussian mixture.
class MixtureKernel final : public GenerativeKernel {
 public:
  MixtureKernel(std::vector<GaussianComponent> components, double carry);
  std::vector<Point> sample(std::size_t stage, const Point& from, std::size_t count, Rng& rng) const override;

 private:
  std::vector<GaussianComponent> components_;
  double carry_;
};

/// Adapter for kernels given as a callable.
class FunctionKernel final : public GenerativeKernel {
 public:
  using Sampler = std::function<std::vector<Point>(std::size_t, const Point&, std::size_t, Rng&)>;
  explicit FunctionKernel(Sampler sampler) : sampler_(std::move(sampler)) {}
  std::vector<Point> sample(std::size_t stage, const Point& from, std::size_t count, Rng& rng) const override {
    return sampler_(stage, from, count, rng);
  }

 private:
  Sampler sampler_;
};

/// Finitely supported system: supports X_0..X_T, marginals, kernels
/// Q_t : X_t -> P(X_{t+1}) and the per-stage kernel errors Delta_t.
struct ApproximateSystem {
  std::vector<std::vector<Point>> supports;
  std::vector<DiscreteDistribution> marginals;
  std::vector<DiscreteKernel> kernels;
  std::vector<double> errors;

  std::size_t horizon() const noexcept { return kernels.size(); }
};

/// Builds a system from x0 and discrete kernels, composing the marginals.
/// Stage supports are taken from the kernel sources.
ApproximateSystem make_discrete_system(const Point& x0, std::vector<DiscreteKernel> kernels);

SelectionInstance build_stage_instance(const DiscreteDistribution& marginal,
                                       const std::vector<std::vector<Point>>& clouds, std::vector<Point> candidates,
                                       double p, std::size_t budget);

/// Row s puts mass (#particles of s assigned to k) / |I_s| on candidate k, for
/// the selected candidates that receive particles, in candidate order.
DiscreteKernel implied_kernel(const SelectionInstance& instance, const BitVector& gamma,
                              std::span<const std::size_t> assignment, std::span<const Point> sources);

enum class CandidateMode { Sobol, ParticleSubset };

struct PipelineOptions {
  CandidateMode candidates = CandidateMode::Sobol;
  double box_margin = 0.05;  // fraction of the pooled bounding-box width added per side
  std::uint64_t seed = 0;
  SolverConfig solver;
};

struct StageDiagnostics {
  std::vector<std::vector<Point>> clouds;  // per source of the stage
  std::vector<Point> candidates;
  SelectionResult selection;
};

struct PipelineRun {
  ApproximateSystem system;
  std::vector<StageDiagnostics> stages;
};

/// Pooled bounding box of the clouds, widened by `margin` of its width per
/// side (zero-width coordinates get half a unit per side).
std::pair<Point, Point> candidate_box(const std::vector<std::vector<Point>>& clouds, double margin);

PipelineRun approximate_system(const GenerativeKernel& kernel, const Point& x0, std::span<const StageSpec> stages,
                               const PipelineOptions& options);

/// Per stage: support, marginal, kernel and Delta_t.
nlohmann::json stage_to_json(const ApproximateSystem& system, std::size_t t);
nlohmann::json system_to_json(const ApproximateSystem& system);
ApproximateSystem system_from_json(const nlohmann::json& j);

}  // namespace kc
