#pragma once

// Exact discrete optimal transport: Wasserstein distances between finitely
// supported measures, nearest-point assignment distances, and the integrated
// transportation distance between two kernels under a fixed marginal.

#include <cstddef>
#include <span>
#include <vector>

#include "kc/core_model.hpp"

namespace kc {

/// Optimal coupling. `value` is the optimal objective sum d_ik^p * plan_ik,
/// i.e. the p-th power of W_p.
struct TransportPlan {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> mass;  // row-major
  double value = 0.0;

  double operator()(std::size_t i, std::size_t k) const { return mass[i * cols + k]; }
};

struct WassersteinResult {
  double distance = 0.0;
  TransportPlan plan;
};

struct TransportOptions {
  // The exact solver is an oracle, not a large-scale engine.
  std::size_t max_atoms = 2000;
};

WassersteinResult wasserstein_exact(const DiscreteDistribution& mu, const DiscreteDistribution& nu, double p,
                                    const TransportOptions& options = {});

struct AssignmentResult {
  double value = 0.0;
  std::vector<std::size_t> assignment;  // index into `selected`
};

/// Nearest selected point for every particle (ties to the lowest index), and
/// the weighted sum of d^p to it.
AssignmentResult assignment_distance(std::span<const Point> particles, std::span<const double> weights,
                                     std::span<const Point> selected, double p);

/// (sum_s lambda_s W_p(Q_s, Qtilde_s)^p)^(1/p).
double integrated_distance(const DiscreteDistribution& lambda, const DiscreteKernel& q,
                           const DiscreteKernel& q_tilde, double p, const TransportOptions& options = {});

}  // namespace kc
