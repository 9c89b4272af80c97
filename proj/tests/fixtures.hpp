#pragma once

// Random instance builders shared by the unit and acceptance tests.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "kc/core_model.hpp"
#include "kc/markov_pipeline.hpp"
#include "kc/selection_dual.hpp"
#include "kc/selection_instance.hpp"
#include "oracles.hpp"

namespace fixtures {

struct TinySelection {
  kc::SelectionInstance instance;
  oracle::Problem problem;
};

inline kc::Point random_point(std::mt19937_64& gen, std::size_t dim, double scale = 5.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> c(dim);
  for (auto& v : c) v = u(gen);
  return kc::Point(std::move(c));
}

/// <= max_groups groups of <= max_particles particles, K candidates, budget M.
inline TinySelection tiny_selection(std::mt19937_64& gen, std::size_t max_groups, std::size_t max_particles,
                                    std::size_t K, std::size_t M, double p, std::size_t dim = 2) {
  std::uniform_int_distribution<std::size_t> groups_d(1, max_groups);
  std::uniform_int_distribution<std::size_t> parts_d(1, max_particles);
  const std::size_t S = groups_d(gen);
  std::vector<double> lambda(S);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  double total = 0.0;
  for (auto& l : lambda) total += (l = u(gen));
  for (auto& l : lambda) l /= total;

  std::vector<kc::ParticleGroup> groups;
  oracle::Problem problem;
  for (std::size_t s = 0; s < S; ++s) {
    const std::size_t n = parts_d(gen);
    kc::ParticleGroup g;
    g.weight = lambda[s] / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      g.particles.push_back(random_point(gen, dim));
      const auto c = g.particles.back().coords();
      problem.particles.emplace_back(c.begin(), c.end());
      problem.weight.push_back(g.weight);
    }
    groups.push_back(std::move(g));
  }
  // Fix the weight identity exactly on the last group.
  double used = 0.0;
  for (std::size_t s = 0; s + 1 < S; ++s) used += groups[s].weight * static_cast<double>(groups[s].particles.size());
  const double last = (1.0 - used) / static_cast<double>(groups.back().particles.size());
  for (std::size_t n = problem.weight.size() - groups.back().particles.size(); n < problem.weight.size(); ++n) {
    problem.weight[n] = last;
  }
  groups.back().weight = last;

  std::vector<kc::Point> candidates;
  for (std::size_t k = 0; k < K; ++k) {
    candidates.push_back(random_point(gen, dim));
    const auto c = candidates.back().coords();
    problem.candidates.emplace_back(c.begin(), c.end());
  }
  problem.p = p;
  problem.budget = M;
  return {kc::SelectionInstance(std::move(groups), std::move(candidates), p, M), std::move(problem)};
}

inline kc::DualState random_state(std::mt19937_64& gen, const kc::SelectionInstance& instance, double scale = 0.5) {
  std::uniform_real_distribution<double> u(0.0, scale);
  kc::DualState s = kc::DualState::zeros(instance);
  s.theta0 = u(gen) * 0.5;
  std::uniform_real_distribution<double> v(-0.1 * scale, scale);
  for (auto& t : s.theta) t = v(gen);
  return s;
}

inline kc::DiscreteDistribution random_distribution(std::mt19937_64& gen, std::size_t max_atoms, std::size_t dim = 2) {
  std::uniform_int_distribution<std::size_t> n_d(1, max_atoms);
  std::uniform_real_distribution<double> w_d(0.05, 1.0);
  const std::size_t n = n_d(gen);
  std::vector<kc::Point> support;
  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    support.push_back(random_point(gen, dim));
    total += (w[i] = w_d(gen));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) acc += (w[i] /= total);
  w[n - 1] = 1.0 - acc;
  return kc::validate_distribution(std::move(support), std::move(w));
}

/// Random weights on a fixed support (some may be zero when `sparse`).
inline kc::DiscreteDistribution random_weights_on(std::mt19937_64& gen, std::vector<kc::Point> support,
                                                  bool sparse = false) {
  std::uniform_real_distribution<double> w_d(0.0, 1.0);
  std::vector<double> w(support.size());
  double total = 0.0;
  for (auto& v : w) {
    v = w_d(gen);
    if (sparse && v < 0.3) v = 0.0;
  }
  for (double v : w) total += v;
  if (total == 0.0) w[0] = total = 1.0;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) acc += (w[i] /= total);
  w.back() = std::max(0.0, 1.0 - acc);
  return kc::validate_distribution(std::move(support), std::move(w));
}

/// Stage grids X_0 = {x0}, X_1..X_T with `states` points each, and random
/// full-support kernels between consecutive grids.
struct RandomSystem {
  std::vector<std::vector<kc::Point>> grids;
  std::vector<kc::DiscreteKernel> kernels;
};

inline RandomSystem random_system(std::mt19937_64& gen, std::size_t T, std::size_t max_states, std::size_t dim = 2) {
  std::uniform_int_distribution<std::size_t> n_d(1, max_states);
  RandomSystem sys;
  sys.grids.push_back({random_point(gen, dim)});
  for (std::size_t t = 1; t <= T; ++t) {
    std::vector<kc::Point> g;
    const std::size_t n = n_d(gen);
    for (std::size_t i = 0; i < n; ++i) g.push_back(random_point(gen, dim));
    sys.grids.push_back(std::move(g));
  }
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<kc::DiscreteDistribution> rows;
    for (std::size_t i = 0; i < sys.grids[t].size(); ++i) rows.push_back(random_weights_on(gen, sys.grids[t + 1]));
    sys.kernels.emplace_back(sys.grids[t], std::move(rows));
  }
  return sys;
}

}  // namespace fixtures
