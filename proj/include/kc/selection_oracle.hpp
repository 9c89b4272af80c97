#pragma once

// Exhaustive solver for the particle-selection problem on tiny instances.
// For a fixed set of selected candidates the optimal transport variables are
// the nearest-point assignment, so only candidate subsets are enumerated.

#include "kc/selection_instance.hpp"

namespace kc {

struct ExactSelection {
  BitVector gamma;
  double objective = 0.0;
  std::vector<std::size_t> assignment;  // per flat particle
};

inline constexpr std::size_t kOracleMaxCandidates = 20;
inline constexpr std::size_t kOracleMaxBudget = 6;

/// Minimizes over every subset S with |S| <= M. Among optimal subsets the one
/// whose sorted index list is lexicographically smallest wins.
ExactSelection solve_exact(const SelectionInstance& instance);

}  // namespace kc
