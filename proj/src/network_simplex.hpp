#pragma once

#include <span>
#include <vector>

namespace kc::detail {

struct TransportSolution {
  std::vector<double> flow;  // row-major, supply.size() x demand.size()
  double cost = 0.0;
  std::size_t pivots = 0;
};

// Primal network simplex on the complete bipartite transportation network.
// supply and demand must be strictly positive with (numerically) equal sums;
// cost is row-major and nonnegative.
TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  std::span<const double> cost);

}  // namespace kc::detail
