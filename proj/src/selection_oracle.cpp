#include "kc/selection_oracle.hpp"

#include <limits>
#include <string>

namespace kc {
namespace {

struct Search {
  const SelectionInstance& instance;
  std::size_t n;
  std::size_t k_count;
  std::size_t budget;
  std::vector<double> column_cache;  // k * n + i
  std::vector<std::size_t> chosen;
  std::vector<std::size_t> best_set;
  double best = std::numeric_limits<double>::infinity();

  // Depth-first in lexicographic order of index lists; strict improvement keeps
  // the first optimum met, which is the lexicographically smallest.
  void visit(std::size_t start, const std::vector<double>& nearest) {
    for (std::size_t k = start; k < k_count; ++k) {
      std::vector<double> next(nearest);
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double c = column_cache[k * n + i];
        if (c < next[i]) next[i] = c;
        total += next[i];
      }
      chosen.push_back(k);
      if (total < best) {
        best = total;
        best_set = chosen;
      }
      if (chosen.size() < budget) visit(k + 1, next);
      chosen.pop_back();
    }
  }
};

}  // namespace

ExactSelection solve_exact(const SelectionInstance& instance) {
  const std::size_t k_count = instance.candidate_count();
  const std::size_t n = instance.particle_count();
  const std::size_t budget = instance.budget();
  if (k_count > kOracleMaxCandidates || budget > kOracleMaxBudget) {
    throw Error(ErrorCode::EnumerationGuard, "K=" + std::to_string(k_count) + ", M=" + std::to_string(budget) +
                                                 " is too large for exhaustive search");
  }
  ExactSelection result;
  result.gamma.assign(k_count, 0);
  if (n == 0) return result;
  if (budget == 0) throw Error(ErrorCode::InfeasibleBudget, "budget 0 with particles to cover");

  Search search{instance, n, k_count, budget, {}, {}, {}};
  search.column_cache.resize(n * k_count);
  std::vector<double> scratch(n);
  for (std::size_t k = 0; k < k_count; ++k) {
    const auto column = instance.weighted_column(k, scratch);
    std::copy(column.begin(), column.end(), search.column_cache.begin() + static_cast<std::ptrdiff_t>(k * n));
  }
  search.visit(0, std::vector<double>(n, std::numeric_limits<double>::infinity()));

  for (std::size_t k : search.best_set) result.gamma[k] = 1;
  auto objective = selection_objective(instance, result.gamma);
  result.objective = objective.value;
  result.assignment = std::move(objective.assignment);
  return result;
}

}  // namespace kc
