#include "kc/selection_instance.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace kc {

void SelectionInstance::index_groups(std::span<const std::size_t> sizes) {
  group_offset_.assign(1, 0);
  particle_group_.clear();
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    group_offset_.push_back(group_offset_.back() + sizes[s]);
    particle_group_.insert(particle_group_.end(), sizes[s], s);
  }
  double total = 0.0;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    if (!(group_weights_[s] > 0.0) || !std::isfinite(group_weights_[s])) {
      throw Error(ErrorCode::NegativeWeight, "group weight must be positive");
    }
    total += group_weights_[s] * static_cast<double>(sizes[s]);
  }
  if (!particle_group_.empty() && std::abs(total - 1.0) > kWeightTolerance) {
    throw Error(ErrorCode::WeightsNotNormalized, "sum_s w_s |I_s| = " + std::to_string(total));
  }
  if (budget_ > candidate_count_) {
    throw Error(ErrorCode::InfeasibleBudget, "budget " + std::to_string(budget_) + " exceeds " +
                                                 std::to_string(candidate_count_) + " candidates");
  }
}

SelectionInstance::SelectionInstance(std::vector<ParticleGroup> groups, std::vector<Point> candidates, double p,
                                     std::size_t budget, std::size_t storage_limit)
    : groups_(std::move(groups)), candidates_(std::move(candidates)), candidate_count_(candidates_.size()),
      budget_(budget), order_(p) {
  check_order(p);
  std::vector<std::size_t> sizes;
  for (const auto& g : groups_) {
    group_weights_.push_back(g.weight);
    sizes.push_back(g.particles.size());
  }
  index_groups(sizes);

  const std::size_t dim = candidates_.empty() ? 0 : candidates_[0].dim();
  for (const auto& c : candidates_) {
    if (c.dim() != dim) throw Error(ErrorCode::DimensionMismatch, "candidates of mixed dimension");
  }
  for (const auto& g : groups_) {
    for (const auto& x : g.particles) {
      if (!candidates_.empty() && x.dim() != dim) {
        throw Error(ErrorCode::DimensionMismatch, "particle and candidate dimensions differ");
      }
    }
  }

  const std::size_t n = particle_count();
  if (n * candidate_count_ <= storage_limit) {
    weighted_.resize(n * candidate_count_);
    for (std::size_t k = 0; k < candidate_count_; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        weighted_[k * n + i] = particle_weight(i) * distance_power(particle(i), candidates_[k], p);
      }
    }
  }
}

SelectionInstance SelectionInstance::from_costs(std::vector<double> group_weights,
                                                const std::vector<CostMatrix>& costs, std::size_t budget) {
  if (group_weights.size() != costs.size()) {
    throw Error(ErrorCode::LengthMismatch, "one cost table per group required");
  }
  SelectionInstance inst;
  inst.group_weights_ = std::move(group_weights);
  inst.candidate_count_ = costs.empty() ? 0 : costs[0].cols();
  inst.budget_ = budget;
  inst.order_ = costs.empty() ? 1.0 : costs[0].order();
  std::vector<std::size_t> sizes;
  for (const auto& c : costs) {
    if (c.cols() != inst.candidate_count_) {
      throw Error(ErrorCode::DimensionMismatch, "cost tables with different candidate counts");
    }
    sizes.push_back(c.rows());
  }
  inst.index_groups(sizes);
  const std::size_t n = inst.particle_count();
  inst.weighted_.resize(n * inst.candidate_count_);
  for (std::size_t s = 0; s < costs.size(); ++s) {
    for (std::size_t i = 0; i < costs[s].rows(); ++i) {
      for (std::size_t k = 0; k < inst.candidate_count_; ++k) {
        const double d = costs[s](i, k);
        if (!(d >= 0.0) || !std::isfinite(d)) throw Error(ErrorCode::NonFinite, "invalid cost entry");
        inst.weighted_[k * n + inst.group_offset_[s] + i] = inst.group_weights_[s] * d;
      }
    }
  }
  return inst;
}

double SelectionInstance::weighted_cost(std::size_t n, std::size_t k) const {
  if (!weighted_.empty()) return weighted_[k * particle_count() + n];
  return particle_weight(n) * distance_power(particle(n), candidates_[k], order_);
}

std::span<const double> SelectionInstance::weighted_column(std::size_t k, std::span<double> scratch) const {
  const std::size_t n = particle_count();
  if (!weighted_.empty()) return std::span<const double>(weighted_).subspan(k * n, n);
  for (std::size_t i = 0; i < n; ++i) {
    scratch[i] = particle_weight(i) * distance_power(particle(i), candidates_[k], order_);
  }
  return scratch.first(n);
}

SelectionInstance SelectionInstance::with_budget(std::size_t budget) const {
  if (budget > candidate_count_) {
    throw Error(ErrorCode::InfeasibleBudget, "budget exceeds candidate count");
  }
  SelectionInstance copy = *this;
  copy.budget_ = budget;
  return copy;
}

std::size_t count_selected(const BitVector& gamma) {
  std::size_t count = 0;
  for (auto bit : gamma) count += bit ? 1 : 0;
  return count;
}

SelectionObjective selection_objective(const SelectionInstance& instance, const BitVector& gamma) {
  const std::size_t n = instance.particle_count();
  const std::size_t k_count = instance.candidate_count();
  if (gamma.size() != k_count) throw Error(ErrorCode::DimensionMismatch, "gamma length differs from K");
  SelectionObjective out;
  out.assignment.assign(n, 0);
  if (n == 0) return out;
  if (count_selected(gamma) == 0) throw Error(ErrorCode::EmptySelection, "no candidate selected");

  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<double> scratch(n);
  for (std::size_t k = 0; k < k_count; ++k) {
    if (!gamma[k]) continue;
    const auto column = instance.weighted_column(k, scratch);
    for (std::size_t i = 0; i < n; ++i) {
      if (column[i] < best[i]) {
        best[i] = column[i];
        out.assignment[i] = k;
      }
    }
  }
  for (double b : best) out.value += b;
  return out;
}

}  // namespace kc
