#pragma once

// Data of the particle-selection problem: groups of particles x^{s,i} with
// per-group weights w_s, candidate points zeta^k, order p and budget M.
// Costs enter every algorithm only through the weighted values w_s * d_sik.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "kc/core_model.hpp"

namespace kc {

using BitVector = std::vector<std::uint8_t>;

struct ParticleGroup {
  double weight = 0.0;  // w_s = lambda_s / |I_s|
  std::vector<Point> particles;
};

class SelectionInstance {
 public:
  // Above this many (particle, candidate) entries the weighted costs are
  // recomputed from the points on every access instead of being stored.
  static constexpr std::size_t kDefaultStorageLimit = 100'000'000;

  SelectionInstance(std::vector<ParticleGroup> groups, std::vector<Point> candidates, double p,
                    std::size_t budget, std::size_t storage_limit = kDefaultStorageLimit);

  /// Instance given directly by per-group cost tables d_sik (|I_s| x K each);
  /// such an instance carries no points.
  static SelectionInstance from_costs(std::vector<double> group_weights, const std::vector<CostMatrix>& costs,
                                      std::size_t budget);

  std::size_t group_count() const noexcept { return group_weights_.size(); }
  std::size_t particle_count() const noexcept { return particle_group_.size(); }
  std::size_t candidate_count() const noexcept { return candidate_count_; }
  std::size_t budget() const noexcept { return budget_; }
  double order() const noexcept { return order_; }
  bool has_points() const noexcept { return !groups_.empty(); }
  bool stores_costs() const noexcept { return !weighted_.empty() || particle_count() == 0; }

  const std::vector<ParticleGroup>& groups() const noexcept { return groups_; }
  const std::vector<Point>& candidates() const noexcept { return candidates_; }
  double group_weight(std::size_t s) const { return group_weights_[s]; }
  std::size_t group_size(std::size_t s) const { return group_offset_[s + 1] - group_offset_[s]; }
  std::size_t group_offset(std::size_t s) const { return group_offset_[s]; }
  std::size_t group_of(std::size_t n) const { return particle_group_[n]; }
  double particle_weight(std::size_t n) const { return group_weights_[particle_group_[n]]; }
  const Point& particle(std::size_t n) const {
    const std::size_t s = particle_group_[n];
    return groups_[s].particles[n - group_offset_[s]];
  }

  /// w_s * d_sik for the flat particle index n.
  double weighted_cost(std::size_t n, std::size_t k) const;

  /// Column k of the weighted cost table. `scratch` (size N) is used when the
  /// costs are not stored; the returned span aliases either it or the table.
  std::span<const double> weighted_column(std::size_t k, std::span<double> scratch) const;

  /// Copy with a different budget.
  SelectionInstance with_budget(std::size_t budget) const;

 private:
  SelectionInstance() = default;
  void index_groups(std::span<const std::size_t> sizes);

  std::vector<ParticleGroup> groups_;
  std::vector<Point> candidates_;
  std::vector<double> group_weights_;
  std::vector<std::size_t> group_offset_;
  std::vector<std::size_t> particle_group_;
  std::vector<double> weighted_;  // candidate-major: weighted_[k * N + n]
  std::size_t candidate_count_ = 0;
  std::size_t budget_ = 0;
  double order_ = 1.0;
};

struct SelectionObjective {
  double value = 0.0;
  std::vector<std::size_t> assignment;  // per flat particle: candidate index
};

/// sum_n w_n min_{k : gamma_k = 1} d_nk with nearest-point assignment (ties to
/// the lowest candidate index). Throws EmptySelection if gamma selects nothing
/// while particles exist.
SelectionObjective selection_objective(const SelectionInstance& instance, const BitVector& gamma);

std::size_t count_selected(const BitVector& gamma);

}  // namespace kc
