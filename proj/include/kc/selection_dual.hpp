#pragma once

// Lagrangian dual of the particle-selection problem and the dual subgradient
// method with momentum that solves it.
//
// Multipliers: theta_n for the coverage constraints sum_k beta_nk = 1 (one per
// particle, flat index n = (s,i)) and theta_0 >= 0 for the budget
// sum_k gamma_k <= M. For fixed multipliers the Lagrangian separates over
// candidates k and each piece is minimized in closed form:
//
//   score_k  = sum_n max(0, theta_n - w_n d_nk)
//   gamma_k  = 1  iff  score_k > theta_0
//   beta_nk  = 1  iff  gamma_k = 1 and w_n d_nk < theta_n
//   L_D      = sum_k min(0, theta_0 - score_k) + sum_n theta_n - M theta_0

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <json.hpp>

#include "kc/parallel.hpp"
#include "kc/selection_instance.hpp"

namespace kc {

struct DualState {
  double theta0 = 0.0;
  std::vector<double> theta;  // per flat particle
  double m0 = 0.0;
  std::vector<double> m;
  std::size_t iteration = 0;

  static DualState zeros(const SelectionInstance& instance);

  /// theta_n = w_n min_k d_nk, theta_0 = (M-th largest score at that theta) / 2,
  /// momenta zero.
  static DualState initial(const SelectionInstance& instance);
};

struct InnerSolution {
  BitVector gamma;                       // over all K (zeros outside a batch)
  std::vector<double> scores;            // score_k (zero outside a batch)
  std::vector<std::uint32_t> coverage;   // sum_k beta_nk per particle
  std::vector<std::vector<std::uint32_t>> beta;  // per k: particles with beta_nk = 1 (only if requested)
  std::vector<std::size_t> batch;        // evaluated candidates; empty means all
  std::size_t selected = 0;              // sum_k gamma_k over the evaluated candidates
  double value = 0.0;                    // L_D (or its batch estimate)
};

struct InnerOptions {
  bool record_beta = false;
  std::span<const std::size_t> batch;  // empty: all candidates
  ThreadPool* pool = nullptr;
};

InnerSolution inner_solution(const SelectionInstance& instance, const DualState& state,
                             const InnerOptions& options = {});

/// Exact L_D(theta).
double dual_value(const SelectionInstance& instance, const DualState& state, ThreadPool* pool = nullptr);

struct Subgradient {
  double g0 = 0.0;
  std::vector<double> g;
};

/// Exact supergradient (g0 = sum gamma - M, g_n = 1 - sum_k beta_nk) or, for a
/// batch solution, its unbiased estimate with the K/B scaling.
Subgradient subgradient(const SelectionInstance& instance, const InnerSolution& inner);

struct SolverConfig {
  double alpha0 = 0.01;
  double epsilon = 1e-7;
  double kappa1 = 0.35;
  double kappa2 = 0.35;
  double band = 0.05;
  std::size_t max_iter = 5000;
  std::optional<std::size_t> batch;
  std::size_t recovery_window = 50;
  double recovery_tolerance = 0.01;  // relative distance to the best dual value
  bool recovery_sampling = false;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate(std::size_t candidate_count) const;
};

struct IterationRecord {
  std::size_t iteration = 0;
  double dual = 0.0;
  std::size_t selected = 0;
  double alpha = 0.0;
  double theta0 = 0.0;
  double elapsed_ms = 0.0;
};

enum class SolverStatus { Converged, MaxIterExceeded };

struct SelectionResult {
  BitVector gamma;
  std::vector<std::size_t> assignment;  // per flat particle, always a selected candidate
  double objective = 0.0;
  double best_dual = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
  SolverStatus status = SolverStatus::Converged;
  std::vector<IterationRecord> history;
  DualState final_state;
};

SelectionResult run_subgradient(const SelectionInstance& instance, const SolverConfig& config);

struct RecoveryEntry {
  BitVector gamma;
  double alpha = 0.0;
};

struct RecoveredSelection {
  std::vector<double> gamma_bar;
  BitVector gamma;
};

enum class RecoveryMode { TopM, Sample };

/// gamma_bar = sum_j omega_j gamma^(j) with omega_j proportional to alpha^(j).
/// TopM keeps the M largest entries (ties to the lowest index); Sample keeps
/// candidate k with probability gamma_bar_k.
RecoveredSelection primal_recovery(std::span<const RecoveryEntry> window, std::size_t budget,
                                   RecoveryMode mode = RecoveryMode::TopM, std::uint64_t seed = 0);

/// While more than M candidates are selected, drops the one whose closed-form
/// term theta_0 - score_k is largest.
BitVector repair_feasibility(const SelectionInstance& instance, BitVector gamma, std::size_t budget,
                             const DualState& state);

inline double duality_gap(double objective, double best_dual) { return objective - best_dual; }

/// One CSV row per iteration: j,dual,selected,alpha,theta0,elapsed_ms.
void write_history_csv(std::ostream& out, std::span<const IterationRecord> history);

/// gamma, per-particle assignment, objective, best dual, gap, iterations and
/// status. Timing is left out so the document is reproducible.
nlohmann::json result_to_json(const SelectionInstance& instance, const SelectionResult& result);

}  // namespace kc
