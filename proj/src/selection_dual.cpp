#include "kc/selection_dual.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <string>

#include "kc/random.hpp"

namespace kc {
namespace {

constexpr std::size_t kCandidateGrain = 16;

void check_state(const SelectionInstance& instance, const DualState& state) {
  if (state.theta.size() != instance.particle_count()) {
    throw Error(ErrorCode::DimensionMismatch, "theta has " + std::to_string(state.theta.size()) +
                                                  " entries for " + std::to_string(instance.particle_count()) +
                                                  " particles");
  }
}

double theta_sum(const DualState& state) {
  double sum = 0.0;
  for (double t : state.theta) sum += t;
  return sum;
}

std::vector<std::size_t> top_indices(std::span<const double> values, std::size_t count) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  order.resize(std::min(count, order.size()));
  return order;
}

}  // namespace

DualState DualState::zeros(const SelectionInstance& instance) {
  DualState state;
  state.theta.assign(instance.particle_count(), 0.0);
  state.m.assign(instance.particle_count(), 0.0);
  return state;
}

DualState DualState::initial(const SelectionInstance& instance) {
  DualState state = zeros(instance);
  const std::size_t n = instance.particle_count();
  std::vector<double> scratch(n);
  std::fill(state.theta.begin(), state.theta.end(), std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < instance.candidate_count(); ++k) {
    const auto column = instance.weighted_column(k, scratch);
    for (std::size_t i = 0; i < n; ++i) state.theta[i] = std::min(state.theta[i], column[i]);
  }
  if (instance.candidate_count() == 0) std::fill(state.theta.begin(), state.theta.end(), 0.0);

  const std::size_t budget = instance.budget();
  if (budget > 0 && instance.candidate_count() > 0) {
    const auto inner = inner_solution(instance, state);
    std::vector<double> scores = inner.scores;
    std::nth_element(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(budget - 1), scores.end(),
                     std::greater<>());
    state.theta0 = scores[budget - 1] / 2.0;
  }
  return state;
}

InnerSolution inner_solution(const SelectionInstance& instance, const DualState& state,
                             const InnerOptions& options) {
  check_state(instance, state);
  const std::size_t n = instance.particle_count();
  const std::size_t k_count = instance.candidate_count();
  const bool batched = !options.batch.empty();
  const std::size_t evaluated = batched ? options.batch.size() : k_count;

  InnerSolution inner;
  inner.gamma.assign(k_count, 0);
  inner.scores.assign(k_count, 0.0);
  inner.coverage.assign(n, 0);
  if (options.record_beta) inner.beta.assign(k_count, {});
  if (batched) inner.batch.assign(options.batch.begin(), options.batch.end());

  const std::size_t workers = options.pool ? options.pool->size() : 1;
  std::vector<std::vector<std::uint32_t>> coverage(workers);
  std::vector<std::vector<double>> scratch(workers);
  std::vector<double> contribution(evaluated, 0.0);
  const double theta0 = state.theta0;
  const auto& theta = state.theta;

  auto body = [&](std::size_t worker, std::size_t begin, std::size_t end) {
    auto& cov = coverage[worker];
    if (cov.empty()) cov.assign(n, 0);
    auto& buf = scratch[worker];
    if (!instance.stores_costs() && buf.empty()) buf.resize(n);
    for (std::size_t idx = begin; idx < end; ++idx) {
      const std::size_t k = batched ? options.batch[idx] : idx;
      const auto column = instance.weighted_column(k, buf);
      double score = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double excess = theta[i] - column[i];
        if (excess > 0.0) score += excess;
      }
      inner.scores[k] = score;
      if (score > theta0) {
        inner.gamma[k] = 1;
        for (std::size_t i = 0; i < n; ++i) {
          if (column[i] < theta[i]) {
            ++cov[i];
            if (options.record_beta) inner.beta[k].push_back(static_cast<std::uint32_t>(i));
          }
        }
        contribution[idx] = theta0 - score;
      }
    }
  };

  if (options.pool) {
    options.pool->parallel_for(evaluated, kCandidateGrain, body);
  } else {
    body(0, 0, evaluated);
  }

  for (const auto& cov : coverage) {
    if (cov.empty()) continue;
    for (std::size_t i = 0; i < n; ++i) inner.coverage[i] += cov[i];
  }
  for (std::size_t idx = 0; idx < evaluated; ++idx) {
    inner.selected += inner.gamma[batched ? options.batch[idx] : idx];
  }
  // Ordered reduction: the sum is independent of the number of workers.
  double pieces = 0.0;
  for (double c : contribution) pieces += c;
  if (batched) pieces *= static_cast<double>(k_count) / static_cast<double>(evaluated);
  inner.value = pieces + theta_sum(state) - static_cast<double>(instance.budget()) * theta0;
  return inner;
}

double dual_value(const SelectionInstance& instance, const DualState& state, ThreadPool* pool) {
  if (state.theta0 < 0.0) throw Error(ErrorCode::InvalidArgument, "theta0 must be nonnegative");
  InnerOptions options;
  options.pool = pool;
  return inner_solution(instance, state, options).value;
}

Subgradient subgradient(const SelectionInstance& instance, const InnerSolution& inner) {
  const double scale = inner.batch.empty() ? 1.0
                                           : static_cast<double>(instance.candidate_count()) /
                                                 static_cast<double>(inner.batch.size());
  Subgradient g;
  g.g0 = scale * static_cast<double>(inner.selected) - static_cast<double>(instance.budget());
  g.g.resize(inner.coverage.size());
  for (std::size_t i = 0; i < inner.coverage.size(); ++i) {
    g.g[i] = 1.0 - scale * static_cast<double>(inner.coverage[i]);
  }
  return g;
}

void SolverConfig::validate(std::size_t candidate_count) const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!(alpha0 > 0.0)) fail("alpha0 must be positive");
  if (!(epsilon > 0.0)) fail("epsilon must be positive");
  if (!(kappa1 >= 0.0 && kappa1 < 1.0)) fail("kappa1 must lie in [0,1)");
  if (!(kappa2 >= 0.0 && kappa2 < 1.0)) fail("kappa2 must lie in [0,1)");
  if (!(band > 0.0 && band < 1.0)) fail("band must lie in (0,1)");
  if (max_iter == 0) fail("max_iter must be positive");
  if (recovery_window == 0) fail("recovery window must be positive");
  if (batch && (*batch == 0 || *batch > candidate_count)) fail("batch size must lie in [1, K]");
}

RecoveredSelection primal_recovery(std::span<const RecoveryEntry> window, std::size_t budget, RecoveryMode mode,
                                   std::uint64_t seed) {
  if (window.empty()) throw Error(ErrorCode::EmptyHistory, "no iterates to recover from");
  const std::size_t k_count = window.front().gamma.size();
  double alpha_total = 0.0;
  for (const auto& entry : window) {
    if (entry.gamma.size() != k_count) throw Error(ErrorCode::DimensionMismatch, "iterates of different length");
    alpha_total += entry.alpha;
  }
  RecoveredSelection out;
  out.gamma_bar.assign(k_count, 0.0);
  for (std::size_t k = 0; k < k_count; ++k) {
    double acc = 0.0;
    for (const auto& entry : window) acc += entry.gamma[k] ? entry.alpha : 0.0;
    out.gamma_bar[k] = acc / alpha_total;
  }
  out.gamma.assign(k_count, 0);
  if (mode == RecoveryMode::TopM) {
    for (std::size_t k : top_indices(out.gamma_bar, budget)) out.gamma[k] = 1;
  } else {
    Rng rng(seed);
    for (std::size_t k = 0; k < k_count; ++k) out.gamma[k] = rng.uniform() < out.gamma_bar[k] ? 1 : 0;
  }
  return out;
}

BitVector repair_feasibility(const SelectionInstance& instance, BitVector gamma, std::size_t budget,
                             const DualState& state) {
  std::size_t selected = count_selected(gamma);
  if (selected <= budget) return gamma;
  const auto inner = inner_solution(instance, state);
  std::vector<double> braces;
  std::vector<std::size_t> chosen;
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    if (gamma[k]) {
      chosen.push_back(k);
      braces.push_back(state.theta0 - inner.scores[k]);
    }
  }
  for (std::size_t idx : top_indices(braces, selected - budget)) gamma[chosen[idx]] = 0;
  return gamma;
}

SelectionResult run_subgradient(const SelectionInstance& instance, const SolverConfig& config) {
  const std::size_t n = instance.particle_count();
  const std::size_t k_count = instance.candidate_count();
  const std::size_t budget = instance.budget();
  if (n == 0 || k_count == 0) throw Error(ErrorCode::EmptyInstance, "no particles or no candidates");
  if (budget == 0) throw Error(ErrorCode::InfeasibleBudget, "budget 0 with particles to cover");
  config.validate(k_count);

  ThreadPool pool(config.threads);
  Rng batch_rng(config.seed, 1);
  const auto start = std::chrono::steady_clock::now();

  DualState state = DualState::initial(instance);
  SelectionResult result;
  result.status = SolverStatus::MaxIterExceeded;

  struct WindowEntry {
    RecoveryEntry entry;
    double dual;
  };
  std::deque<WindowEntry> window;
  double best_dual = -std::numeric_limits<double>::infinity();
  DualState best_state = state;
  double previous_dual = 0.0;
  const double lower = (1.0 - config.band) * static_cast<double>(budget);
  const double upper = (1.0 + config.band) * static_cast<double>(budget);
  const double batch_scale = config.batch ? static_cast<double>(k_count) / static_cast<double>(*config.batch) : 1.0;

  for (std::size_t j = 0; j < config.max_iter; ++j) {
    std::vector<std::size_t> batch;
    if (config.batch) {
      batch = batch_rng.sample_without_replacement(k_count, *config.batch);
      std::sort(batch.begin(), batch.end());
    }
    InnerOptions options;
    options.batch = batch;
    options.pool = &pool;
    InnerSolution inner = inner_solution(instance, state, options);
    const double dual = inner.value;
    const double selected = batch_scale * static_cast<double>(inner.selected);

    if (dual > best_dual) {
      best_dual = dual;
      if (config.batch) best_state = state;
    }
    const double alpha_here = config.alpha0 / std::sqrt(static_cast<double>(std::max<std::size_t>(j, 1)));
    if (dual >= best_dual - config.recovery_tolerance * std::abs(best_dual)) {
      window.push_back({{inner.gamma, alpha_here}, dual});
      if (window.size() > config.recovery_window) window.pop_front();
    }

    const double alpha_next = config.alpha0 / std::sqrt(static_cast<double>(j + 1));
    const double elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back({j, dual, inner.selected, alpha_next, state.theta0, elapsed});
    result.iterations = j + 1;

    const bool in_band = selected >= lower && selected <= upper;
    if (j > 0 && in_band && std::abs(dual - previous_dual) <= config.epsilon) {
      result.status = SolverStatus::Converged;
      break;
    }

    const Subgradient g = subgradient(instance, inner);
    state.m0 = (1.0 - config.kappa1) * g.g0 + config.kappa1 * state.m0;
    state.theta0 = std::max(0.0, state.theta0 + alpha_next * state.m0);
    for (std::size_t i = 0; i < n; ++i) {
      state.m[i] = (1.0 - config.kappa2) * g.g[i] + config.kappa2 * state.m[i];
      state.theta[i] += alpha_next * state.m[i];
    }
    state.iteration = j + 1;
    previous_dual = dual;
  }

  if (config.batch) {
    // Batch values are estimates; the reported bound must be an exact dual value.
    best_dual = std::max(dual_value(instance, best_state, &pool), dual_value(instance, state, &pool));
  }

  std::vector<RecoveryEntry> near_optimal;
  for (const auto& w : window) {
    if (w.dual >= best_dual - config.recovery_tolerance * std::abs(best_dual)) near_optimal.push_back(w.entry);
  }
  if (near_optimal.empty()) {
    for (const auto& w : window) near_optimal.push_back(w.entry);
  }
  const auto mode = config.recovery_sampling ? RecoveryMode::Sample : RecoveryMode::TopM;
  auto recovered = primal_recovery(near_optimal, budget, mode, mix_seed(config.seed, 2));
  BitVector gamma = repair_feasibility(instance, std::move(recovered.gamma), budget, state);
  if (count_selected(gamma) == 0) {
    gamma = primal_recovery(near_optimal, budget, RecoveryMode::TopM).gamma;
  }

  auto objective = selection_objective(instance, gamma);
  result.gamma = std::move(gamma);
  result.assignment = std::move(objective.assignment);
  result.objective = objective.value;
  result.best_dual = best_dual;
  result.gap = duality_gap(result.objective, best_dual);
  result.final_state = std::move(state);
  return result;
}

void write_history_csv(std::ostream& out, std::span<const IterationRecord> history) {
  out << "j,dual,selected,alpha,theta0,elapsed_ms\n";
  char line[256];
  for (const auto& r : history) {
    std::snprintf(line, sizeof line, "%zu,%.17g,%zu,%.17g,%.17g,%.3f\n", r.iteration, r.dual, r.selected, r.alpha,
                  r.theta0, r.elapsed_ms);
    out << line;
  }
}

nlohmann::json result_to_json(const SelectionInstance& instance, const SelectionResult& result) {
  std::vector<std::vector<std::size_t>> assignment(instance.group_count());
  for (std::size_t s = 0; s < instance.group_count(); ++s) {
    const std::size_t offset = instance.group_offset(s);
    assignment[s].assign(result.assignment.begin() + static_cast<std::ptrdiff_t>(offset),
                         result.assignment.begin() + static_cast<std::ptrdiff_t>(offset + instance.group_size(s)));
  }
  nlohmann::json j;
  j["K"] = instance.candidate_count();
  j["M"] = instance.budget();
  j["p"] = instance.order();
  j["gamma"] = result.gamma;
  j["assignment"] = assignment;
  j["objective"] = result.objective;
  j["distance"] = instance.order() == 1.0 ? result.objective : std::pow(result.objective, 1.0 / instance.order());
  j["best_dual"] = result.best_dual;
  j["gap"] = result.gap;
  j["iterations"] = result.iterations;
  j["status"] = result.status == SolverStatus::Converged ? "converged" : "max_iter_exceeded";

  if (instance.has_points()) {
    // Implied next-stage distribution on the selected candidates.
    std::vector<Point> support;
    std::vector<double> mass(instance.candidate_count(), 0.0);
    for (std::size_t i = 0; i < result.assignment.size(); ++i) {
      mass[result.assignment[i]] += instance.particle_weight(i);
    }
    std::vector<double> weights;
    for (std::size_t k = 0; k < result.gamma.size(); ++k) {
      if (result.gamma[k]) {
        support.push_back(instance.candidates()[k]);
        weights.push_back(mass[k]);
      }
    }
    j["selected"] = validate_distribution(std::move(support), std::move(weights));
  }
  return j;
}

}  // namespace kc
