#include "kc/transport.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "network_simplex.hpp"

namespace kc {
namespace {

double root_p(double value, double p) {
  if (value <= 0.0) return 0.0;
  if (p == 1.0) return value;
  if (p == 2.0) return std::sqrt(value);
  return std::pow(value, 1.0 / p);
}

WassersteinResult solve_oriented(const DiscreteDistribution& mu, const DiscreteDistribution& nu, double p,
                                 const TransportOptions& options) {
  if (mu.empty() || nu.empty()) throw Error(ErrorCode::LengthMismatch, "empty distribution");
  if (mu.size() > options.max_atoms || nu.size() > options.max_atoms) {
    throw Error(ErrorCode::SizeCapExceeded, std::to_string(mu.size()) + " x " + std::to_string(nu.size()) +
                                                " exceeds the cap of " + std::to_string(options.max_atoms));
  }
  if (mu.support()[0].dim() != nu.support()[0].dim()) {
    throw Error(ErrorCode::DimensionMismatch, "distributions live in different dimensions");
  }

  // Zero-weight atoms are dropped before solving.
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  std::vector<double> supply;
  std::vector<double> demand;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.weights()[i] > 0.0) {
      rows.push_back(i);
      supply.push_back(mu.weights()[i]);
    }
  }
  for (std::size_t k = 0; k < nu.size(); ++k) {
    if (nu.weights()[k] > 0.0) {
      cols.push_back(k);
      demand.push_back(nu.weights()[k]);
    }
  }

  std::vector<double> cost(rows.size() * cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      cost[r * cols.size() + c] = distance_power(mu.support()[rows[r]], nu.support()[cols[c]], p);
    }
  }

  const auto solved = detail::solve_transport(supply, demand, cost);

  WassersteinResult result;
  result.plan.rows = mu.size();
  result.plan.cols = nu.size();
  result.plan.mass.assign(mu.size() * nu.size(), 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      result.plan.mass[rows[r] * nu.size() + cols[c]] = solved.flow[r * cols.size() + c];
    }
  }
  result.plan.value = solved.cost;
  result.distance = root_p(solved.cost, p);
  return result;
}

bool precedes(const DiscreteDistribution& a, const DiscreteDistribution& b) {
  if (a.support() != b.support()) return a.support() < b.support();
  return a.weights() < b.weights();
}

}  // namespace

WassersteinResult wasserstein_exact(const DiscreteDistribution& mu, const DiscreteDistribution& nu, double p,
                                    const TransportOptions& options) {
  check_order(p);
  // Always pivot on the same orientation of the pair so that swapping the
  // arguments gives bitwise the same distance.
  if (!precedes(nu, mu)) return solve_oriented(mu, nu, p, options);
  WassersteinResult swapped = solve_oriented(nu, mu, p, options);
  WassersteinResult result;
  result.distance = swapped.distance;
  result.plan.rows = mu.size();
  result.plan.cols = nu.size();
  result.plan.value = swapped.plan.value;
  result.plan.mass.resize(mu.size() * nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t k = 0; k < nu.size(); ++k) result.plan.mass[i * nu.size() + k] = swapped.plan(k, i);
  }
  return result;
}

AssignmentResult assignment_distance(std::span<const Point> particles, std::span<const double> weights,
                                     std::span<const Point> selected, double p) {
  check_order(p);
  if (selected.empty()) throw Error(ErrorCode::EmptySelection, "no selected points");
  if (particles.size() != weights.size()) {
    throw Error(ErrorCode::LengthMismatch, "particles and weights differ in length");
  }
  AssignmentResult result;
  result.assignment.resize(particles.size());
  for (std::size_t i = 0; i < particles.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < selected.size(); ++k) {
      const double d = distance_power(particles[i], selected[k], p);
      if (d < best) {
        best = d;
        best_k = k;
      }
    }
    result.assignment[i] = best_k;
    result.value += weights[i] * best;
  }
  return result;
}

double integrated_distance(const DiscreteDistribution& lambda, const DiscreteKernel& q,
                           const DiscreteKernel& q_tilde, double p, const TransportOptions& options) {
  if (lambda.support() != q.sources() || lambda.support() != q_tilde.sources()) {
    throw Error(ErrorCode::SourceMismatch, "marginal support and kernel sources differ");
  }
  double total = 0.0;
  for (std::size_t s = 0; s < lambda.size(); ++s) {
    if (lambda.weights()[s] == 0.0) continue;
    total += lambda.weights()[s] * wasserstein_exact(q.row(s), q_tilde.row(s), p, options).plan.value;
  }
  return root_p(total, p);
}

}  // namespace kc
