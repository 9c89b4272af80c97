#include "kc/risk_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>

namespace kc {

RiskMapping expectation_mapping() {
  return RiskMapping("expectation", [](const Point&, const DiscreteDistribution& mu, std::span<const double> v) {
    double sum = 0.0;
    for (std::size_t a = 0; a < mu.size(); ++a) sum += mu.weights()[a] * v[a];
    return sum;
  });
}

RiskMapping semideviation_mapping(double kappa) {
  if (!(kappa >= 0.0 && kappa <= 1.0)) {
    throw Error(ErrorCode::InvalidKappa, "kappa must lie in [0,1], got " + std::to_string(kappa));
  }
  return RiskMapping("semideviation", [kappa](const Point&, const DiscreteDistribution& mu, std::span<const double> v) {
    double mean = 0.0;
    for (std::size_t a = 0; a < mu.size(); ++a) mean += mu.weights()[a] * v[a];
    double upper = 0.0;
    for (std::size_t a = 0; a < mu.size(); ++a) upper += mu.weights()[a] * std::max(0.0, v[a] - mean);
    return mean + kappa * upper;
  });
}

double ValueTable::at(std::size_t t, const Point& x) const {
  if (t >= points.size()) throw Error(ErrorCode::IndexRange, "stage " + std::to_string(t));
  const auto& pts = points[t];
  for (std::size_t a = 0; a < pts.size(); ++a) {
    if (pts[a] == x) return values[t][a];
  }
  throw Error(ErrorCode::MissingValue, "point not in the stage " + std::to_string(t) + " support");
}

ValueTable evaluate_backward(const ApproximateSystem& system, std::span<const CostFunction> costs,
                             const RiskMapping& sigma) {
  const std::size_t horizon = system.horizon();
  if (system.supports.size() != horizon + 1) {
    throw Error(ErrorCode::LengthMismatch, "system needs T+1 supports for T kernels");
  }
  if (costs.size() != 1 && costs.size() != horizon + 1) {
    throw Error(ErrorCode::LengthMismatch, "need one cost function or one per stage");
  }
  auto cost_at = [&](std::size_t t) -> const CostFunction& { return costs.size() == 1 ? costs[0] : costs[t]; };

  ValueTable table;
  table.points = system.supports;
  table.values.resize(horizon + 1);
  for (const auto& x : system.supports[horizon]) table.values[horizon].push_back(cost_at(horizon)(x));

  for (std::size_t t = horizon; t-- > 0;) {
    const auto& kernel = system.kernels[t];
    if (kernel.sources() != system.supports[t]) {
      throw Error(ErrorCode::SourceMismatch, "kernel sources differ from the stage support at t=" + std::to_string(t));
    }
    std::map<Point, double> next;
    for (std::size_t a = 0; a < system.supports[t + 1].size(); ++a) {
      next.try_emplace(system.supports[t + 1][a], table.values[t + 1][a]);
    }
    auto& values = table.values[t];
    values.resize(kernel.size());
    std::vector<double> row_values;
    for (std::size_t s = 0; s < kernel.size(); ++s) {
      const auto& row = kernel.row(s);
      row_values.resize(row.size());
      for (std::size_t a = 0; a < row.size(); ++a) {
        auto it = next.find(row.support()[a]);
        if (it == next.end()) {
          throw Error(ErrorCode::MissingValue, "kernel row at t=" + std::to_string(t) +
                                                   " reaches a point outside the next support");
        }
        row_values[a] = it->second;
      }
      values[s] = cost_at(t)(kernel.sources()[s]) + sigma(kernel.sources()[s], row, row_values);
    }
  }
  return table;
}

double error_bound(std::span<const double> lipschitz, std::span<const double> contraction,
                   std::span<const double> delta, std::size_t t) {
  const std::size_t horizon = delta.size();
  if (t >= horizon || lipschitz.size() < horizon || (horizon > 1 && contraction.size() < horizon - 1)) {
    throw Error(ErrorCode::IndexRange, "constants do not cover stages " + std::to_string(t) + ".." +
                                           std::to_string(horizon - 1));
  }
  for (std::size_t i = t; i < horizon; ++i) {
    if (lipschitz[i] < 0.0 || delta[i] < 0.0 || (i + 1 < horizon && contraction[i] < 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "constants must be nonnegative");
    }
  }
  double bound = 0.0;
  double product = 1.0;
  for (std::size_t tau = t; tau < horizon; ++tau) {
    bound += lipschitz[tau] * product * delta[tau];
    if (tau + 1 < horizon) product *= contraction[tau];
  }
  return bound;
}

double discrete_lipschitz(std::span<const Point> support, std::span<const double> values) {
  double best = 0.0;
  for (std::size_t a = 0; a < support.size(); ++a) {
    for (std::size_t b = a + 1; b < support.size(); ++b) {
      const double d = euclidean_distance(support[a], support[b]);
      if (d > 0.0) best = std::max(best, std::abs(values[a] - values[b]) / d);
    }
  }
  return best;
}

void write_value_table_csv(std::ostream& out, const ValueTable& table) {
  std::size_t dim = 0;
  for (const auto& pts : table.points) {
    if (!pts.empty()) {
      dim = pts[0].dim();
      break;
    }
  }
  out << "t";
  for (std::size_t d = 0; d < dim; ++d) out << ",x" << d;
  out << ",value\n";
  char buf[64];
  for (std::size_t t = 0; t < table.points.size(); ++t) {
    for (std::size_t a = 0; a < table.points[t].size(); ++a) {
      out << t;
      for (double c : table.points[t][a].coords()) {
        std::snprintf(buf, sizeof buf, ",%.17g", c);
        out << buf;
      }
      std::snprintf(buf, sizeof buf, ",%.17g\n", table.values[t][a]);
      out << buf;
    }
  }
}

}  // namespace kc
