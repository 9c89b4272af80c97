#pragma once

// Backward evaluation of value functions on finitely supported systems:
//   v_T = c_T,   v_t(x) = c_t(x) + sigma(x, Q_t(x), v_{t+1}).

#include <cstddef>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "kc/core_model.hpp"
#include "kc/markov_pipeline.hpp"

namespace kc {

/// Transition risk mapping sigma(x, mu, v). `next_values[a]` is v at
/// mu.support()[a]. Mappings must be pure and monotone in v.
class RiskMapping {
 public:
  using Evaluator = std::function<double(const Point&, const DiscreteDistribution&, std::span<const double>)>;

  RiskMapping(std::string name, Evaluator evaluator) : name_(std::move(name)), evaluator_(std::move(evaluator)) {}

  const std::string& name() const noexcept { return name_; }
  double operator()(const Point& x, const DiscreteDistribution& mu, std::span<const double> next_values) const {
    return evaluator_(x, mu, next_values);
  }

 private:
  std::string name_;
  Evaluator evaluator_;
};

/// sum_a mu_a v_a
RiskMapping expectation_mapping();

/// E[v] + kappa E[(v - E[v])_+], kappa in [0,1].
RiskMapping semideviation_mapping(double kappa);

using CostFunction = std::function<double(const Point&)>;

struct ValueTable {
  std::vector<std::vector<Point>> points;    // per stage, aligned with the system supports
  std::vector<std::vector<double>> values;

  /// v_t at a support point (exact coordinate match). Throws MissingValue.
  double at(std::size_t t, const Point& x) const;
};

/// `costs` holds either one function per stage 0..T or a single function used
/// at every stage.
ValueTable evaluate_backward(const ApproximateSystem& system, std::span<const CostFunction> costs,
                             const RiskMapping& sigma);

/// sum_{tau=t}^{T-1} L_tau (prod_{j=t}^{tau-1} K_j) Delta_tau, with T = Delta.size().
double error_bound(std::span<const double> lipschitz, std::span<const double> contraction,
                   std::span<const double> delta, std::size_t t);

/// max |v(y) - v(y')| / d(y, y') over pairs of distinct support points.
double discrete_lipschitz(std::span<const Point> support, std::span<const double> values);

/// Rows "t,x0,...,x{n-1},value".
void write_value_table_csv(std::ostream& out, const ValueTable& table);

/// Cost function given as a sum of affine and norm terms, e.g.
/// "1.5 + 2*x0 - x1 + 0.5*norm2". Atoms: x<i>, norm1, norm2, norminf, sqnorm.
class CostExpression {
 public:
  static CostExpression parse(const std::string& text);
  double operator()(const Point& x) const;
  const std::string& text() const noexcept { return text_; }

 private:
  enum class Atom { Constant, Coordinate, Norm1, Norm2, NormInf, SquaredNorm };
  struct Term {
    double coefficient;
    Atom atom;
    std::size_t index;
  };
  std::string text_;
  std::vector<Term> terms_;
};

}  // namespace kc
