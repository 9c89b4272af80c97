#pragma once

// Points, finitely supported measures, kernels and p-th power cost matrices.

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <json.hpp>

#include "kc/error.hpp"

namespace kc {

inline constexpr double kWeightTolerance = 1e-12;

/// A point of R^n. Coordinates are always finite.
class Point {
 public:
  Point() = default;
  explicit Point(std::vector<double> coords);
  Point(std::initializer_list<double> coords);

  std::size_t dim() const noexcept { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  std::span<const double> coords() const noexcept { return coords_; }

  // Exact coordinate equality; lexicographic order for use as a map key.
  bool operator==(const Point& other) const = default;
  std::partial_ordering operator<=>(const Point& other) const = default;

 private:
  std::vector<double> coords_;
};

double euclidean_distance(const Point& a, const Point& b);

/// d(a,b)^p with the Euclidean ground metric.
double distance_power(const Point& a, const Point& b, double p);

class DiscreteDistribution {
 public:
  DiscreteDistribution() = default;

  static DiscreteDistribution dirac(Point at);
  static DiscreteDistribution uniform(std::vector<Point> support);

  const std::vector<Point>& support() const noexcept { return support_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return support_.size(); }
  bool empty() const noexcept { return support_.empty(); }

 private:
  friend DiscreteDistribution validate_distribution(std::vector<Point>, std::vector<double>);
  DiscreteDistribution(std::vector<Point> support, std::vector<double> weights)
      : support_(std::move(support)), weights_(std::move(weights)) {}

  std::vector<Point> support_;
  std::vector<double> weights_;
};

/// Checks the invariants and builds the distribution. Never renormalizes.
DiscreteDistribution validate_distribution(std::vector<Point> support, std::vector<double> weights);

/// Conditional distributions rows[s] attached to the source points sources[s].
class DiscreteKernel {
 public:
  DiscreteKernel() = default;
  DiscreteKernel(std::vector<Point> sources, std::vector<DiscreteDistribution> rows);

  const std::vector<Point>& sources() const noexcept { return sources_; }
  const std::vector<DiscreteDistribution>& rows() const noexcept { return rows_; }
  const DiscreteDistribution& row(std::size_t s) const { return rows_.at(s); }
  std::size_t size() const noexcept { return sources_.size(); }

 private:
  std::vector<Point> sources_;
  std::vector<DiscreteDistribution> rows_;
};

/// Dense table of d(a_i, b_k)^p, row-major.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double order, std::vector<double> entries);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double order() const noexcept { return order_; }
  double operator()(std::size_t i, std::size_t k) const { return entries_[i * cols_ + k]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(entries_).subspan(i * cols_, cols_);
  }
  const std::vector<double>& entries() const noexcept { return entries_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  double order_ = 1.0;
  std::vector<double> entries_;
};

/// lambda o Q: weight of y is sum_s lambda_s Q(y | z_s). Atoms with identical
/// coordinates are merged; the output lists atoms in order of first appearance.
DiscreteDistribution compose_marginal(const DiscreteDistribution& lambda, const DiscreteKernel& kernel);

CostMatrix pairwise_cost(std::span<const Point> a, std::span<const Point> b, double p);

void check_order(double p);

// JSON: a point is an array of numbers, a distribution {"support", "weights"},
// a kernel {"sources", "rows"}.
void to_json(nlohmann::json& j, const Point& point);
void from_json(const nlohmann::json& j, Point& point);
void to_json(nlohmann::json& j, const DiscreteDistribution& dist);
void from_json(const nlohmann::json& j, DiscreteDistribution& dist);
void to_json(nlohmann::json& j, const DiscreteKernel& kernel);
void from_json(const nlohmann::json& j, DiscreteKernel& kernel);

}  // namespace kc
