#include "kc/core_model.hpp"

#include <cmath>
#include <map>
#include <string>

namespace kc {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::WeightsNotNormalized: return "WeightsNotNormalized";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::SourceMismatch: return "SourceMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidOrder: return "InvalidOrder";
    case ErrorCode::SizeCapExceeded: return "SizeCapExceeded";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::EnumerationGuard: return "EnumerationGuard";
    case ErrorCode::InfeasibleBudget: return "InfeasibleBudget";
    case ErrorCode::EmptyInstance: return "EmptyInstance";
    case ErrorCode::EmptyHistory: return "EmptyHistory";
    case ErrorCode::EmptyCloud: return "EmptyCloud";
    case ErrorCode::UnselectedAssignment: return "UnselectedAssignment";
    case ErrorCode::StageBudgetInfeasible: return "StageBudgetInfeasible";
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::InvalidKappa: return "InvalidKappa";
    case ErrorCode::IndexRange: return "IndexRange";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DimUnsupported: return "DimUnsupported";
    case ErrorCode::DegenerateBox: return "DegenerateBox";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::ConfigValidation: return "ConfigValidation";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Point::Point(std::vector<double> coords) : coords_(std::move(coords)) {
  for (double c : coords_) {
    if (!std::isfinite(c)) throw Error(ErrorCode::NonFinite, "point coordinate is not finite");
  }
}

Point::Point(std::initializer_list<double> coords) : Point(std::vector<double>(coords)) {}

double euclidean_distance(const Point& a, const Point& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "points of dimension " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

double distance_power(const Point& a, const Point& b, double p) {
  const double d = euclidean_distance(a, b);
  if (p == 1.0) return d;
  if (p == 2.0) return d * d;
  return std::pow(d, p);
}

void check_order(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw Error(ErrorCode::InvalidOrder, "order p must be >= 1, got " + std::to_string(p));
  }
}

DiscreteDistribution validate_distribution(std::vector<Point> support, std::vector<double> weights) {
  if (support.size() != weights.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(support.size()) + " support points, " +
                                               std::to_string(weights.size()) + " weights");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w)) throw Error(ErrorCode::NonFinite, "weight is not finite");
    if (w < 0.0) throw Error(ErrorCode::NegativeWeight, "weight " + std::to_string(w));
    sum += w;
  }
  if (std::abs(sum - 1.0) > kWeightTolerance) {
    throw Error(ErrorCode::WeightsNotNormalized, "weights sum to " + std::to_string(sum));
  }
  for (std::size_t i = 1; i < support.size(); ++i) {
    if (support[i].dim() != support[0].dim()) {
      throw Error(ErrorCode::DimensionMismatch, "support points of different dimensions");
    }
  }
  return DiscreteDistribution(std::move(support), std::move(weights));
}

DiscreteDistribution DiscreteDistribution::dirac(Point at) {
  std::vector<Point> support;
  support.push_back(std::move(at));
  return validate_distribution(std::move(support), {1.0});
}

DiscreteDistribution DiscreteDistribution::uniform(std::vector<Point> support) {
  const std::size_t n = support.size();
  if (n == 0) throw Error(ErrorCode::LengthMismatch, "uniform distribution over an empty support");
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  return validate_distribution(std::move(support), std::move(weights));
}

DiscreteKernel::DiscreteKernel(std::vector<Point> sources, std::vector<DiscreteDistribution> rows)
    : sources_(std::move(sources)), rows_(std::move(rows)) {
  if (sources_.size() != rows_.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(sources_.size()) + " sources, " +
                                               std::to_string(rows_.size()) + " rows");
  }
}

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, double order, std::vector<double> entries)
    : rows_(rows), cols_(cols), order_(order), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    throw Error(ErrorCode::LengthMismatch, "cost matrix entries do not match its shape");
  }
}

DiscreteDistribution compose_marginal(const DiscreteDistribution& lambda, const DiscreteKernel& kernel) {
  if (lambda.support() != kernel.sources()) {
    throw Error(ErrorCode::SourceMismatch, "marginal support differs from kernel sources");
  }
  std::map<Point, std::size_t> index;
  std::vector<Point> support;
  std::vector<double> weights;
  for (std::size_t s = 0; s < kernel.size(); ++s) {
    const double ls = lambda.weights()[s];
    const auto& row = kernel.row(s);
    for (std::size_t a = 0; a < row.size(); ++a) {
      const Point& y = row.support()[a];
      auto [it, inserted] = index.try_emplace(y, support.size());
      if (inserted) {
        support.push_back(y);
        weights.push_back(0.0);
      }
      weights[it->second] += ls * row.weights()[a];
    }
  }
  return validate_distribution(std::move(support), std::move(weights));
}

CostMatrix pairwise_cost(std::span<const Point> a, std::span<const Point> b, double p) {
  check_order(p);
  const std::size_t dim = !a.empty() ? a[0].dim() : (!b.empty() ? b[0].dim() : 0);
  for (const auto& pt : a) {
    if (pt.dim() != dim) throw Error(ErrorCode::DimensionMismatch, "row points of mixed dimension");
  }
  for (const auto& pt : b) {
    if (pt.dim() != dim) throw Error(ErrorCode::DimensionMismatch, "column points of mixed dimension");
  }
  std::vector<double> entries(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < b.size(); ++k) {
      entries[i * b.size() + k] = distance_power(a[i], b[k], p);
    }
  }
  return CostMatrix(a.size(), b.size(), p, std::move(entries));
}

void to_json(nlohmann::json& j, const Point& point) {
  j = std::vector<double>(point.coords().begin(), point.coords().end());
}

void from_json(const nlohmann::json& j, Point& point) { point = Point(j.get<std::vector<double>>()); }

void to_json(nlohmann::json& j, const DiscreteDistribution& dist) {
  j = nlohmann::json{{"support", dist.support()}, {"weights", dist.weights()}};
}

void from_json(const nlohmann::json& j, DiscreteDistribution& dist) {
  dist = validate_distribution(j.at("support").get<std::vector<Point>>(),
                               j.at("weights").get<std::vector<double>>());
}

void to_json(nlohmann::json& j, const DiscreteKernel& kernel) {
  j = nlohmann::json{{"sources", kernel.sources()}, {"rows", kernel.rows()}};
}

void from_json(const nlohmann::json& j, DiscreteKernel& kernel) {
  kernel = DiscreteKernel(j.at("sources").get<std::vector<Point>>(),
                          j.at("rows").get<std::vector<DiscreteDistribution>>());
}

}  // namespace kc
