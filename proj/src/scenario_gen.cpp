#include "kc/scenario_gen.hpp"

#include <array>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "kc/random.hpp"

namespace kc {

GaussianComponent::GaussianComponent(Point mean, std::vector<double> covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
  const std::size_t d = mean_.dim();
  if (covariance_.size() != d * d) {
    throw Error(ErrorCode::DimensionMismatch, "covariance must be " + std::to_string(d) + "x" + std::to_string(d));
  }
  Eigen::MatrixXd cov(d, d);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double value = covariance_[r * d + c];
      if (!std::isfinite(value)) throw Error(ErrorCode::NonFinite, "covariance entry is not finite");
      if (std::abs(value - covariance_[c * d + r]) > 1e-12) {
        throw Error(ErrorCode::NotPositiveDefinite, "covariance is not symmetric");
      }
      cov(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = value;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "covariance has no Cholesky factor");
  }
  const Eigen::MatrixXd lower = llt.matrixL();
  cholesky_.assign(d * d, 0.0);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c <= r; ++c) {
      cholesky_[r * d + c] = lower(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
}

Point GaussianComponent::sample(Rng& rng) const {
  const std::size_t d = dim();
  std::vector<double> z(d);
  for (auto& v : z) v = rng.normal();
  std::vector<double> x(d);
  for (std::size_t r = 0; r < d; ++r) {
    double acc = mean_[r];
    for (std::size_t c = 0; c <= r; ++c) acc += cholesky_[r * d + c] * z[c];
    x[r] = acc;
  }
  return Point(std::move(x));
}

std::vector<GaussianComponent> reference_mixture() {
  return {
      GaussianComponent({0.0, 0.0}, {0.5, -0.2, -0.2, 0.5}),
      GaussianComponent({4.0, -1.0}, {2.0, 0.0, 0.0, 2.0}),
      GaussianComponent({-3.0, 3.0}, {1.0, -0.1, -0.1, 1.0}),
      GaussianComponent({2.5, 2.5}, {2.0, 0.5, 0.5, 2.0}),
      GaussianComponent({-1.0, -2.0}, {1.6, -1.2, -1.2, 1.6}),
  };
}

std::vector<std::vector<Point>> sample_gaussian_mixture(const std::vector<GaussianComponent>& components,
                                                        std::size_t n_per_component, std::uint64_t seed) {
  if (n_per_component == 0) throw Error(ErrorCode::InvalidArgument, "at least one sample per component");
  std::vector<std::vector<Point>> clouds(components.size());
  for (std::size_t c = 0; c < components.size(); ++c) {
    Rng rng(seed, c);
    clouds[c].reserve(n_per_component);
    for (std::size_t i = 0; i < n_per_component; ++i) clouds[c].push_back(components[c].sample(rng));
  }
  return clouds;
}

namespace {

// Direction numbers of Joe & Kuo, file new-joe-kuo-6.21201
// (https://web.maths.unsw.edu.au/~fkuo/sobol/), dimensions 2..21.
// Fields: degree s, polynomial coefficient a, initial m_1..m_s.
struct SobolEntry {
  unsigned degree;
  unsigned poly;
  std::array<unsigned, 7> m;
};

constexpr std::array<SobolEntry, kSobolMaxDim - 1> kSobolTable{{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
}};

constexpr unsigned kBits = 32;

std::array<std::uint32_t, kBits> directions(std::size_t dim_index) {
  std::array<std::uint32_t, kBits> v{};
  if (dim_index == 0) {
    for (unsigned i = 0; i < kBits; ++i) v[i] = std::uint32_t{1} << (kBits - 1 - i);
    return v;
  }
  const auto& e = kSobolTable[dim_index - 1];
  const unsigned s = e.degree;
  std::array<std::uint64_t, kBits> m{};
  for (unsigned i = 0; i < s; ++i) m[i] = e.m[i];
  for (unsigned i = s; i < kBits; ++i) {
    std::uint64_t value = m[i - s] ^ (m[i - s] << s);
    for (unsigned k = 1; k < s; ++k) {
      if ((e.poly >> (s - 1 - k)) & 1U) value ^= m[i - k] << k;
    }
    m[i] = value;
  }
  for (unsigned i = 0; i < kBits; ++i) v[i] = static_cast<std::uint32_t>(m[i] << (kBits - 1 - i));
  return v;
}

}  // namespace

std::vector<std::vector<double>> sobol_unit(std::size_t dim, std::size_t count) {
  if (dim == 0 || dim > kSobolMaxDim) {
    throw Error(ErrorCode::DimUnsupported, "Sobol dimension " + std::to_string(dim) + " not in [1, " +
                                               std::to_string(kSobolMaxDim) + "]");
  }
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "Sobol count must be positive");
  if (count > (std::size_t{1} << kBits)) throw Error(ErrorCode::InvalidArgument, "Sobol count too large");

  std::vector<std::array<std::uint32_t, kBits>> v;
  for (std::size_t d = 0; d < dim; ++d) v.push_back(directions(d));

  std::vector<std::vector<double>> points(count, std::vector<double>(dim));
  std::vector<std::uint32_t> x(dim, 0);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t d = 0; d < dim; ++d) points[i][d] = static_cast<double>(x[d]) * 0x1.0p-32;
    // Gray-code update: flip the direction of the lowest zero bit of i.
    unsigned c = 0;
    for (std::size_t value = i; value & 1U; value >>= 1) ++c;
    if (c >= kBits) break;
    for (std::size_t d = 0; d < dim; ++d) x[d] ^= v[d][c];
  }
  return points;
}

std::vector<Point> sobol_lattice(std::size_t dim, std::size_t count, const Point& low, const Point& high) {
  if (low.dim() != dim || high.dim() != dim) {
    throw Error(ErrorCode::DimensionMismatch, "box corners must have dimension " + std::to_string(dim));
  }
  for (std::size_t d = 0; d < dim; ++d) {
    if (!(low[d] < high[d])) throw Error(ErrorCode::DegenerateBox, "box low >= high in coordinate " + std::to_string(d));
  }
  const auto unit = sobol_unit(dim, count);
  std::vector<Point> out;
  out.reserve(count);
  for (const auto& u : unit) {
    std::vector<double> coords(dim);
    for (std::size_t d = 0; d < dim; ++d) coords[d] = low[d] + (high[d] - low[d]) * u[d];
    out.emplace_back(std::move(coords));
  }
  return out;
}

}  // namespace kc
