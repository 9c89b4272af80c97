#pragma once

// Seeded scenario generators: Gaussian mixture particle clouds and Sobol
// candidate lattices.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "kc/core_model.hpp"

namespace kc {

class Rng;

/// N(mean, covariance). The covariance is stored row-major and factorized
/// once on construction.
class GaussianComponent {
 public:
  GaussianComponent(Point mean, std::vector<double> covariance);

  const Point& mean() const noexcept { return mean_; }
  const std::vector<double>& covariance() const noexcept { return covariance_; }
  std::size_t dim() const noexcept { return mean_.dim(); }

  /// mean + L z with z a vector of standard normals from `rng`.
  Point sample(Rng& rng) const;

 private:
  Point mean_;
  std::vector<double> covariance_;
  std::vector<double> cholesky_;  // lower triangle, row-major
};

/// The five planar components used for the mixture experiments.
std::vector<GaussianComponent> reference_mixture();

/// n draws per component; component c uses the stream (seed, c), so the
/// result does not depend on how the work is scheduled.
std::vector<std::vector<Point>> sample_gaussian_mixture(const std::vector<GaussianComponent>& components,
                                                        std::size_t n_per_component, std::uint64_t seed);

/// Number of dimensions covered by the embedded direction-number table.
inline constexpr std::size_t kSobolMaxDim = 21;

/// First `count` points of the (unscrambled, zero point included) Sobol
/// sequence, mapped affinely from [0,1)^dim into [low, high).
std::vector<Point> sobol_lattice(std::size_t dim, std::size_t count, const Point& low, const Point& high);

/// Raw Sobol points in [0,1)^dim.
std::vector<std::vector<double>> sobol_unit(std::size_t dim, std::size_t count);

}  // namespace kc
