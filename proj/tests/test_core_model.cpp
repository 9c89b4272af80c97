#include <cmath>
#include <limits>
#include <random>

#include "fixtures.hpp"
#include "kc/core_model.hpp"
#include "test_support.hpp"

using kc::DiscreteDistribution;
using kc::DiscreteKernel;
using kc::ErrorCode;
using kc::Point;

TEST_CASE("points reject non-finite coordinates") {
  CHECK_KC_ERROR(Point({0.0, std::numeric_limits<double>::quiet_NaN()}), ErrorCode::NonFinite);
  CHECK_KC_ERROR(Point({std::numeric_limits<double>::infinity()}), ErrorCode::NonFinite);
}

TEST_CASE("validate_distribution") {
  SUBCASE("dirac") {
    const auto d = kc::validate_distribution({Point{0, 0}}, {1.0});
    CHECK(d.size() == 1);
  }
  SUBCASE("weights summing to 1.1") {
    CHECK_KC_ERROR(kc::validate_distribution({Point{0, 0}, Point{1, 1}}, {0.5, 0.6}), ErrorCode::WeightsNotNormalized);
  }
  SUBCASE("uniform pair") {
    const auto d = kc::validate_distribution({Point{0, 0}, Point{1, 1}}, {0.5, 0.5});
    CHECK(d.weights()[1] == 0.5);
  }
  SUBCASE("errors") {
    CHECK_KC_ERROR(kc::validate_distribution({Point{0}, Point{1}}, {1.5, -0.5}), ErrorCode::NegativeWeight);
    CHECK_KC_ERROR(kc::validate_distribution({Point{0}}, {0.5, 0.5}), ErrorCode::LengthMismatch);
    CHECK_KC_ERROR(kc::validate_distribution({Point{0}}, {std::numeric_limits<double>::quiet_NaN()}),
                   ErrorCode::NonFinite);
  }
  SUBCASE("repeated support points are allowed") {
    CHECK_NOTHROW(kc::validate_distribution({Point{1}, Point{1}}, {0.25, 0.75}));
  }
}

TEST_CASE("compose_marginal") {
  const Point z{0, 0}, z1{0, 0}, z2{1, 0};
  const Point a{5, 5}, b{6, 6}, c{7, 7};
  SUBCASE("single source") {
    const DiscreteKernel q({z}, {kc::validate_distribution({a, b}, {0.3, 0.7})});
    const auto m = kc::compose_marginal(DiscreteDistribution::dirac(z), q);
    REQUIRE(m.size() == 2);
    CHECK(m.support()[0] == a);
    CHECK(m.weights()[0] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(m.weights()[1] == doctest::Approx(0.7).epsilon(1e-15));
  }
  SUBCASE("identical rows merge") {
    const DiscreteKernel q({z1, z2}, {DiscreteDistribution::dirac(a), DiscreteDistribution::dirac(a)});
    const auto m = kc::compose_marginal(kc::validate_distribution({z1, z2}, {0.5, 0.5}), q);
    REQUIRE(m.size() == 1);
    CHECK(m.weights()[0] == 1.0);
  }
  SUBCASE("overlapping rows") {
    const DiscreteKernel q({z1, z2}, {kc::validate_distribution({a, b}, {0.2, 0.8}),
                                       kc::validate_distribution({b, c}, {0.4, 0.6})});
    const auto m = kc::compose_marginal(kc::validate_distribution({z1, z2}, {0.5, 0.5}), q);
    REQUIRE(m.size() == 3);
    CHECK(m.support()[0] == a);
    CHECK(m.support()[1] == b);
    CHECK(m.support()[2] == c);
    CHECK(std::abs(m.weights()[0] - 0.1) < 1e-15);
    CHECK(std::abs(m.weights()[1] - 0.6) < 1e-15);
    CHECK(std::abs(m.weights()[2] - 0.3) < 1e-15);
  }
  SUBCASE("source mismatch") {
    const DiscreteKernel q({z1}, {DiscreteDistribution::dirac(a)});
    CHECK_KC_ERROR(kc::compose_marginal(DiscreteDistribution::dirac(z2), q), ErrorCode::SourceMismatch);
  }
}

TEST_CASE("compose_marginal output is normalized and linear in lambda") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Point> sources;
    for (int s = 0; s < 4; ++s) sources.push_back(fixtures::random_point(gen, 2));
    // A shared pool of atoms so that rows overlap.
    std::vector<Point> pool;
    for (int a = 0; a < 6; ++a) pool.push_back(fixtures::random_point(gen, 2));
    std::vector<DiscreteDistribution> rows;
    for (int s = 0; s < 4; ++s) rows.push_back(fixtures::random_weights_on(gen, pool, true));
    const DiscreteKernel q(sources, rows);
    const auto l1 = fixtures::random_weights_on(gen, sources);
    const auto l2 = fixtures::random_weights_on(gen, sources);
    const double t = 0.3;
    std::vector<double> mixed(4);
    for (int s = 0; s < 4; ++s) mixed[s] = t * l1.weights()[s] + (1 - t) * l2.weights()[s];
    double sum = 0.0;
    for (double w : mixed) sum += w;
    mixed[3] += 1.0 - sum;
    const auto m = kc::compose_marginal(kc::validate_distribution(sources, mixed), q);
    const auto m1 = kc::compose_marginal(l1, q);
    const auto m2 = kc::compose_marginal(l2, q);
    double total = 0.0;
    for (double w : m.weights()) total += w;
    CHECK(std::abs(total - 1.0) <= 1e-12);
    REQUIRE(m.support() == m1.support());
    REQUIRE(m.support() == m2.support());
    for (std::size_t a = 0; a < m.size(); ++a) {
      CHECK(std::abs(m.weights()[a] - (t * m1.weights()[a] + (1 - t) * m2.weights()[a])) <= 1e-12);
    }
  }
}

TEST_CASE("pairwise_cost") {
  const std::vector<Point> origin{Point{0, 0}}, far{Point{3, 4}};
  CHECK(kc::pairwise_cost(origin, far, 1.0)(0, 0) == 5.0);
  CHECK(kc::pairwise_cost(origin, far, 2.0)(0, 0) == doctest::Approx(25.0).epsilon(1e-15));
  const std::vector<Point> diag{Point{1, 1}, Point{2, 2}}, one{Point{1, 1}};
  const auto c = kc::pairwise_cost(diag, one, 1.0);
  CHECK(c(0, 0) == 0.0);
  CHECK(c(1, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK_KC_ERROR(kc::pairwise_cost(origin, std::vector<Point>{Point{1}}, 1.0), ErrorCode::DimensionMismatch);
  CHECK_KC_ERROR(kc::pairwise_cost(origin, far, 0.5), ErrorCode::InvalidOrder);

  std::mt19937_64 gen(5);
  std::vector<Point> pts;
  for (int i = 0; i < 7; ++i) pts.push_back(fixtures::random_point(gen, 3));
  const auto self = kc::pairwise_cost(pts, pts, 1.5);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(self(i, i) == 0.0);
    for (std::size_t k = 0; k < pts.size(); ++k) CHECK(self(i, k) == self(k, i));
  }
}

TEST_CASE("json round trip") {
  const auto d = kc::validate_distribution({Point{0.1, -2}, Point{3, 4}}, {0.25, 0.75});
  const DiscreteKernel q({Point{0, 0}}, {d});
  const nlohmann::json jd = d;
  CHECK(jd.at("weights")[1] == 0.75);
  CHECK(jd.at("support")[0][1] == -2.0);
  const auto d2 = jd.get<DiscreteDistribution>();
  CHECK(d2.support() == d.support());
  CHECK(d2.weights() == d.weights());
  const nlohmann::json jq = q;
  const auto q2 = jq.get<DiscreteKernel>();
  CHECK(q2.sources() == q.sources());
  CHECK(q2.row(0).weights() == d.weights());
  nlohmann::json bad = {{"support", {{0.0}}}, {"weights", {0.5}}};
  CHECK_KC_ERROR(bad.get<DiscreteDistribution>(), ErrorCode::WeightsNotNormalized);
}
