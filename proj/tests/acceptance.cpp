// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "kc/experiment.hpp"
#include "kc/risk_eval.hpp"
#include "kc/scenario_gen.hpp"
#include "kc/selection_oracle.hpp"
#include "kc/transport.hpp"
#include "oracles.hpp"

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

// Multipliers live on the scale of w_s d^p. These instances have about ten
// particles in [-5,5]^2, so that scale is a few hundred times the one of the
// 500-particle mixture run, and the absolute step grows with it.
constexpr double kTinyAlpha0 = 1.0;

Outcome oracle_equivalence() {
  const auto start = Clock::now();
  std::mt19937_64 gen(20240601);
  int close = 0;
  int dual_violations = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_int_distribution<std::size_t> k_d(2, 12);
    const std::size_t K = k_d(gen);
    std::uniform_int_distribution<std::size_t> m_d(1, std::min<std::size_t>(4, K));
    const std::size_t M = m_d(gen);
    const double p = trial % 2 == 0 ? 1.0 : 2.0;
    auto tiny = fixtures::tiny_selection(gen, 3, 8, K, M, p);
    const double exact = oracle::best_subset_objective(tiny.problem);
    kc::SolverConfig config;
    config.seed = static_cast<std::uint64_t>(trial);
    config.alpha0 = kTinyAlpha0;
    const auto result = kc::run_subgradient(tiny.instance, config);
    const double rel = exact > 0.0 ? (result.objective - exact) / exact : result.objective;
    worst = std::max(worst, rel);
    if (rel <= 0.05) ++close;
    if (result.best_dual > exact + 1e-9) ++dual_violations;
  }
  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << "alpha0 " << kTinyAlpha0 << ": " << close << "/100 within 5% (worst " << worst * 100 << "%), weak-duality violations " << dual_violations
         << ", " << elapsed << " s";
  return {close >= 90 && dual_violations == 0 && elapsed < 60.0, detail.str()};
}

Outcome table_reproduction() {
  kc::ExperimentConfig config;
  config.mode = kc::Mode::Select;
  config.components = kc::reference_mixture();
  config.samples_per_component = 100;
  config.candidate_count = 256;
  config.budget = 51;
  config.order = 1.0;
  double total = 0.0;
  double slowest = 0.0;
  std::ostringstream detail;
  detail << "W1 per seed:";
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto run = kc::run_selection(config, seed);
    total += run.distance;
    slowest = std::max(slowest, run.wall_seconds);
    detail << ' ' << run.distance;
  }
  const double mean = total / 5.0;
  const double target = 0.644;
  detail << "; mean " << mean << " vs " << target << " +-15%; slowest " << slowest << " s";
  return {std::abs(mean - target) <= 0.15 * target && slowest < 30.0, detail.str()};
}

Outcome metric_axioms() {
  std::mt19937_64 gen(7);
  double worst_triangle = 0.0;
  double worst_marginal = 0.0;
  bool symmetric = true;
  bool identity = true;
  for (int trial = 0; trial < 200; ++trial) {
    const double p = trial % 2 == 0 ? 1.0 : 2.0;
    const auto a = fixtures::random_distribution(gen, 8);
    const auto b = fixtures::random_distribution(gen, 8);
    const auto c = fixtures::random_distribution(gen, 8);
    const auto ab = kc::wasserstein_exact(a, b, p);
    const auto ba = kc::wasserstein_exact(b, a, p);
    const auto bc = kc::wasserstein_exact(b, c, p);
    const auto ac = kc::wasserstein_exact(a, c, p);
    symmetric = symmetric && ab.distance == ba.distance;
    identity = identity && kc::wasserstein_exact(a, a, p).distance == 0.0;
    worst_triangle = std::max(worst_triangle, ac.distance - ab.distance - bc.distance);
    for (std::size_t i = 0; i < a.size(); ++i) {
      double row = 0.0;
      for (std::size_t k = 0; k < b.size(); ++k) row += ab.plan(i, k);
      worst_marginal = std::max(worst_marginal, std::abs(row - a.weights()[i]));
    }
    for (std::size_t k = 0; k < b.size(); ++k) {
      double col = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) col += ab.plan(i, k);
      worst_marginal = std::max(worst_marginal, std::abs(col - b.weights()[k]));
    }
  }
  double worst_oracle = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double p = trial % 2 == 0 ? 1.0 : 2.0;
    std::uniform_int_distribution<std::size_t> n_d(1, 7);
    const std::size_t n = n_d(gen);
    std::vector<kc::Point> x, y;
    std::vector<oracle::Vec> xs, ys;
    for (std::size_t i = 0; i < n; ++i) {
      x.push_back(fixtures::random_point(gen, 2));
      y.push_back(fixtures::random_point(gen, 2));
      xs.emplace_back(x.back().coords().begin(), x.back().coords().end());
      ys.emplace_back(y.back().coords().begin(), y.back().coords().end());
    }
    const double lib = kc::wasserstein_exact(kc::DiscreteDistribution::uniform(x), kc::DiscreteDistribution::uniform(y), p)
                           .plan.value;
    worst_oracle = std::max(worst_oracle, std::abs(lib - oracle::permutation_wpp(xs, ys, p)));
  }
  std::ostringstream detail;
  detail << "symmetric " << symmetric << ", identity " << identity << ", triangle excess " << worst_triangle
         << ", marginal error " << worst_marginal << ", oracle error " << worst_oracle;
  return {symmetric && identity && worst_triangle <= 1e-9 && worst_marginal <= 1e-9 && worst_oracle <= 1e-9,
          detail.str()};
}

Outcome outer_inequality() {
  std::mt19937_64 gen(11);
  double worst = -1e300;
  for (int trial = 0; trial < 100; ++trial) {
    const double p = trial % 2 == 0 ? 1.0 : 2.0;
    std::uniform_int_distribution<std::size_t> s_d(1, 4);
    std::vector<kc::Point> sources;
    const std::size_t S = s_d(gen);
    for (std::size_t s = 0; s < S; ++s) sources.push_back(fixtures::random_point(gen, 2));
    const auto lambda = fixtures::random_weights_on(gen, sources);
    std::vector<kc::DiscreteDistribution> q, qt;
    for (std::size_t s = 0; s < S; ++s) {
      q.push_back(fixtures::random_distribution(gen, 5));
      qt.push_back(fixtures::random_distribution(gen, 5));
    }
    const kc::DiscreteKernel Q(sources, q), Qt(sources, qt);
    const double integrated = kc::integrated_distance(lambda, Q, Qt, p);
    const double mixture =
        kc::wasserstein_exact(kc::compose_marginal(lambda, Q), kc::compose_marginal(lambda, Qt), p).distance;
    worst = std::max(worst, mixture - integrated);
  }
  std::ostringstream detail;
  detail << "max W(mixtures) - integrated = " << worst;
  return {worst <= 1e-9, detail.str()};
}

Outcome dual_correctness() {
  std::mt19937_64 gen(13);
  double worst_enum = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<std::size_t> k_d(1, 8);
    const std::size_t K = k_d(gen);
    std::uniform_int_distribution<std::size_t> m_d(1, K);
    auto tiny = fixtures::tiny_selection(gen, 3, 4, K, m_d(gen), trial % 2 == 0 ? 1.0 : 2.0);
    const auto state = fixtures::random_state(gen, tiny.instance, 0.3);
    const double lib = kc::dual_value(tiny.instance, state);
    const double ref = oracle::enumerated_dual(tiny.problem, state.theta0, state.theta);
    worst_enum = std::max(worst_enum, std::abs(lib - ref));
  }

  double worst_super = -1e300;
  for (int trial = 0; trial < 500; ++trial) {
    std::uniform_int_distribution<std::size_t> k_d(1, 10);
    const std::size_t K = k_d(gen);
    std::uniform_int_distribution<std::size_t> m_d(1, K);
    auto tiny = fixtures::tiny_selection(gen, 3, 6, K, m_d(gen), 1.0);
    const auto a = fixtures::random_state(gen, tiny.instance, 0.3);
    const auto b = fixtures::random_state(gen, tiny.instance, 0.3);
    const auto inner = kc::inner_solution(tiny.instance, a, {.record_beta = true});
    const auto g = kc::subgradient(tiny.instance, inner);
    double rhs = kc::dual_value(tiny.instance, a) + g.g0 * (b.theta0 - a.theta0);
    for (std::size_t n = 0; n < a.theta.size(); ++n) rhs += g.g[n] * (b.theta[n] - a.theta[n]);
    worst_super = std::max(worst_super, kc::dual_value(tiny.instance, b) - rhs);
  }

  // Averaging the batch estimates over every batch of size B reproduces the
  // exact supergradient and dual value.
  double worst_bias = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<std::size_t> k_d(4, 8);
    const std::size_t K = k_d(gen);
    auto tiny = fixtures::tiny_selection(gen, 2, 5, K, 2, 1.0);
    const auto state = fixtures::random_state(gen, tiny.instance, 0.3);
    const auto full_inner = kc::inner_solution(tiny.instance, state);
    const auto full = kc::subgradient(tiny.instance, full_inner);
    for (std::size_t B : {std::size_t{2}, std::size_t{4}}) {
      double g0 = 0.0, value = 0.0;
      std::vector<double> g(full.g.size(), 0.0);
      std::size_t batches = 0;
      for (std::uint32_t mask = 0; mask < (1u << K); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) != B) continue;
        std::vector<std::size_t> batch;
        for (std::size_t k = 0; k < K; ++k) {
          if (mask & (1u << k)) batch.push_back(k);
        }
        const auto inner = kc::inner_solution(tiny.instance, state, {.batch = batch});
        const auto est = kc::subgradient(tiny.instance, inner);
        g0 += est.g0;
        value += inner.value;
        for (std::size_t n = 0; n < g.size(); ++n) g[n] += est.g[n];
        ++batches;
      }
      const double nb = static_cast<double>(batches);
      worst_bias = std::max(worst_bias, std::abs(g0 / nb - full.g0));
      worst_bias = std::max(worst_bias, std::abs(value / nb - full_inner.value));
      for (std::size_t n = 0; n < g.size(); ++n) worst_bias = std::max(worst_bias, std::abs(g[n] / nb - full.g[n]));
    }
  }
  std::ostringstream detail;
  detail << "enumeration error " << worst_enum << ", supergradient excess " << worst_super << ", batch bias "
         << worst_bias;
  return {worst_enum <= 1e-12 && worst_super <= 1e-12 && worst_bias <= 1e-12, detail.str()};
}

oracle::Chain to_chain(const fixtures::RandomSystem& sys) {
  oracle::Chain chain;
  for (const auto& grid : sys.grids) {
    std::vector<oracle::Vec> g;
    for (const auto& x : grid) g.emplace_back(x.coords().begin(), x.coords().end());
    chain.states.push_back(std::move(g));
  }
  for (const auto& kernel : sys.kernels) {
    std::vector<std::vector<double>> P;
    for (const auto& row : kernel.rows()) P.push_back(row.weights());
    chain.P.push_back(std::move(P));
  }
  return chain;
}

Outcome backward_recursion() {
  std::mt19937_64 gen(17);
  const auto c = kc::CostExpression::parse("0.5 + x0 - 0.25*x1 + 0.3*norm2");
  const std::vector<kc::CostFunction> costs{c};
  const auto sigma = kc::expectation_mapping();

  double worst_paths = 0.0;
  bool identical = true;
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<std::size_t> t_d(1, 4);
    const auto sys = fixtures::random_system(gen, t_d(gen), 6);
    const auto system = kc::make_discrete_system(sys.grids[0][0], sys.kernels);
    const auto table = kc::evaluate_backward(system, costs, sigma);
    const double ref = oracle::path_expectation(
        to_chain(sys), [&](std::size_t, const oracle::Vec& x) { return c(kc::Point(x)); });
    worst_paths = std::max(worst_paths, std::abs(table.values[0][0] - ref));
    const auto again = kc::evaluate_backward(kc::make_discrete_system(sys.grids[0][0], sys.kernels), costs, sigma);
    identical = identical && again.values == table.values;
  }

  // Bound check on perturbed kernels sharing the true grids.
  double worst_bound = -1e300;
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<std::size_t> t_d(1, 4);
    const auto sys = fixtures::random_system(gen, t_d(gen), 6);
    const std::size_t T = sys.kernels.size();
    std::vector<kc::DiscreteKernel> perturbed;
    for (std::size_t t = 0; t < T; ++t) {
      std::vector<kc::DiscreteDistribution> rows;
      for (std::size_t i = 0; i < sys.grids[t].size(); ++i) {
        rows.push_back(fixtures::random_weights_on(gen, sys.grids[t + 1], true));
      }
      perturbed.emplace_back(sys.grids[t], std::move(rows));
    }
    // True values on every grid point: a system whose terminal support is the full grid.
    auto truth = kc::make_discrete_system(sys.grids[0][0], sys.kernels);
    truth.supports.back() = sys.grids[T];
    const auto v = kc::evaluate_backward(truth, costs, sigma);
    auto approx = kc::make_discrete_system(sys.grids[0][0], perturbed);
    approx.supports.back() = sys.grids[T];
    const auto vt = kc::evaluate_backward(approx, costs, sigma);

    std::vector<double> L(T), K(T, 1.0), delta(T);
    for (std::size_t tau = 0; tau < T; ++tau) {
      L[tau] = kc::discrete_lipschitz(v.points[tau + 1], v.values[tau + 1]);
      delta[tau] = kc::integrated_distance(approx.marginals[tau], sys.kernels[tau], perturbed[tau], 1.0);
    }
    for (std::size_t t = 0; t < T; ++t) {
      double lhs = 0.0;
      const auto& lam = approx.marginals[t];
      for (std::size_t a = 0; a < lam.size(); ++a) {
        lhs += lam.weights()[a] * std::abs(vt.at(t, lam.support()[a]) - v.at(t, lam.support()[a]));
      }
      worst_bound = std::max(worst_bound, lhs - kc::error_bound(L, K, delta, t));
    }
  }
  std::ostringstream detail;
  detail << "path error " << worst_paths << ", identical kernels give identical values " << identical
         << ", bound excess " << worst_bound;
  return {worst_paths <= 1e-12 && identical && worst_bound <= 1e-9, detail.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "kc_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path config = root / "config.json";
  std::ofstream(config) << R"({"mode":"select","K":256,"M":51,"samples_per_component":100,"p":1,"seeds":[3]})";
  std::vector<std::string> outputs;
  int failures = 0;
  for (const char* threads : {"1", "1", "4", "4"}) {
    const fs::path out = root / ("run" + std::to_string(outputs.size()));
    const std::string cmd = std::string("\"") + KC_CLI_PATH + "\" select --config \"" + config.string() +
                            "\" --threads " + threads + " --out \"" + out.string() + "\"";
    if (std::system(cmd.c_str()) != 0) ++failures;
    outputs.push_back(slurp(out / "result.json"));
  }
  bool same = failures == 0 && !outputs[0].empty();
  for (const auto& o : outputs) same = same && o == outputs[0];
  fs::remove_all(root);
  std::ostringstream detail;
  detail << "4 CLI runs (threads 1,1,4,4): " << (same ? "byte-identical result.json" : "outputs differ")
         << ", failed runs " << failures;
  return {same, detail.str()};
}

Outcome sobol_stratification() {
  bool permutation = true;
  bool inside = true;
  for (std::size_t dim = 1; dim <= 5; ++dim) {
    const auto unit = kc::sobol_unit(dim, 1024);
    for (std::size_t d = 0; d < dim; ++d) {
      std::vector<int> seen(1024, 0);
      for (const auto& x : unit) {
        const auto cell = static_cast<long>(std::floor(x[d] * 1024.0));
        if (cell < 0 || cell >= 1024) permutation = false;
        else ++seen[static_cast<std::size_t>(cell)];
      }
      permutation = permutation && std::all_of(seen.begin(), seen.end(), [](int n) { return n == 1; });
    }
    std::vector<double> lo(dim), hi(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      lo[d] = -3.0 + static_cast<double>(d);
      hi[d] = 2.0 + 2.0 * static_cast<double>(d);
    }
    const auto lattice = kc::sobol_lattice(dim, 1024, kc::Point(lo), kc::Point(hi));
    for (const auto& x : lattice) {
      for (std::size_t d = 0; d < dim; ++d) inside = inside && x[d] >= lo[d] && x[d] < hi[d];
    }
  }
  std::ostringstream detail;
  detail << "per-coordinate permutation " << permutation << ", inside box " << inside;
  return {permutation && inside, detail.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1 oracle equivalence", oracle_equivalence},   {"2 mixture selection W1", table_reproduction},
      {"3 Wasserstein axioms", metric_axioms},        {"4 integrated distance bound", outer_inequality},
      {"5 dual correctness", dual_correctness},       {"6 backward recursion", backward_recursion},
      {"7 determinism", determinism},                 {"8 Sobol stratification", sobol_stratification},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome outcome{false, ""};
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] criterion %s: %s\n", outcome.pass ? "PASS" : "FAIL", name, outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
