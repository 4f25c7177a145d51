#include <cmath>
#include <random>

#include "doctest.h"
#include "qkdlab/errors.hpp"
#include "qkdlab/optimizer.hpp"
#include "qkdlab/search.hpp"

using namespace qkdlab;
using doctest::Approx;

TEST_CASE("noiseless channel approaches unit rate") {
  const auto r = optimize_rate(ChannelPoint::from_disturbance(Protocol::kBb84, 0.0, 0.0), 1e12, 1e-9);
  CHECK(r.rate > 0.99);
}

TEST_CASE("optimizer matches an exhaustive grid at small N") {
  const double n = 1e4, eps = 1e-9;
  OptimizationConfig cfg;
  cfg.fraction_grid = search::linspace(0.05, 0.85, 5);
  cfg.refine_rounds = 0;
  cfg.m_grid_points = 30;
  const auto point = ChannelPoint::from_disturbance(Protocol::kSixState, 0.01, 0.0);
  const auto grid_only = optimize_rate(point, n, eps, cfg);

  // Exhaustive over the same grids via the public single-point API.
  double best = -INFINITY;
  std::vector<double> ms;
  for (double m : search::logspace(10, n / 2, 30)) {
    m = std::round(m);
    if (ms.empty() || m > ms.back()) ms.push_back(m);
  }
  double best_all_m = -INFINITY;
  for (double fb : cfg.fraction_grid)
    for (double fpe : cfg.fraction_grid)
      for (double fpa : cfg.fraction_grid) {
        if (fb + fpe + fpa > 1 - cfg.budget_floor) continue;
        const auto budget = SecurityBudget::from_fractions(eps, fb, fpe, fpa);
        for (double m : ms) best = std::max(best, finite_rate(point, {n, m, 1.0}, budget).rate);
        for (double m = 10; m <= n / 2; m += 1) best_all_m = std::max(best_all_m, finite_rate(point, {n, m, 1.0}, budget).rate);
      }
  REQUIRE(std::isfinite(best));
  CHECK(grid_only.rate == best);

  // With refinement and the default grid it does at least as well as every integer m.
  cfg.refine_rounds = 3;
  cfg.fraction_grid = default_fraction_grid();
  const auto refined = optimize_rate(point, n, eps, cfg);
  CHECK(refined.rate >= best_all_m - 1e-12);
}

TEST_CASE("optimizer never loses to a feasible hand-picked point") {
  std::mt19937 rng(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto pr : {Protocol::kBb84, Protocol::kSixState}) {
    const double n = 1e7, eps = 1e-9;
    const auto point = ChannelPoint::from_disturbance(pr, 0.04, 0.05);
    const double best = optimize_rate(point, n, eps).rate;
    for (int i = 0; i < 20; ++i) {
      const double m = std::round(std::pow(10.0, 1.0 + u(rng) * (std::log10(n / 2) - 1.0)));
      double f[3];
      for (auto& x : f) x = 0.002 + 0.3 * u(rng);
      const auto budget = SecurityBudget::from_fractions(eps, f[0], f[1], f[2]);
      CHECK(best >= finite_rate(point, {n, m, 1.0}, budget).rate);
    }
  }
}

TEST_CASE("budget at the optimum") {
  const auto r = optimize_rate(ChannelPoint::from_qber(Protocol::kSixState, 0.05, 0.05), 1e8, 1e-9);
  CHECK(std::abs(r.budget.total() - 1e-9) <= 1e-15 * 1e-9 * 10);
  for (double c : {r.budget.eps_bar, r.budget.eps_pe, r.budget.eps_ec, r.budget.eps_pa})
    CHECK(c >= kBudgetFloor * 1e-9 * (1 - 1e-9));
  CHECK(r.estimation >= 10);
  CHECK(r.estimation <= 5e7);
}

TEST_CASE("determinism") {
  const auto point = ChannelPoint::from_disturbance(Protocol::kBb84, 0.05, 0.02);
  const auto a = optimize_rate(point, 1e6, 1e-9);
  const auto b = optimize_rate(point, 1e6, 1e-9);
  CHECK(a.rate == b.rate);
  CHECK(a.estimation == b.estimation);
  CHECK(a.budget.eps_pe == b.budget.eps_pe);
}

TEST_CASE("N0 bracket") {
  for (auto [pr, d] : {std::pair{Protocol::kBb84, 0.05}, {Protocol::kSixState, 0.08}}) {
    OptimizationConfig cfg;
    const auto r = find_n0(pr, d, 0.0, 1e-9, cfg);
    const auto point = ChannelPoint::from_disturbance(pr, d, 0.0);
    CHECK(r.witness.rate > 0.0);
    CHECK(optimize_rate(point, r.n0 * (1 - cfg.n0_resolution), 1e-9).rate <= 0.0);
    for (double factor : {2.0, 10.0, 1e3}) CHECK(optimize_rate(point, r.n0 * factor, 1e-9).rate > 0.0);
  }
}

TEST_CASE("N0 near the noiseless threshold is large") {
  const auto r = find_n0(Protocol::kBb84, 0.11, 0.0, 1e-9);
  CHECK(r.n0 > 1e10);
  CHECK_THROWS_AS(find_n0(Protocol::kBb84, 0.115, 0.0, 1e-9), NoKeyError);
}

TEST_CASE("asymptotic optimal noise") {
  const auto below = optimal_noise(Protocol::kBb84, 0.05, NoiseObjective::kAsymptotic, 1e-9);
  CHECK(below.p < 1e-3);
  const auto above = optimal_noise(Protocol::kSixState, 0.12, NoiseObjective::kAsymptotic, 1e-9);
  CHECK(above.p > 0.05);
  OptimizationConfig cfg;
  for (double dp : {-cfg.noise_step, cfg.noise_step}) {
    const double p = above.p + dp;
    CHECK(above.value >= asymptotic_rate(Protocol::kSixState, 0.12, p).rate - 1e-9);
  }
  CHECK(parse_noise_objective("minimize-n0") == NoiseObjective::kMinimizeN0);
  CHECK_THROWS_AS(parse_noise_objective("fastest"), DomainError);
  CHECK_THROWS_AS(optimal_noise(Protocol::kBb84, 0.6, NoiseObjective::kAsymptotic, 1e-9), DomainError);
}

TEST_CASE("thresholds") {
  OptimizationConfig cfg;
  cfg.threshold_tol = 1e-5;
  const double plain = disturbance_threshold(Protocol::kSixState, false, cfg);
  CHECK(plain == Approx(0.1262).epsilon(1e-3));
  CHECK(asymptotic_rate(Protocol::kSixState, plain - 1e-4, 0.0).rate > 0.0);
  CHECK(asymptotic_rate(Protocol::kSixState, plain + 1e-4, 0.0).rate < 0.0);
}

TEST_CASE("domain checks") {
  const auto point = ChannelPoint::from_disturbance(Protocol::kBb84, 0.05, 0.0);
  CHECK_THROWS_AS(optimize_rate(point, 2.0, 1e-9), DomainError);
  CHECK_THROWS_AS(optimize_rate(point, 1e6, 0.0), DomainError);
  CHECK_THROWS_AS(optimize_rate(point, INFINITY, 1e-9), DomainError);
}
