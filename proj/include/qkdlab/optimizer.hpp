#pragma once

// Outer optimization: maximize the finite rate over the parameter-estimation
// sample size m and the epsilon budget split, find the minimal signal number
// N0, the optimal noise parameter and the tolerable disturbance.

#include <string>
#include <vector>

#include "qkdlab/keyrate.hpp"

namespace qkdlab {

// Ten log-spaced fractions from 1e-3 to 1.
std::vector<double> default_fraction_grid();

struct OptimizationConfig {
  // Candidate fractions of eps_total for eps_bar, eps_PE and eps_PA;
  // eps_EC receives the remainder.
  std::vector<double> fraction_grid = default_fraction_grid();
  double budget_floor = kBudgetFloor;
  int m_grid_points = 30;
  double m_min = 10.0;
  // Alternating golden-section refinement of m and the budget fractions.
  int refine_rounds = 3;
  double param_rel_tol = 1e-4;
  double sifting = 1.0;

  double n_search_lo = 1e3;
  double n_search_hi = 1e18;
  double n0_resolution = 0.01;  // relative

  double noise_step = 0.01;
  double noise_max = 0.5;
  double noise_tol = 1e-4;

  double threshold_tol = 1e-6;

  RateOptions rate;
};

// Max over (m, budget) of finite_rate; the reported breakdown carries the arg-max.
RateBreakdown optimize_rate(const ChannelPoint& point, double signals, double eps_total,
                            const OptimizationConfig& config = {});

struct N0Result {
  double n0 = 0.0;
  double optimal_p = 0.0;
  RateBreakdown witness;  // optimized rate at n0 (> 0)
};

// Smallest N with optimized rate > 0, by bisection on log N.
N0Result find_n0(Protocol protocol, double disturbance, double p, double eps_total,
                 const OptimizationConfig& config = {});

enum class NoiseObjective { kAsymptotic, kMinimizeN0, kMaximizeRateAtN };

std::string_view to_string(NoiseObjective objective);
NoiseObjective parse_noise_objective(std::string_view text);

struct NoiseOptimum {
  double p = 0.0;
  // Asymptotic rate, optimized finite rate at N, or N0 depending on the objective.
  double value = 0.0;
  RateBreakdown witness;
};

// Grid over p in [0, noise_max] refined by golden section. `signals` is used
// by kMaximizeRateAtN only.
NoiseOptimum optimal_noise(Protocol protocol, double disturbance, NoiseObjective objective,
                           double eps_total, double signals = 0.0,
                           const OptimizationConfig& config = {});

// Noise grid used by the threshold search: p runs up to 1 - 1e-4 since the
// noisy thresholds are approached only as p -> 1.
std::vector<double> threshold_noise_grid();

// Root in D of the asymptotic rate (maximized over p when requested).
double disturbance_threshold(Protocol protocol, bool with_optimal_noise,
                             const OptimizationConfig& config = {});

}  // namespace qkdlab
