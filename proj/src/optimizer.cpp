#include "qkdlab/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "qkdlab/errors.hpp"
#include "qkdlab/search.hpp"

namespace qkdlab {

namespace {

constexpr double kMinusInf = -std::numeric_limits<double>::infinity();

struct BudgetFractions {
  double bar = 0.0;
  double pe = 0.0;
  double pa = 0.0;
};

// Finite rate as a function of (m, budget fractions) at fixed (point, N).
// The confidence-interval worst case depends on (m, eps_PE) only through
// zeta, so it is memoized by zeta.
class RateSurface {
 public:
  RateSurface(const ChannelPoint& point, double signals, double eps_total, const OptimizationConfig& config)
      : point_(point), signals_(signals), eps_total_(eps_total), config_(config) {}

  bool feasible(const BudgetFractions& f) const {
    const double floor = config_.budget_floor;
    return f.bar >= floor && f.pe >= floor && f.pa >= floor &&
           f.bar + f.pe + f.pa <= 1.0 - floor + 1e-12;
  }

  double rate(double m, const BudgetFractions& f) {
    if (!feasible(f)) return kMinusInf;
    const FiniteSizeParams size{signals_, m, config_.sifting};
    const double n = size.key_signals();
    if (!(m >= 1.0 && n >= 1.0)) return kMinusInf;
    const double eps_bar = eps_total_ * f.bar;
    const double eps_pe = eps_total_ * f.pe;
    const double eps_pa = eps_total_ * f.pa;
    const auto& worst = worst_case(zeta(eps_pe, config_.rate.n_p, m));
    const double aep = aep_penalty(eps_bar, n);
    return n / signals_ * (worst.attack.entropies.sxe - aep - config_.rate.f_ec * worst.attack.entropies.hxy) +
           2.0 / signals_ * std::log2(2.0 * eps_pa);
  }

  RateBreakdown breakdown(double m, const BudgetFractions& f) {
    const FiniteSizeParams size{signals_, m, config_.sifting};
    const auto budget = SecurityBudget::from_fractions(eps_total_, f.bar, f.pe, f.pa, config_.budget_floor);
    const double z = zeta(budget.eps_pe, config_.rate.n_p, m);
    return assemble_finite_rate(point_, size, budget, z, worst_case(z), config_.rate);
  }

 private:
  const ConfidenceWorstCase& worst_case(double z) {
    auto it = cache_.find(z);
    if (it == cache_.end()) it = cache_.emplace(z, worst_case_over_confidence(point_, z, config_.rate)).first;
    return it->second;
  }

  ChannelPoint point_;
  double signals_;
  double eps_total_;
  const OptimizationConfig& config_;
  std::map<double, ConfidenceWorstCase> cache_;
};

// Golden-section maximization of f over log(x) in [lo, hi].
template <class F>
search::Point maximize_log(F&& f, double lo, double hi, double rel_tol) {
  if (!(hi > lo)) return {lo, f(lo)};
  auto neg = [&](double log_x) { return -f(std::exp(log_x)); };
  const auto best = search::golden_section_minimize(neg, std::log(lo), std::log(hi), rel_tol);
  return {std::exp(best.x), -best.value};
}

}  // namespace

std::vector<double> default_fraction_grid() { return search::logspace(1e-3, 1.0, 10); }

RateBreakdown optimize_rate(const ChannelPoint& point, double signals, double eps_total,
                            const OptimizationConfig& config) {
  if (!(signals >= 4.0 && std::isfinite(signals))) throw DomainError("N must be finite and at least 4");
  if (!(eps_total > 0.0 && eps_total < 1.0)) throw DomainError("eps_total must lie in (0,1)");
  if (config.fraction_grid.empty() || config.m_grid_points < 1) throw DomainError("empty optimization grid");

  const double m_hi = std::floor(signals / 2.0);
  const double m_lo = std::min(config.m_min, m_hi);
  std::vector<double> m_grid;
  for (double m : search::logspace(m_lo, m_hi, static_cast<std::size_t>(config.m_grid_points))) {
    m = std::round(m);
    if (m_grid.empty() || m > m_grid.back()) m_grid.push_back(m);
  }

  RateSurface surface(point, signals, eps_total, config);
  double best_rate = kMinusInf;
  double best_m = m_grid.front();
  BudgetFractions best_f{};
  for (double m : m_grid)
    for (double fb : config.fraction_grid)
      for (double fpe : config.fraction_grid)
        for (double fpa : config.fraction_grid) {
          const BudgetFractions f{fb, fpe, fpa};
          const double r = surface.rate(m, f);
          if (r > best_rate) {
            best_rate = r;
            best_m = m;
            best_f = f;
          }
        }
  if (best_rate == kMinusInf) throw DomainError("no feasible budget split on the grid");

  const double m_ratio = std::max(1.5, m_grid.size() > 1 ? std::pow(m_hi / m_lo, 1.0 / (m_grid.size() - 1)) : 1.5);
  const double floor = config.budget_floor;
  for (int round = 0; round < config.refine_rounds; ++round) {
    const double before = best_rate;
    {
      auto by_m = [&](double m) { return surface.rate(std::round(m), best_f); };
      const auto p = maximize_log(by_m, std::max(m_lo, best_m / m_ratio), std::min(m_hi, best_m * m_ratio),
                                  config.param_rel_tol);
      if (p.value > best_rate) {
        best_rate = p.value;
        best_m = std::round(p.x);
      }
    }
    for (double BudgetFractions::*field : {&BudgetFractions::pe, &BudgetFractions::bar, &BudgetFractions::pa}) {
      const double others = best_f.bar + best_f.pe + best_f.pa - best_f.*field;
      auto by_fraction = [&](double x) {
        BudgetFractions f = best_f;
        f.*field = x;
        return surface.rate(best_m, f);
      };
      const auto p = maximize_log(by_fraction, floor, 1.0 - others - floor, config.param_rel_tol);
      if (p.value > best_rate) {
        best_rate = p.value;
        best_f.*field = p.x;
      }
    }
    if (best_rate - before <= 1e-15) break;
  }
  return surface.breakdown(best_m, best_f);
}

N0Result find_n0(Protocol protocol, double disturbance, double p, double eps_total,
                 const OptimizationConfig& config) {
  if (asymptotic_rate(protocol, disturbance, p, config.rate).rate <= 0.0)
    throw NoKeyError("no positive rate asymptotically");
  const auto point = ChannelPoint::from_disturbance(protocol, disturbance, p);
  auto optimized = [&](double n) { return optimize_rate(point, n, eps_total, config); };

  double lo = config.n_search_lo;
  double hi = config.n_search_hi;
  auto witness = optimized(lo);
  if (witness.rate > 0.0) return {lo, p, witness};
  witness = optimized(hi);
  if (witness.rate <= 0.0) throw NoKeyError("no positive rate for N up to the search bound");

  const double log_resolution = std::log10(1.0 + config.n0_resolution);
  while (std::log10(hi / lo) > log_resolution) {
    const double mid = std::pow(10.0, 0.5 * (std::log10(lo) + std::log10(hi)));
    auto candidate = optimized(mid);
    if (candidate.rate > 0.0) {
      hi = mid;
      witness = std::move(candidate);
    } else {
      lo = mid;
    }
  }
  return {hi, p, witness};
}

std::string_view to_string(NoiseObjective objective) {
  switch (objective) {
    case NoiseObjective::kAsymptotic: return "asymptotic";
    case NoiseObjective::kMinimizeN0: return "minimize-n0";
    case NoiseObjective::kMaximizeRateAtN: return "maximize-rate";
  }
  return "?";
}

NoiseObjective parse_noise_objective(std::string_view text) {
  if (text == "asymptotic" || text == "asym") return NoiseObjective::kAsymptotic;
  if (text == "minimize-n0" || text == "n0") return NoiseObjective::kMinimizeN0;
  if (text == "maximize-rate" || text == "rate") return NoiseObjective::kMaximizeRateAtN;
  throw DomainError("unknown noise objective '" + std::string(text) + "'");
}

NoiseOptimum optimal_noise(Protocol protocol, double disturbance, NoiseObjective objective,
                           double eps_total, double signals, const OptimizationConfig& config) {
  if (!(disturbance >= 0.0 && disturbance < 0.5)) throw DomainError("disturbance must lie in [0, 0.5)");
  if (!(config.noise_step > 0.0) || !(config.noise_max >= 0.0 && config.noise_max < 1.0))
    throw DomainError("invalid noise grid");

  // Objective to minimize, memoized by p: negative rate, or log10 N0.
  std::map<double, double> memo;
  auto objective_at = [&](double p) {
    if (auto it = memo.find(p); it != memo.end()) return it->second;
    double value = std::numeric_limits<double>::infinity();
    try {
      switch (objective) {
        case NoiseObjective::kAsymptotic:
          value = -asymptotic_rate(protocol, disturbance, p, config.rate).rate;
          break;
        case NoiseObjective::kMaximizeRateAtN:
          value = -optimize_rate(ChannelPoint::from_disturbance(protocol, disturbance, p), signals, eps_total, config)
                       .rate;
          break;
        case NoiseObjective::kMinimizeN0:
          value = std::log10(find_n0(protocol, disturbance, p, eps_total, config).n0);
          break;
      }
    } catch (const InfeasibleError&) {
    } catch (const NoKeyError&) {
    }
    memo.emplace(p, value);
    return value;
  };

  std::vector<double> grid;
  const auto steps = static_cast<std::size_t>(std::floor(config.noise_max / config.noise_step + 1e-9));
  for (std::size_t i = 0; i <= steps; ++i) grid.push_back(static_cast<double>(i) * config.noise_step);
  const auto best = search::grid_then_golden_minimize(objective_at, grid, config.noise_tol);

  NoiseOptimum out;
  out.p = best.x;
  switch (objective) {
    case NoiseObjective::kAsymptotic:
      out.witness = asymptotic_rate(protocol, disturbance, best.x, config.rate);
      out.value = out.witness.rate;
      break;
    case NoiseObjective::kMaximizeRateAtN:
      out.witness = optimize_rate(ChannelPoint::from_disturbance(protocol, disturbance, best.x), signals,
                                  eps_total, config);
      out.value = out.witness.rate;
      break;
    case NoiseObjective::kMinimizeN0: {
      if (!std::isfinite(best.value)) throw NoKeyError("no noise parameter yields a finite N0");
      const auto n0 = find_n0(protocol, disturbance, best.x, eps_total, config);
      out.witness = n0.witness;
      out.value = n0.n0;
      break;
    }
  }
  return out;
}

std::vector<double> threshold_noise_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 99; ++i) grid.push_back(i / 100.0);
  for (double p : {0.995, 0.999, 0.9995, 0.9999}) grid.push_back(p);
  return grid;
}

double disturbance_threshold(Protocol protocol, bool with_optimal_noise, const OptimizationConfig& config) {
  const std::vector<double> grid = with_optimal_noise ? threshold_noise_grid() : std::vector<double>{0.0};
  auto positive = [&](double d) {
    for (double p : grid) {
      try {
        if (asymptotic_rate(protocol, d, p, config.rate).rate > 0.0) return true;
      } catch (const InfeasibleError&) {
      }
    }
    return false;
  };
  double lo = 0.0;
  double hi = 0.5;
  while (hi - lo > config.threshold_tol) {
    const double mid = 0.5 * (lo + hi);
    (positive(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace qkdlab
