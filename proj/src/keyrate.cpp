#include "qkdlab/keyrate.hpp"

#include <algorithm>
#include <cmath>

#include "qkdlab/errors.hpp"
#include "qkdlab/search.hpp"

namespace qkdlab {

namespace {

constexpr double kLambdaSlack = 1e-12;

double plogp_sum(std::span<const double> values) {
  double h = 0.0;
  for (double v : values)
    if (v > tolerance::kEntropyCutoff) h -= v * std::log2(v);
  return h;
}

void check_scenario_noise(const RateOptions& options, double p) {
  if (options.scenario == Scenario::kNone && p != 0.0) throw DomainError("scenario S0 requires p = 0");
}

}  // namespace

std::array<double, 4> eve_bell_weights(Protocol protocol, double disturbance, double p,
                                       std::optional<double> lambda4) {
  const double q = qber_from_params(disturbance, p);
  p = std::min(p, kMaxNoise);
  const double d = disturbance;
  if (protocol == Protocol::kSixState) return {1.0 - 1.5 * d, d / 2.0, d / 2.0, d / 2.0};

  if (!lambda4) {
    if (d > 0.0) throw DomainError("BB84 attack needs lambda4");
    lambda4 = q / 2.0;
  }
  if (!(*lambda4 >= 0.0 && *lambda4 <= q)) throw DomainError("lambda4 must lie in [0, Q]");
  // Undo Alice's depolarization: lambda_i = (1-p) mu_i + p/4.
  double mu = (*lambda4 - p / 4.0) / (1.0 - p);
  if (mu < -kLambdaSlack || mu > d + kLambdaSlack) throw InfeasibleError("lambda4 outside feasible range");
  mu = std::clamp(mu, 0.0, d);
  return {1.0 - 2.0 * d + mu, d - mu, d - mu, mu};
}

double bell_diagonal_sxe(const std::array<double, 4>& weights, double flip) {
  // Conditioned on Alice's bit, Eve's state splits into the {Psi+, Psi-} and
  // {Phi+, Phi-} purification blocks; a bit flip damps their coherence by (1-2f).
  const double damp = 1.0 - 2.0 * flip;
  std::array<double, 4> conditional{};
  for (std::size_t blk = 0; blk < 2; ++blk) {
    const double a = weights[2 * blk];
    const double b = weights[2 * blk + 1];
    const double s = a + b;
    const double d = std::sqrt((a - b) * (a - b) + 4.0 * damp * damp * a * b);
    const double big = 0.5 * (s + d);
    const double small = big > 0.0 ? 4.0 * a * b * flip * (1.0 - flip) / big : 0.0;
    conditional[2 * blk] = big;
    conditional[2 * blk + 1] = small;
  }
  return 1.0 + plogp_sum(conditional) - plogp_sum(weights);
}

AttackEntropies attack_entropies(Protocol protocol, double disturbance, double p,
                                 std::optional<double> lambda4, const RateOptions& options) {
  check_scenario_noise(options, p);
  const Scenario scenario = options.scenario;
  AttackEntropies out;

  if (options.route == EntropyRoute::kBellDiagonal) {
    const auto weights = eve_bell_weights(protocol, disturbance, p, lambda4);
    const bool flips_x = scenario == Scenario::kAliceQuantum || scenario == Scenario::kBobBeforeEve ||
                         scenario == Scenario::kClassical;
    out.sxe = bell_diagonal_sxe(weights, flips_x ? std::min(p, kMaxNoise) / 2.0 : 0.0);
    out.qber = qber_from_params(disturbance, p);
    out.hxy = binary_entropy(out.qber);
    return out;
  }

  const auto spec = eve_gram(protocol, disturbance, p, lambda4);
  const auto ccq = scenario == Scenario::kClassical
                       ? classical_flip(measure_ccq(scenario_state(spec, NoiseConfig{})), spec.noise)
                       : measure_ccq(scenario_state(spec, NoiseConfig::make(scenario, p)));
  out.sxe = conditional_vn_entropy(ccq.density(), "X", "E");
  out.hxy = shannon_cond_entropy(ccq.joint_xy());
  out.qber = ccq.qber();
  return out;
}

WorstAttack minimize_over_attack(Protocol protocol, double disturbance, double p,
                                 const RateOptions& options) {
  if (protocol == Protocol::kSixState)
    return {attack_entropies(protocol, disturbance, p, std::nullopt, options), std::nullopt};

  const auto [lo, hi] = bb84_lambda4_range(disturbance, p);
  if (hi - lo <= 0.0) return {attack_entropies(protocol, disturbance, p, lo, options), lo};

  auto sxe_at = [&](double lambda4) {
    return attack_entropies(protocol, disturbance, p, lambda4, options).sxe;
  };
  const auto grid = search::linspace(lo, hi, static_cast<std::size_t>(std::max(options.lambda4_grid, 2)));
  const auto best = search::grid_then_golden_minimize(sxe_at, grid, options.lambda4_tol);
  return {attack_entropies(protocol, disturbance, p, best.x, options), best.x};
}

double zeta(double eps_pe, int n_p, double m) {
  if (!(eps_pe > 0.0 && eps_pe <= 1.0)) throw DomainError("zeta: eps_PE must lie in (0,1]");
  if (n_p < 0) throw DomainError("zeta: n_p must be non-negative");
  if (!(m >= 1.0)) throw DomainError("zeta: m must be at least 1");
  return std::sqrt((std::log(1.0 / eps_pe) + n_p * std::log(m + 1.0)) / (8.0 * m));
}

double aep_penalty(double eps_bar, double n) {
  if (!(eps_bar > 0.0 && eps_bar < 1.0)) throw DomainError("aep_penalty: eps_bar must lie in (0,1)");
  if (!(n >= 1.0)) throw DomainError("aep_penalty: n must be at least 1");
  return 5.0 * std::sqrt(std::log2(2.0 / eps_bar) / n);
}

SecurityBudget SecurityBudget::from_fractions(double total, double f_bar, double f_pe, double f_pa,
                                              double floor) {
  SecurityBudget b;
  b.eps_bar = total * f_bar;
  b.eps_pe = total * f_pe;
  b.eps_pa = total * f_pa;
  b.eps_ec = total - (b.eps_bar + b.eps_pe + b.eps_pa);
  b.validate(floor);
  return b;
}

SecurityBudget SecurityBudget::even(double total) {
  return from_fractions(total, 0.25, 0.25, 0.25);
}

void SecurityBudget::validate(double floor) const {
  const double t = total();
  if (!(t > 0.0 && t < 1.0)) throw DomainError("security budget total must lie in (0,1)");
  const double minimum = floor * t * (1.0 - 1e-9);
  for (double c : {eps_bar, eps_pe, eps_ec, eps_pa})
    if (!(c > 0.0 && c < 1.0) || c < minimum)
      throw DomainError("security budget component below floor or outside (0,1)");
}

void FiniteSizeParams::validate() const {
  if (!std::isfinite(signals)) throw DomainError("N must be finite");
  if (!(estimation >= 1.0 && estimation <= signals - 1.0)) throw DomainError("m must lie in [1, N-1]");
  if (!(sifting > 0.0 && sifting <= 1.0)) throw DomainError("sifting factor must lie in (0,1]");
  if (!(key_signals() >= 1.0)) throw DomainError("no key-generation signals left");
}

ChannelPoint ChannelPoint::from_disturbance(Protocol protocol, double disturbance, double p) {
  qber_from_params(disturbance, p);  // domain checks
  return {protocol, disturbance, std::min(p, kMaxNoise), false};
}

ChannelPoint ChannelPoint::from_qber(Protocol protocol, double qber, double p) {
  const auto estimate = disturbance_from_qber(qber, p);
  return {protocol, estimate.disturbance, std::min(p, kMaxNoise), estimate.clamped};
}

RateBreakdown asymptotic_rate(Protocol protocol, double disturbance, double p, const RateOptions& options) {
  const auto attack = minimize_over_attack(protocol, disturbance, p, options);
  RateBreakdown out;
  out.protocol = protocol;
  out.scenario = options.scenario;
  out.disturbance = disturbance;
  out.noise = std::min(p, kMaxNoise);
  out.qber = qber_from_params(disturbance, p);
  out.f_ec = options.f_ec;
  out.sxe = attack.entropies.sxe;
  out.hxy = attack.entropies.hxy;
  out.worst_qber = out.qber;
  out.argmin_lambda4 = attack.lambda4;
  out.rate = out.recompute_rate();
  return out;
}

ConfidenceWorstCase worst_case_over_confidence(const ChannelPoint& point, double zeta_value,
                                               const RateOptions& options) {
  const double q = point.qber();
  const double lo = std::max(0.0, q - zeta_value);
  const double hi = std::min(0.5, q + zeta_value);
  const double observed_leak = binary_entropy(q);
  const auto candidates = options.qber_scan_points > 1 && hi > lo
                              ? search::linspace(lo, hi, static_cast<std::size_t>(options.qber_scan_points))
                              : std::vector<double>{hi};

  ConfidenceWorstCase worst;
  bool first = true;
  for (double q_prime : candidates) {
    const double d_prime = disturbance_from_qber(q_prime, point.noise).disturbance;
    auto attack = minimize_over_attack(point.protocol, d_prime, point.noise, options);
    if (options.leak_at_observed) attack.entropies.hxy = observed_leak;
    const double value = attack.entropies.sxe - options.f_ec * attack.entropies.hxy;
    if (first || value < worst.objective) {
      worst = {value, attack, q_prime};
      first = false;
    }
  }
  return worst;
}

RateBreakdown assemble_finite_rate(const ChannelPoint& point, const FiniteSizeParams& size,
                                   const SecurityBudget& budget, double zeta_value,
                                   const ConfidenceWorstCase& worst, const RateOptions& options) {
  RateBreakdown out;
  out.protocol = point.protocol;
  out.scenario = options.scenario;
  out.disturbance = point.disturbance;
  out.noise = point.noise;
  out.qber = point.qber();
  out.asymptotic = false;
  out.signals = size.signals;
  out.estimation = size.estimation;
  out.key_signals = size.key_signals();
  out.budget = budget;
  out.f_ec = options.f_ec;
  out.sxe = worst.attack.entropies.sxe;
  out.hxy = worst.attack.entropies.hxy;
  out.zeta = zeta_value;
  out.aep_penalty = aep_penalty(budget.eps_bar, out.key_signals);
  out.pa_correction = 2.0 / size.signals * std::log2(2.0 * budget.eps_pa);
  out.worst_qber = worst.worst_qber;
  out.argmin_lambda4 = worst.attack.lambda4;
  out.rate = out.recompute_rate();
  return out;
}

RateBreakdown finite_rate(const ChannelPoint& point, const FiniteSizeParams& size,
                          const SecurityBudget& budget, const RateOptions& options) {
  size.validate();
  budget.validate();
  check_scenario_noise(options, point.noise);
  const double z = zeta(budget.eps_pe, options.n_p, size.estimation);
  return assemble_finite_rate(point, size, budget, z, worst_case_over_confidence(point, z, options), options);
}

}  // namespace qkdlab
