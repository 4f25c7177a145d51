#pragma once

// Asymptotic and finite epsilon-secure key rates under collective attacks.
//
//   r_asym = S(X|E) - f_EC H(X|Y)
//   r      = (n/N) min_{Q' in [Q-zeta, Q+zeta]} [S(X|E) - AEP - f_EC H(X|Y)]
//            + (2/N) log2(2 eps_PA)
//
// Eve's free parameter (BB84: lambda4) is minimized inside every evaluation.

#include <array>
#include <limits>
#include <optional>

#include "qkdlab/states.hpp"

namespace qkdlab {

// How S(X|E) and H(X|Y) are obtained for an attack.
enum class EntropyRoute {
  // Closed form for the Bell-diagonal state Eve purifies (fast).
  kBellDiagonal,
  // Full state construction, measurement and von Neumann entropies.
  kDensityMatrix,
};

struct RateOptions {
  EntropyRoute route = EntropyRoute::kBellDiagonal;
  Scenario scenario = Scenario::kAliceQuantum;
  double f_ec = 1.0;
  int n_p = 2;
  // Evaluate the leakage at the observed QBER instead of inside the
  // parameter-estimation minimization.
  bool leak_at_observed = false;
  int lambda4_grid = 41;
  double lambda4_tol = 1e-6;
  // Points scanned over the QBER confidence interval; 1 evaluates the upper
  // edge only, where S(X|E) - f_EC H(X|Y) is smallest.
  int qber_scan_points = 1;
};

struct AttackEntropies {
  double sxe = 0.0;
  double hxy = 0.0;
  double qber = 0.0;
};

// Bell weights (Psi+, Psi-, Phi+, Phi-) of the noiseless state that Eve
// purifies, for the attack producing (D, p, lambda4).
std::array<double, 4> eve_bell_weights(Protocol protocol, double disturbance, double p,
                                       std::optional<double> lambda4);

// S(X|E) when Eve purifies a Bell-diagonal state with `weights` and Alice's
// Z-basis bit is flipped with probability `flip`.
double bell_diagonal_sxe(const std::array<double, 4>& weights, double flip);

AttackEntropies attack_entropies(Protocol protocol, double disturbance, double p,
                                 std::optional<double> lambda4, const RateOptions& options = {});

struct WorstAttack {
  AttackEntropies entropies;
  std::optional<double> lambda4;
};

// Minimizes S(X|E) over Eve's free parameter (H(X|Y) does not depend on it).
WorstAttack minimize_over_attack(Protocol protocol, double disturbance, double p,
                                 const RateOptions& options = {});

// sqrt[(ln(1/eps_PE) + n_p ln(m+1)) / (8m)]
double zeta(double eps_pe, int n_p, double m);
// 5 sqrt(log2(2/eps_bar) / n)
double aep_penalty(double eps_bar, double n);

inline constexpr double kBudgetFloor = 1e-3;

struct SecurityBudget {
  double eps_bar = 0.0;
  double eps_pe = 0.0;
  double eps_ec = 0.0;
  double eps_pa = 0.0;

  double total() const { return eps_bar + eps_pe + eps_ec + eps_pa; }

  // eps_EC receives the remainder so the components sum to `total`.
  static SecurityBudget from_fractions(double total, double f_bar, double f_pe, double f_pa,
                                       double floor = kBudgetFloor);
  static SecurityBudget even(double total);
  // Throws unless every component lies in (0,1) and >= floor * total.
  void validate(double floor = kBudgetFloor) const;
};

struct FiniteSizeParams {
  double signals = 0.0;     // N
  double estimation = 0.0;  // m
  double sifting = 1.0;

  double key_signals() const { return sifting * (signals - estimation); }  // n
  void validate() const;
};

// A channel operating point: Eve's disturbance and the added/channel noise.
struct ChannelPoint {
  Protocol protocol = Protocol::kSixState;
  double disturbance = 0.0;
  double noise = 0.0;
  bool clamped = false;

  static ChannelPoint from_disturbance(Protocol protocol, double disturbance, double p);
  // Observed QBER; D = (Q - p/2)/(1 - p), clamped to 0 below the floor.
  static ChannelPoint from_qber(Protocol protocol, double qber, double p);
  double qber() const { return qber_from_params(disturbance, noise); }
};

struct RateBreakdown {
  Protocol protocol = Protocol::kSixState;
  Scenario scenario = Scenario::kAliceQuantum;
  double disturbance = 0.0;
  double noise = 0.0;
  double qber = 0.0;
  bool asymptotic = true;
  double signals = std::numeric_limits<double>::infinity();
  double estimation = 0.0;
  double key_signals = std::numeric_limits<double>::infinity();
  SecurityBudget budget;
  double f_ec = 1.0;

  double sxe = 0.0;
  double hxy = 0.0;
  double zeta = 0.0;
  double aep_penalty = 0.0;
  double pa_correction = 0.0;
  double rate = 0.0;
  double worst_qber = 0.0;
  std::optional<double> argmin_lambda4;

  double key_fraction() const { return asymptotic ? 1.0 : key_signals / signals; }
  double recompute_rate() const {
    return key_fraction() * (sxe - aep_penalty - f_ec * hxy) + pa_correction;
  }
};

RateBreakdown asymptotic_rate(Protocol protocol, double disturbance, double p,
                              const RateOptions& options = {});

// Minimum of S(X|E) - f_EC H(X|Y) over the QBER confidence interval.
struct ConfidenceWorstCase {
  double objective = 0.0;
  WorstAttack attack;
  double worst_qber = 0.0;
};
ConfidenceWorstCase worst_case_over_confidence(const ChannelPoint& point, double zeta_value,
                                               const RateOptions& options = {});

// Combines a precomputed worst case with the finite-size corrections.
RateBreakdown assemble_finite_rate(const ChannelPoint& point, const FiniteSizeParams& size,
                                   const SecurityBudget& budget, double zeta_value,
                                   const ConfidenceWorstCase& worst, const RateOptions& options = {});

RateBreakdown finite_rate(const ChannelPoint& point, const FiniteSizeParams& size,
                          const SecurityBudget& budget, const RateOptions& options = {});

}  // namespace qkdlab
