#pragma once

// Noise channels, Eve's probe-constrained interaction and the scenario
// states for entanglement-based BB84 and six-state QKD.
//
// Subsystems: A (Alice, qubit), B (Bob, qubit), E (Eve, 4-dim probe space).
// After measurement: X (Alice's bit), Y (Bob's bit), E.

#include <array>
#include <optional>
#include <string_view>
#include <utility>

#include "qkdlab/numeric.hpp"

namespace qkdlab {

enum class Protocol { kBb84, kSixState };

enum class Scenario {
  kNone = 0,          // S0: no added noise
  kAliceQuantum = 1,  // S1: depolarize A
  kBobBeforeEve = 2,  // S2: depolarize B before Eve's interaction
  kBobAfterEve = 3,   // S3: depolarize B after Eve's interaction
  kClassical = 4,     // S4: flip Alice's measured bit
};

std::string_view to_string(Protocol protocol);
std::string_view to_string(Scenario scenario);
Protocol parse_protocol(std::string_view text);
Scenario parse_scenario(std::string_view text);

// Largest noise parameter accepted anywhere; p = 1 makes Eve's constraints singular.
inline constexpr double kMaxNoise = 1.0 - 1e-9;

struct NoiseConfig {
  Scenario scenario = Scenario::kNone;
  double p = 0.0;

  // Validates p in [0,1) and p == 0 for S0; caps p at kMaxNoise.
  static NoiseConfig make(Scenario scenario, double p);
};

enum class BellState { kPsiPlus, kPsiMinus, kPhiPlus, kPhiMinus };

std::array<Complex, 4> bell_vector(BellState which);
DensityOperator bell_state(BellState which);

ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();

// sum_k K rho K^dagger with each K acting on `target` only.
DensityOperator apply_local_kraus(const DensityOperator& rho, std::string_view target,
                                  std::span<const ComplexMatrix> kraus);
// Kraus set {sqrt(1-3p/4) 1, sqrt(p/4) sx, sqrt(p/4) sy, sqrt(p/4) sz} on a qubit.
DensityOperator depolarize(const DensityOperator& rho, std::string_view target, double p);

// Classical-classical-quantum state with labels X:2, Y:2, E:4.
class CcqState {
 public:
  explicit CcqState(DensityOperator density);

  const DensityOperator& density() const { return density_; }
  DensityOperator xe() const { return partial_trace(density_, {"X", "E"}); }
  DensityOperator xy() const { return partial_trace(density_, {"X", "Y"}); }
  JointDistribution joint_xy() const;
  // Prob[X != Y]
  double qber() const;

 private:
  DensityOperator density_;
};

// Flips X with probability p/2 (Kraus sqrt(1-p/2) 1, sqrt(p/2) sx).
CcqState classical_flip(const CcqState& ccq, double p);

double qber_from_params(double disturbance, double p);

struct DisturbanceEstimate {
  double disturbance = 0.0;
  bool clamped = false;  // observed QBER was below the channel floor p/2
};
DisturbanceEstimate disturbance_from_qber(double qber, double p);

// Feasible range of the BB84 Bell coefficient lambda4 at (D, p):
// [p/4, Q - p/4], a sub-interval of [0, Q].
std::pair<double, double> bb84_lambda4_range(double disturbance, double p);

struct AttackSpec {
  Protocol protocol = Protocol::kSixState;
  double disturbance = 0.0;
  double noise = 0.0;
  std::optional<double> lambda4;
  ComplexMatrix gram;  // <probe_i|probe_j>, probes ordered A, B, C, D

  double qber() const { return qber_from_params(disturbance, noise); }
};

// Gram matrix of Eve's probes satisfying the protocol's symmetry
// constraints. Throws InfeasibleError when no probes exist.
AttackSpec eve_gram(Protocol protocol, double disturbance, double p,
                    std::optional<double> lambda4 = std::nullopt);

enum class GramFactorization { kEigen, kCholesky };

using Probe = std::array<Complex, 4>;
using ProbeSet = std::array<Probe, 4>;

// Four vectors whose Gram matrix reproduces spec.gram. `order` selects the
// sequence in which the Cholesky factorization visits the probes.
ProbeSet probes_from_gram(const AttackSpec& spec,
                          GramFactorization method = GramFactorization::kEigen,
                          std::array<int, 4> order = {0, 1, 2, 3});

// (1 ⊗ U_BE) applied to a two-qubit state rho_AB; result labels A, B, E.
DensityOperator apply_eve(const DensityOperator& rho_ab, const ProbeSet& probes, double disturbance);

DensityOperator eve_state(const AttackSpec& spec,
                          GramFactorization method = GramFactorization::kEigen);

// S0..S3. Noise parameter must match the one the Gram was built for (except S0).
DensityOperator scenario_state(const AttackSpec& spec, const NoiseConfig& noise,
                               GramFactorization method = GramFactorization::kEigen);

// Z-basis measurement of A and B; Bob's outcome is flipped so that Psi+
// yields X = Y.
CcqState measure_ccq(const DensityOperator& rho_abe);

struct BellCoefficients {
  std::array<double, 4> weights{};  // Psi+, Psi-, Phi+, Phi-
  double max_off_diagonal = 0.0;
};
BellCoefficients bell_coefficients(const DensityOperator& rho_ab);

}  // namespace qkdlab
