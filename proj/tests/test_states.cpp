#include <cmath>

#include "doctest.h"
#include "qkdlab/errors.hpp"
#include "qkdlab/states.hpp"

using namespace qkdlab;
using doctest::Approx;

TEST_CASE("parsing and names") {
  CHECK(parse_protocol("bb84") == Protocol::kBb84);
  CHECK(parse_protocol("six-state") == Protocol::kSixState);
  CHECK(to_string(Protocol::kSixState) == "six-state");
  CHECK(parse_scenario("S3") == Scenario::kBobAfterEve);
  CHECK(parse_scenario("4") == Scenario::kClassical);
  CHECK(to_string(Scenario::kNone) == "S0");
  CHECK_THROWS_AS(parse_protocol("b92"), DomainError);
  CHECK_THROWS_AS(parse_scenario("S7"), DomainError);
  CHECK_THROWS_AS(NoiseConfig::make(Scenario::kNone, 0.1), DomainError);
}

TEST_CASE("QBER relation and its inverse") {
  CHECK(qber_from_params(0.1, 0.2) == Approx(0.18));
  const auto est = disturbance_from_qber(0.18, 0.2);
  CHECK(est.disturbance == Approx(0.1));
  CHECK_FALSE(est.clamped);
  const auto low = disturbance_from_qber(0.01, 0.1);
  CHECK(low.disturbance == 0.0);
  CHECK(low.clamped);
  CHECK_THROWS_AS(qber_from_params(0.6, 0.0), DomainError);
  CHECK_THROWS_AS(qber_from_params(0.1, 1.5), DomainError);
  CHECK_THROWS_AS(disturbance_from_qber(0.7, 0.0), DomainError);
}

TEST_CASE("BB84 lambda4 range") {
  const auto [lo, hi] = bb84_lambda4_range(0.1, 0.2);
  CHECK(lo == Approx(0.05));
  CHECK(hi == Approx(0.18 - 0.05));
  const auto [lo0, hi0] = bb84_lambda4_range(0.1, 0.0);
  CHECK(lo0 == 0.0);
  CHECK(hi0 == Approx(0.1));
}

TEST_CASE("depolarizing channel") {
  const auto psi = bell_state(BellState::kPsiPlus);
  CHECK(psi.purity() == Approx(1.0));
  const auto full = depolarize(psi, "A", 1.0);
  CHECK(full.matrix().max_abs_diff(ComplexMatrix::identity(4) * Complex(0.25)) < 1e-15);
  const auto none = depolarize(psi, "B", 0.0);
  CHECK(none.matrix().max_abs_diff(psi.matrix()) < 1e-15);
  // Depolarizing either half of a Bell state gives the same state.
  CHECK(depolarize(psi, "A", 0.3).matrix().max_abs_diff(depolarize(psi, "B", 0.3).matrix()) < 1e-15);
  CHECK_THROWS_AS(depolarize(psi, "A", 1.2), DomainError);
}

TEST_CASE("Bell states are orthonormal") {
  const BellState all[4] = {BellState::kPsiPlus, BellState::kPsiMinus, BellState::kPhiPlus, BellState::kPhiMinus};
  for (auto a : all)
    for (auto b : all) {
      const auto va = bell_vector(a), vb = bell_vector(b);
      Complex dot = 0.0;
      for (int i = 0; i < 4; ++i) dot += std::conj(va[i]) * vb[i];
      CHECK(std::abs(dot - Complex(a == b ? 1.0 : 0.0)) < 1e-15);
    }
}

TEST_CASE("six-state Gram matrix") {
  const double d = 0.1;
  const auto spec = eve_gram(Protocol::kSixState, d, 0.0);
  CHECK(spec.gram(0, 2).real() == Approx((1 - 2 * d) / (1 - d)));
  CHECK(std::abs(spec.gram(0, 1)) == 0.0);
  CHECK(std::abs(spec.gram(1, 3)) == 0.0);
  for (int i = 0; i < 4; ++i) CHECK(spec.gram(i, i).real() == Approx(1.0));
  // The overlap does not depend on the noise.
  CHECK(eve_gram(Protocol::kSixState, d, 0.3).gram(0, 2).real() == Approx((1 - 2 * d) / (1 - d)));
}

TEST_CASE("BB84 Gram matrix and infeasible attacks") {
  const double d = 0.1, p = 0.2, l4 = 0.07;
  const double q = qber_from_params(d, p);
  const auto spec = eve_gram(Protocol::kBb84, d, p, l4);
  CHECK(spec.gram(0, 2).real() == Approx((1 - 3 * q + 2 * l4) / ((1 - p) * (1 - d))));
  CHECK(spec.gram(1, 3).real() == Approx((q - 2 * l4) / ((1 - p) * d)));
  CHECK_THROWS_AS(eve_gram(Protocol::kBb84, d, p, 0.0), InfeasibleError);
}

TEST_CASE("probes reproduce the Gram matrix") {
  const auto spec = eve_gram(Protocol::kBb84, 0.08, 0.1, 0.05);
  for (auto method : {GramFactorization::kEigen, GramFactorization::kCholesky}) {
    const auto probes = probes_from_gram(spec, method, {2, 0, 3, 1});
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        Complex dot = 0.0;
        for (int k = 0; k < 4; ++k) dot += std::conj(probes[i][k]) * probes[j][k];
        CHECK(std::abs(dot - spec.gram(i, j)) < 1e-12);
      }
  }
}

TEST_CASE("scenario states reproduce the QBER") {
  for (auto protocol : {Protocol::kBb84, Protocol::kSixState})
    for (auto sc : {Scenario::kAliceQuantum, Scenario::kBobBeforeEve, Scenario::kBobAfterEve}) {
      const double d = 0.07, p = 0.15;
      const auto [lo, hi] = bb84_lambda4_range(d, p);
      const auto spec = eve_gram(protocol, d, p, protocol == Protocol::kBb84 ? std::optional(0.5 * (lo + hi))
                                                                            : std::nullopt);
      const auto ccq = measure_ccq(scenario_state(spec, NoiseConfig::make(sc, p)));
      CHECK(ccq.qber() == Approx(qber_from_params(d, p)).epsilon(1e-12));
    }
  const auto spec = eve_gram(Protocol::kSixState, 0.07, 0.15);
  CHECK(measure_ccq(scenario_state(spec, NoiseConfig{})).qber() == Approx(0.07));
  CHECK_THROWS_AS(scenario_state(spec, NoiseConfig::make(Scenario::kAliceQuantum, 0.2)), DomainError);
  CHECK_THROWS(scenario_state(spec, NoiseConfig::make(Scenario::kClassical, 0.15)));
}

TEST_CASE("classical flip raises the QBER by the flip probability") {
  const auto spec = eve_gram(Protocol::kSixState, 0.1, 0.2);
  const auto s0 = measure_ccq(scenario_state(spec, NoiseConfig{}));
  const auto flipped = classical_flip(s0, 0.2);
  CHECK(flipped.qber() == Approx(qber_from_params(0.1, 0.2)).epsilon(1e-12));
}

TEST_CASE("six-state Bell coefficients") {
  const double d = 0.12;
  const auto rho_ab = partial_trace(eve_state(eve_gram(Protocol::kSixState, d, 0.0)), {"A", "B"});
  const auto bell = bell_coefficients(rho_ab);
  CHECK(bell.max_off_diagonal < 1e-12);
  CHECK(bell.weights[0] == Approx(1 - 1.5 * d));
  for (int i = 1; i < 4; ++i) CHECK(bell.weights[i] == Approx(d / 2));
}
