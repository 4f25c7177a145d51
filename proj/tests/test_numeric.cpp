#include <cmath>

#include "doctest.h"
#include "qkdlab/errors.hpp"
#include "qkdlab/numeric.hpp"

using namespace qkdlab;
using doctest::Approx;

namespace {

ComplexMatrix from_rows(std::size_t n, std::initializer_list<Complex> values) {
  return ComplexMatrix(n, std::vector<Complex>(values));
}

// Deterministic 8x8 Hermitian fixture.
ComplexMatrix fixture8() {
  ComplexMatrix m(8);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = i; j < 8; ++j) {
      const double re = std::sin(1.0 + 3.0 * i + 7.0 * j);
      const double im = i == j ? 0.0 : std::cos(2.0 + 5.0 * i - j);
      m(i, j) = {re, im};
      m(j, i) = {re, -im};
    }
  return m;
}

DensityOperator qubit(double p0) {
  const double d[2] = {p0, 1.0 - p0};
  return DensityOperator(ComplexMatrix::diagonal(d), {2}, {"A"});
}

double h2(double a, double b) {
  double s = 0.0;
  for (double v : {a, b})
    if (v > 0) s -= v * std::log2(v);
  return s;
}

// Eigenvalues of a 2x2 Hermitian matrix.
std::pair<double, double> eig2(const ComplexMatrix& m) {
  const double a = m(0, 0).real(), d = m(1, 1).real();
  const double r = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(m(0, 1)));
  return {0.5 * (a + d) - r, 0.5 * (a + d) + r};
}

}  // namespace

TEST_CASE("tensor product matches the hand-written Kronecker product") {
  const auto a = from_rows(2, {1.0, Complex(0, 2), 3.0, 4.0});
  const auto b = from_rows(2, {5.0, 6.0, 7.0, Complex(0, -1)});
  const auto k = tensor_product(a, b);
  const ComplexMatrix expected = from_rows(4, {
      5.0, 6.0, Complex(0, 10), Complex(0, 12),
      7.0, Complex(0, -1), Complex(0, 14), 2.0,
      15.0, 18.0, 20.0, 24.0,
      21.0, Complex(0, -3), 28.0, Complex(0, -4)});
  CHECK(k.max_abs_diff(expected) == 0.0);
}

TEST_CASE("matrix basics") {
  const auto a = from_rows(2, {1.0, Complex(2, 1), 3.0, 4.0});
  CHECK(a.trace() == Complex(5.0));
  CHECK(a.adjoint()(0, 1) == Complex(3.0));
  CHECK(a.adjoint()(1, 0) == Complex(2, -1));
  CHECK((a * ComplexMatrix::identity(2)).max_abs_diff(a) == 0.0);
  CHECK(a.hermiticity_defect() == Approx(std::abs(Complex(2, 1) - 3.0)));
  CHECK_THROWS_AS(a * ComplexMatrix::identity(3), DomainError);
}

TEST_CASE("Jacobi eigensolver on an 8x8 fixture") {
  const auto m = fixture8();
  const auto es = hermitian_eigensystem(m);
  REQUIRE(es.values.size() == 8);
  double sum = 0.0, sum_sq = 0.0;
  for (double v : es.values) {
    sum += v;
    sum_sq += v * v;
  }
  CHECK(sum == Approx(m.trace().real()).epsilon(1e-12));
  CHECK(sum_sq == Approx((m * m).trace().real()).epsilon(1e-12));
  for (std::size_t i = 1; i < 8; ++i) CHECK(es.values[i - 1] <= es.values[i]);

  // V diag V^dagger reconstructs M and V is unitary.
  const auto v = es.vectors;
  const auto rebuilt = v * ComplexMatrix::diagonal(es.values) * v.adjoint();
  CHECK(rebuilt.max_abs_diff(m) < 1e-12);
  CHECK((v.adjoint() * v).max_abs_diff(ComplexMatrix::identity(8)) < 1e-12);

  // Sign changes of det(M - x) bracket every eigenvalue: count below 0.
  int negative = 0;
  for (double x : es.values) negative += x < 0.0;
  CHECK(negative > 0);
  CHECK(negative < 8);
}

TEST_CASE("2x2 eigenvalues agree with the closed form") {
  const auto m = from_rows(2, {0.3, Complex(0.1, -0.2), Complex(0.1, 0.2), -0.7});
  const auto [lo, hi] = eig2(m);
  const auto values = hermitian_eigenvalues(m);
  CHECK(values[0] == Approx(lo).epsilon(1e-14));
  CHECK(values[1] == Approx(hi).epsilon(1e-14));
  CHECK_THROWS_AS(hermitian_eigenvalues(from_rows(2, {1.0, 1.0, 0.0, 1.0})), DomainError);
}

TEST_CASE("density operator validation") {
  CHECK_NOTHROW(qubit(0.3));
  const double bad_trace[2] = {0.5, 0.6};
  CHECK_THROWS_AS(DensityOperator(ComplexMatrix::diagonal(bad_trace), {2}, {"A"}), DomainError);
  const double negative[2] = {1.2, -0.2};
  CHECK_THROWS_AS(DensityOperator(ComplexMatrix::diagonal(negative), {2}, {"A"}), DomainError);
  CHECK_THROWS_AS(DensityOperator(from_rows(2, {0.5, 0.1, 0.2, 0.5}), {2}, {"A"}), DomainError);
  CHECK_THROWS_AS(DensityOperator(ComplexMatrix::identity(2) * Complex(0.5), {3}, {"A"}), DomainError);
  CHECK(qubit(0.5).purity() == Approx(0.5));
}

TEST_CASE("partial trace of a product and of a Bell state") {
  const auto a = qubit(0.2);
  const auto b = DensityOperator(from_rows(2, {0.6, Complex(0.1, 0.2), Complex(0.1, -0.2), 0.4}), {2}, {"B"});
  const DensityOperator ab(tensor_product(a.matrix(), b.matrix()), {2, 2}, {"A", "B"});
  CHECK(partial_trace(ab, {"A"}).matrix().max_abs_diff(a.matrix()) < 1e-15);
  CHECK(partial_trace(ab, {"B"}).matrix().max_abs_diff(b.matrix()) < 1e-15);
  CHECK(partial_trace(ab, {"B", "A"}).labels() == std::vector<std::string>{"A", "B"});

  const Complex s = 1.0 / std::sqrt(2.0);
  const Complex bell[4] = {s, 0.0, 0.0, s};
  const DensityOperator phi(ComplexMatrix::projector(bell), {2, 2}, {"A", "B"});
  CHECK(partial_trace(phi, {"A"}).matrix().max_abs_diff(ComplexMatrix::identity(2) * Complex(0.5)) < 1e-15);
  CHECK_THROWS_AS(partial_trace(phi, {"E"}), DomainError);
}

TEST_CASE("von Neumann and conditional entropies") {
  const Complex s = 1.0 / std::sqrt(2.0);
  const Complex bell[4] = {s, 0.0, 0.0, s};
  const DensityOperator phi(ComplexMatrix::projector(bell), {2, 2}, {"A", "B"});
  CHECK(von_neumann_entropy(phi) == Approx(0.0).epsilon(1e-12));
  CHECK(conditional_vn_entropy(phi, "A", "B") == Approx(-1.0).epsilon(1e-12));
  const DensityOperator mixed(ComplexMatrix::identity(4) * Complex(0.25), {2, 2}, {"A", "B"});
  CHECK(von_neumann_entropy(mixed) == Approx(2.0).epsilon(1e-14));

  // cq state sum_x p_x |x><x| (x) rho_x: S(X|E) = H(X) + sum p_x S(rho_x) - S(rho_E).
  const double px = 0.3;
  const auto r0 = from_rows(2, {0.9, 0.2, 0.2, 0.1});
  const auto r1 = from_rows(2, {0.5, Complex(0, 0.3), Complex(0, -0.3), 0.5});
  ComplexMatrix cq(4);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      cq(i, j) = px * r0(i, j);
      cq(2 + i, 2 + j) = (1.0 - px) * r1(i, j);
    }
  const DensityOperator xe(cq, {2, 2}, {"X", "E"});
  auto entropy2 = [](const ComplexMatrix& m) {
    const auto [a, b] = eig2(m);
    return h2(a, b);
  };
  const double expected =
      h2(px, 1 - px) + px * entropy2(r0) + (1 - px) * entropy2(r1) - entropy2(r0 * Complex(px) + r1 * Complex(1 - px));
  CHECK(conditional_vn_entropy(xe, "X", "E") == Approx(expected).epsilon(1e-12));
}

TEST_CASE("spectrum entropy clamps round-off only") {
  const double tiny[3] = {-5e-11, 0.5, 0.5};
  CHECK(spectrum_entropy(tiny) == Approx(1.0));
  const double bad[2] = {-1e-6, 1.0};
  CHECK_THROWS_AS(spectrum_entropy(bad), DomainError);
}

TEST_CASE("Shannon quantities") {
  CHECK(binary_entropy(0.5) == 1.0);
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.11) == Approx(-0.11 * std::log2(0.11) - 0.89 * std::log2(0.89)));
  CHECK_THROWS_AS(binary_entropy(1.1), DomainError);
  CHECK_THROWS_AS(binary_entropy(-0.1), DomainError);

  const JointDistribution joint(2, 2, {0.45, 0.05, 0.05, 0.45});
  CHECK(shannon_cond_entropy(joint) == Approx(binary_entropy(0.1)).epsilon(1e-14));
  CHECK(joint.marginal_y().weights()[0] == Approx(0.5));
  CHECK_THROWS_AS(JointDistribution(2, 2, {0.5, 0.5, 0.5, 0.5}), DomainError);
  CHECK_THROWS_AS(ProbabilityVector({0.5, 0.6, -0.1}), DomainError);
}

TEST_CASE("trace distance") {
  CHECK(trace_distance(qubit(1.0), qubit(0.0)) == Approx(1.0));
  CHECK(trace_distance(qubit(0.3), qubit(0.3)) == Approx(0.0));
  CHECK(trace_distance(qubit(0.7), qubit(0.4)) == Approx(0.3));
}
