#include "qkdlab/states.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "qkdlab/errors.hpp"

namespace qkdlab {

namespace {

constexpr double kGramSlack = 1e-12;
constexpr double kGramPsd = -1e-10;
constexpr double kNoiseMatch = 1e-15;

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return out;
}

void check_unit_interval(double value, std::string_view what) {
  if (!(value >= 0.0 && value <= 1.0))
    throw DomainError(std::string(what) + " must lie in [0,1]");
}

void check_disturbance(double d) {
  if (!(d >= 0.0 && d <= 0.5)) throw DomainError("disturbance must lie in [0, 0.5]");
}

double check_noise(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("noise parameter must lie in [0, 1)");
  return std::min(p, kMaxNoise);
}

// Clamps a Gram entry that overshoots +-1 by rounding only.
double gram_entry(double value, std::string_view name) {
  if (!std::isfinite(value) || std::abs(value) > 1.0 + kGramSlack)
    throw InfeasibleError(std::string(name) + " = " + std::to_string(value));
  return std::clamp(value, -1.0, 1.0);
}

}  // namespace

std::string_view to_string(Protocol protocol) {
  return protocol == Protocol::kBb84 ? "bb84" : "six-state";
}

std::string_view to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::kNone: return "S0";
    case Scenario::kAliceQuantum: return "S1";
    case Scenario::kBobBeforeEve: return "S2";
    case Scenario::kBobAfterEve: return "S3";
    case Scenario::kClassical: return "S4";
  }
  return "S?";
}

Protocol parse_protocol(std::string_view text) {
  const auto key = lower(text);
  if (key == "bb84") return Protocol::kBb84;
  if (key == "six-state" || key == "six_state" || key == "sixstate" || key == "six")
    return Protocol::kSixState;
  throw DomainError("unknown protocol '" + std::string(text) + "'");
}

Scenario parse_scenario(std::string_view text) {
  auto key = lower(text);
  if (!key.empty() && key.front() == 's') key.erase(0, 1);
  if (key.size() == 1 && key[0] >= '0' && key[0] <= '4') return static_cast<Scenario>(key[0] - '0');
  throw DomainError("unknown scenario '" + std::string(text) + "'");
}

NoiseConfig NoiseConfig::make(Scenario scenario, double p) {
  p = check_noise(p);
  if (scenario == Scenario::kNone && p != 0.0) throw DomainError("scenario S0 requires p = 0");
  return NoiseConfig{scenario, p};
}

std::array<Complex, 4> bell_vector(BellState which) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (which) {
    case BellState::kPsiPlus: return {0.0, r, r, 0.0};
    case BellState::kPsiMinus: return {0.0, r, -r, 0.0};
    case BellState::kPhiPlus: return {r, 0.0, 0.0, r};
    case BellState::kPhiMinus: return {r, 0.0, 0.0, -r};
  }
  return {};
}

DensityOperator bell_state(BellState which) {
  const auto v = bell_vector(which);
  return DensityOperator(ComplexMatrix::projector(v), {2, 2}, {"A", "B"});
}

ComplexMatrix pauli_x() { return ComplexMatrix(2, {0.0, 1.0, 1.0, 0.0}); }
ComplexMatrix pauli_y() { return ComplexMatrix(2, {0.0, Complex(0, -1), Complex(0, 1), 0.0}); }
ComplexMatrix pauli_z() { return ComplexMatrix(2, {1.0, 0.0, 0.0, -1.0}); }

DensityOperator apply_local_kraus(const DensityOperator& rho, std::string_view target,
                                  std::span<const ComplexMatrix> kraus) {
  const std::size_t pos = rho.position(target);
  std::size_t before = 1;
  std::size_t after = 1;
  for (std::size_t s = 0; s < rho.dims().size(); ++s) {
    if (s < pos) before *= rho.dims()[s];
    if (s > pos) after *= rho.dims()[s];
  }
  ComplexMatrix out(rho.dim());
  for (const auto& k : kraus) {
    if (k.dim() != rho.dims()[pos]) throw DomainError("Kraus operator does not match subsystem");
    const auto full = tensor_product(tensor_product(ComplexMatrix::identity(before), k),
                                     ComplexMatrix::identity(after));
    out += full * rho.matrix() * full.adjoint();
  }
  return DensityOperator(std::move(out), rho.dims(), rho.labels());
}

DensityOperator depolarize(const DensityOperator& rho, std::string_view target, double p) {
  check_unit_interval(p, "depolarizing parameter");
  if (rho.dim_of(target) != 2) throw DomainError("depolarizing target must be a qubit");
  const double w = std::sqrt(p / 4.0);
  const std::array<ComplexMatrix, 4> kraus = {
      ComplexMatrix::identity(2) * Complex(std::sqrt(1.0 - 0.75 * p)), pauli_x() * Complex(w),
      pauli_y() * Complex(w), pauli_z() * Complex(w)};
  return apply_local_kraus(rho, target, kraus);
}

CcqState::CcqState(DensityOperator density) : density_(std::move(density)) {
  const auto& labels = density_.labels();
  if (labels != std::vector<std::string>{"X", "Y", "E"} || density_.dims()[0] != 2 ||
      density_.dims()[1] != 2)
    throw DomainError("ccq state needs subsystems X:2, Y:2, E");
  const std::size_t e = density_.dims()[2];
  const auto& m = density_.matrix();
  for (std::size_t r = 0; r < m.dim(); ++r)
    for (std::size_t c = 0; c < m.dim(); ++c)
      if (r / e != c / e && std::abs(m(r, c)) > tolerance::kHermitian)
        throw DomainError("X/Y registers are not classical");
}

JointDistribution CcqState::joint_xy() const {
  const auto rho = xy();
  std::vector<double> w(4);
  for (std::size_t i = 0; i < 4; ++i) w[i] = std::clamp(rho.matrix()(i, i).real(), 0.0, 1.0);
  return JointDistribution(2, 2, std::move(w));
}

double CcqState::qber() const {
  const auto joint = joint_xy();
  return joint(0, 1) + joint(1, 0);
}

CcqState classical_flip(const CcqState& ccq, double p) {
  check_unit_interval(p, "classical noise parameter");
  const std::array<ComplexMatrix, 2> kraus = {
      ComplexMatrix::identity(2) * Complex(std::sqrt(1.0 - p / 2.0)),
      pauli_x() * Complex(std::sqrt(p / 2.0))};
  return CcqState(apply_local_kraus(ccq.density(), "X", kraus));
}

double qber_from_params(double disturbance, double p) {
  check_disturbance(disturbance);
  p = check_noise(p);
  return (1.0 - p) * disturbance + p / 2.0;
}

DisturbanceEstimate disturbance_from_qber(double qber, double p) {
  if (!(qber >= 0.0 && qber <= 0.5)) throw DomainError("QBER must lie in [0, 0.5]");
  p = check_noise(p);
  const double d = (qber - p / 2.0) / (1.0 - p);
  if (d < 0.0) return {0.0, true};
  return {std::min(d, 0.5), false};
}

std::pair<double, double> bb84_lambda4_range(double disturbance, double p) {
  const double q = qber_from_params(disturbance, p);
  p = std::min(p, kMaxNoise);
  const double lo = std::clamp(p / 4.0, 0.0, q);
  const double hi = std::clamp(q - p / 4.0, lo, q);
  return {lo, hi};
}

AttackSpec eve_gram(Protocol protocol, double disturbance, double p, std::optional<double> lambda4) {
  check_disturbance(disturbance);
  p = check_noise(p);
  AttackSpec spec;
  spec.protocol = protocol;
  spec.disturbance = disturbance;
  spec.noise = p;
  const double q = spec.qber();
  const double d = disturbance;

  double ac = 0.0;
  double bd = 0.0;
  if (protocol == Protocol::kSixState) {
    ac = gram_entry((1.0 - 2.0 * q) / ((1.0 - p) * (1.0 - d)), "<A|C>");
  } else {
    if (!lambda4) {
      if (d > 0.0) throw DomainError("BB84 attack needs lambda4");
      lambda4 = q / 2.0;
    }
    if (!(*lambda4 >= 0.0 && *lambda4 <= q)) throw DomainError("lambda4 must lie in [0, Q]");
    spec.lambda4 = lambda4;
    ac = gram_entry((1.0 - 3.0 * q + 2.0 * *lambda4) / ((1.0 - p) * (1.0 - d)), "<A|C>");
    // Probes B and D carry weight sqrt(D); at D = 0 their overlap is irrelevant.
    if (d > 0.0) bd = gram_entry((q - 2.0 * *lambda4) / ((1.0 - p) * d), "<B|D>");
  }

  ComplexMatrix gram = ComplexMatrix::identity(4);
  gram(0, 2) = gram(2, 0) = ac;
  gram(1, 3) = gram(3, 1) = bd;
  if (hermitian_eigenvalues(gram).front() < kGramPsd) throw InfeasibleError("Gram not PSD");
  spec.gram = std::move(gram);
  return spec;
}

ProbeSet probes_from_gram(const AttackSpec& spec, GramFactorization method, std::array<int, 4> order) {
  const ComplexMatrix& g = spec.gram;
  if (g.dim() != 4) throw DomainError("probe Gram must be 4x4");
  ProbeSet probes{};
  if (method == GramFactorization::kEigen) {
    const auto eig = hermitian_eigensystem(g);
    if (eig.values.front() < kGramPsd) throw DomainError("probe Gram is not PSD");
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t k = 0; k < 4; ++k)
        probes[i][k] = std::sqrt(std::max(eig.values[k], 0.0)) * std::conj(eig.vectors(i, k));
    return probes;
  }

  auto sorted = order;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != std::array<int, 4>{0, 1, 2, 3}) throw DomainError("factorization order must permute 0..3");
  // Semidefinite Cholesky in the requested visiting order: row r of L holds
  // the coefficients of probe order[r] in an orthonormal basis built so far.
  std::array<std::array<Complex, 4>, 4> l{};
  for (std::size_t r = 0; r < 4; ++r) {
    const auto i = static_cast<std::size_t>(order[r]);
    for (std::size_t c = 0; c < r; ++c) {
      const auto j = static_cast<std::size_t>(order[c]);
      const double pivot = l[c][c].real();
      if (pivot <= 1e-12) continue;
      Complex sum = g(j, i);  // <probe_j|probe_i>
      for (std::size_t k = 0; k < c; ++k) sum -= std::conj(l[c][k]) * l[r][k];
      l[r][c] = sum / pivot;
    }
    double diag = g(i, i).real();
    for (std::size_t k = 0; k < r; ++k) diag -= std::norm(l[r][k]);
    if (diag < kGramPsd) throw DomainError("probe Gram is not PSD");
    l[r][r] = std::sqrt(std::max(diag, 0.0));
    probes[i] = l[r];
  }
  return probes;
}

DensityOperator apply_eve(const DensityOperator& rho_ab, const ProbeSet& probes, double disturbance) {
  check_disturbance(disturbance);
  if (rho_ab.dims() != std::vector<std::size_t>{2, 2}) throw DomainError("Eve acts on a two-qubit state");
  const double keep = std::sqrt(1.0 - disturbance);
  const double flip = std::sqrt(disturbance);
  // iso[b][(b_out, e)]: U|b>|X> = sum iso[b][(b_out,e)] |b_out>|e>
  std::array<std::array<Complex, 8>, 2> iso{};
  const auto& [pa, pb, pc, pd] = probes;
  for (std::size_t e = 0; e < 4; ++e) {
    iso[0][0 * 4 + e] = keep * pa[e];
    iso[0][1 * 4 + e] = flip * pb[e];
    iso[1][1 * 4 + e] = keep * pc[e];
    iso[1][0 * 4 + e] = flip * pd[e];
  }
  const auto& m = rho_ab.matrix();
  ComplexMatrix out(16);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t a2 = 0; a2 < 2; ++a2)
      for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t b2 = 0; b2 < 2; ++b2) {
          const Complex rho = m(a * 2 + b, a2 * 2 + b2);
          if (rho == Complex{}) continue;
          for (std::size_t o = 0; o < 8; ++o)
            for (std::size_t o2 = 0; o2 < 8; ++o2)
              out(a * 8 + o, a2 * 8 + o2) += iso[b][o] * rho * std::conj(iso[b2][o2]);
        }
  return DensityOperator(std::move(out), {2, 2, 4}, {"A", "B", "E"});
}

DensityOperator eve_state(const AttackSpec& spec, GramFactorization method) {
  return apply_eve(bell_state(BellState::kPsiPlus), probes_from_gram(spec, method), spec.disturbance);
}

DensityOperator scenario_state(const AttackSpec& spec, const NoiseConfig& noise, GramFactorization method) {
  if (noise.scenario != Scenario::kNone && std::abs(noise.p - spec.noise) > kNoiseMatch)
    throw DomainError("noise parameter does not match the attack spec");
  switch (noise.scenario) {
    case Scenario::kNone:
      return eve_state(spec, method);
    case Scenario::kAliceQuantum:
      return depolarize(eve_state(spec, method), "A", noise.p);
    case Scenario::kBobBeforeEve: {
      const auto noisy = depolarize(bell_state(BellState::kPsiPlus), "B", noise.p);
      return apply_eve(noisy, probes_from_gram(spec, method), spec.disturbance);
    }
    case Scenario::kBobAfterEve:
      return depolarize(eve_state(spec, method), "B", noise.p);
    case Scenario::kClassical:
      break;
  }
  throw DomainError("scenario S4 acts on the measured ccq state, use classical_flip");
}

CcqState measure_ccq(const DensityOperator& rho_abe) {
  if (rho_abe.labels() != std::vector<std::string>{"A", "B", "E"} || rho_abe.dims()[0] != 2 ||
      rho_abe.dims()[1] != 2)
    throw DomainError("measure_ccq needs subsystems A:2, B:2, E");
  const std::size_t e_dim = rho_abe.dims()[2];
  const auto& m = rho_abe.matrix();
  ComplexMatrix out(4 * e_dim);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y) {
      const std::size_t src = (x * 2 + (1 - y)) * e_dim;
      const std::size_t dst = (x * 2 + y) * e_dim;
      for (std::size_t e = 0; e < e_dim; ++e)
        for (std::size_t e2 = 0; e2 < e_dim; ++e2) out(dst + e, dst + e2) = m(src + e, src + e2);
    }
  return CcqState(DensityOperator(std::move(out), {2, 2, e_dim}, {"X", "Y", "E"}));
}

BellCoefficients bell_coefficients(const DensityOperator& rho_ab) {
  if (rho_ab.dims() != std::vector<std::size_t>{2, 2}) throw DomainError("bell_coefficients needs two qubits");
  const std::array<std::array<Complex, 4>, 4> basis = {
      bell_vector(BellState::kPsiPlus), bell_vector(BellState::kPsiMinus),
      bell_vector(BellState::kPhiPlus), bell_vector(BellState::kPhiMinus)};
  const auto& m = rho_ab.matrix();
  BellCoefficients out;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      Complex v = 0.0;
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) v += std::conj(basis[i][r]) * m(r, c) * basis[j][c];
      if (i == j)
        out.weights[i] = v.real();
      else
        out.max_off_diagonal = std::max(out.max_off_diagonal, std::abs(v));
    }
  return out;
}

}  // namespace qkdlab
