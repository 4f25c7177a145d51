#include "qkdlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include "qkdlab/errors.hpp"
#include "qkdlab/optimizer.hpp"
#include "qkdlab/search.hpp"

namespace qkdlab {

namespace {

constexpr double kSelfTestShift = 1e-3;

struct GridPoint {
  Protocol protocol;
  double disturbance;
  double p;
  std::optional<double> lambda4;
};

std::vector<GridPoint> attack_grid(int points) {
  std::vector<GridPoint> out;
  const auto ds = search::linspace(0.0, 0.25, static_cast<std::size_t>(points));
  const auto ps = search::linspace(0.0, 0.9, static_cast<std::size_t>(points));
  for (double d : ds)
    for (double p : ps) {
      out.push_back({Protocol::kSixState, d, p, std::nullopt});
      const auto [lo, hi] = bb84_lambda4_range(d, p);
      for (double l : {lo, 0.5 * (lo + hi), hi}) out.push_back({Protocol::kBb84, d, p, l});
    }
  return out;
}

// Running maximum of a violation measure; infeasible grid points are skipped.
class Tracker {
 public:
  Tracker(std::string name, double tolerance) : name_(std::move(name)), tolerance_(tolerance) {}

  void observe(double violation) {
    if (!(violation <= worst_)) worst_ = std::isnan(violation) ? INFINITY : std::max(worst_, violation);
    ++checked_;
  }
  void skip() { ++skipped_; }

  template <class F>
  void run(F&& body) {
    try {
      body();
    } catch (const InfeasibleError&) {
      skip();
    }
  }

  CheckResult result() const {
    CheckResult r;
    r.name = name_;
    r.worst = worst_;
    r.tolerance = tolerance_;
    r.passed = checked_ > 0 && worst_ <= tolerance_;
    r.detail = std::to_string(checked_) + " points";
    if (skipped_) r.detail += ", " + std::to_string(skipped_) + " infeasible skipped";
    return r;
  }

 private:
  std::string name_;
  double tolerance_;
  double worst_ = 0.0;
  int checked_ = 0;
  int skipped_ = 0;
};

RateOptions density_options(Scenario scenario) {
  RateOptions o;
  o.route = EntropyRoute::kDensityMatrix;
  o.scenario = scenario;
  return o;
}

double sxe_of(const DensityOperator& rho_abe) {
  return conditional_vn_entropy(measure_ccq(rho_abe).density(), "X", "E");
}

}  // namespace

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
  if (options.grid_points < 2) throw DomainError("verification grid needs at least 2 points per axis");
  const auto grid = attack_grid(options.grid_points);
  std::vector<CheckResult> results;

  // Depolarizing B before Eve equals depolarizing A.
  {
    Tracker t("scenario 1/2 state equality", 1e-12);
    for (const auto& g : grid)
      t.run([&] {
        const auto spec = eve_gram(g.protocol, g.disturbance, g.p, g.lambda4);
        const auto s1 = scenario_state(spec, NoiseConfig::make(Scenario::kAliceQuantum, g.p));
        const auto s2 = scenario_state(spec, NoiseConfig::make(Scenario::kBobBeforeEve, g.p));
        const double p_b = options.self_test ? g.p + kSelfTestShift : g.p;
        const auto manual = apply_eve(depolarize(bell_state(BellState::kPsiPlus), "B", p_b),
                                      probes_from_gram(spec), g.disturbance);
        t.observe(std::max(s1.matrix().max_abs_diff(s2.matrix()), s1.matrix().max_abs_diff(manual.matrix())));
      });
    results.push_back(t.result());
  }

  // Quantum noise on Alice's qubit and a classical flip of her bit.
  {
    Tracker t("scenario 1/4 entropy equality", 1e-9);
    for (const auto& g : grid)
      t.run([&] {
        const auto s1 = attack_entropies(g.protocol, g.disturbance, g.p, g.lambda4,
                                         density_options(Scenario::kAliceQuantum));
        const auto s4 = attack_entropies(g.protocol, g.disturbance, g.p, g.lambda4,
                                         density_options(Scenario::kClassical));
        t.observe(std::max({std::abs(s1.sxe - s4.sxe), std::abs(s1.hxy - s4.hxy), std::abs(s1.qber - s4.qber)}));
      });
    results.push_back(t.result());
  }

  // Noise on Bob's output leaves Eve's information untouched and only adds leakage.
  {
    Tracker inv("scenario 3 S(X|E) invariance", 1e-12);
    Tracker mono("scenario 3 H(X|Y) non-decrease", 1e-12);
    for (const auto& g : grid)
      inv.run([&] {
        const auto spec = eve_gram(g.protocol, g.disturbance, g.p, g.lambda4);
        const auto s0 = measure_ccq(scenario_state(spec, NoiseConfig{}));
        const auto s3 = measure_ccq(scenario_state(spec, NoiseConfig::make(Scenario::kBobAfterEve, g.p)));
        inv.observe(std::abs(conditional_vn_entropy(s0.density(), "X", "E") -
                             conditional_vn_entropy(s3.density(), "X", "E")));
        mono.observe(shannon_cond_entropy(s0.joint_xy()) - shannon_cond_entropy(s3.joint_xy()));
      });
    results.push_back(inv.result());
    results.push_back(mono.result());
  }

  // Kraus form of the depolarizing map against its mixing form.
  {
    Tracker t("depolarizing map identity", 1e-12);
    for (const auto& g : grid) {
      if (g.protocol != Protocol::kSixState) continue;
      t.run([&] {
        const auto rho = eve_state(eve_gram(g.protocol, g.disturbance, g.p));
        const auto kraus = depolarize(rho, "A", g.p);
        const auto rest = partial_trace(rho, {"B", "E"});
        auto mixed = rho.matrix() * Complex(1.0 - g.p) +
                     tensor_product(ComplexMatrix::identity(2) * Complex(0.5), rest.matrix()) * Complex(g.p);
        t.observe(kraus.matrix().max_abs_diff(mixed));
      });
    }
    results.push_back(t.result());
  }

  // rho_AB after the attack is Bell diagonal; six-state weights are fixed by D.
  {
    Tracker diag("Bell diagonality of rho_AB", 1e-10);
    Tracker coeff("six-state Bell coefficients", 1e-10);
    for (const auto& g : grid)
      diag.run([&] {
        const auto spec = eve_gram(g.protocol, g.disturbance, g.p, g.lambda4);
        const auto rho_ab = partial_trace(scenario_state(spec, NoiseConfig::make(Scenario::kAliceQuantum, g.p)),
                                          {"A", "B"});
        const auto bell = bell_coefficients(rho_ab);
        diag.observe(bell.max_off_diagonal);
        const auto eve = eve_bell_weights(g.protocol, g.disturbance, g.p, g.lambda4);
        double dev = 0.0;
        for (std::size_t i = 0; i < 4; ++i)
          dev = std::max(dev, std::abs(bell.weights[i] - ((1.0 - g.p) * eve[i] + g.p / 4.0)));
        if (g.protocol == Protocol::kSixState) {
          const double d = g.disturbance;
          const std::array<double, 4> expected{1.0 - 1.5 * d, d / 2.0, d / 2.0, d / 2.0};
          for (std::size_t i = 0; i < 4; ++i) dev = std::max(dev, std::abs(eve[i] - expected[i]));
          coeff.observe(dev);
        } else if (g.lambda4) {
          dev = std::max(dev, std::abs(bell.weights[3] - *g.lambda4));
        }
        diag.observe(dev);
      });
    results.push_back(diag.result());
    results.push_back(coeff.result());
  }

  // S(X|E) must not depend on how the probes are realized.
  {
    Tracker t("Gram factorization invariance", 1e-9);
    const std::array<std::array<int, 4>, 3> orders{{{0, 1, 2, 3}, {3, 2, 1, 0}, {1, 3, 0, 2}}};
    for (const auto& g : grid)
      t.run([&] {
        const auto spec = eve_gram(g.protocol, g.disturbance, g.p, g.lambda4);
        const auto noise = NoiseConfig::make(Scenario::kAliceQuantum, g.p);
        const double ref = sxe_of(scenario_state(spec, noise, GramFactorization::kEigen));
        for (const auto& order : orders) {
          const auto probes = probes_from_gram(spec, GramFactorization::kCholesky, order);
          const auto rho = depolarize(apply_eve(bell_state(BellState::kPsiPlus), probes, g.disturbance), "A",
                                      std::min(g.p, kMaxNoise));
          t.observe(std::abs(sxe_of(rho) - ref));
        }
      });
    results.push_back(t.result());
  }

  // Closed form against the full state construction, every scenario.
  {
    Tracker t("entropy route agreement", 1e-9);
    for (const auto& g : grid)
      for (auto sc : {Scenario::kNone, Scenario::kAliceQuantum, Scenario::kBobBeforeEve, Scenario::kBobAfterEve,
                      Scenario::kClassical}) {
        if (sc == Scenario::kNone && g.p != 0.0) continue;
        t.run([&] {
          RateOptions fast;
          fast.scenario = sc;
          const auto a = attack_entropies(g.protocol, g.disturbance, g.p, g.lambda4, fast);
          const auto b = attack_entropies(g.protocol, g.disturbance, g.p, g.lambda4, density_options(sc));
          t.observe(std::max({std::abs(a.sxe - b.sxe), std::abs(a.hxy - b.hxy), std::abs(a.qber - b.qber)}));
        });
      }
    results.push_back(t.result());
  }

  // Noiseless BB84: 1 - 2 h(Q).
  {
    Tracker t("BB84 asymptotic oracle", 1e-6);
    for (double d : search::linspace(0.0, 0.11, static_cast<std::size_t>(options.grid_points * 2)))
      t.observe(std::abs(asymptotic_rate(Protocol::kBb84, d, 0.0).rate - (1.0 - 2.0 * binary_entropy(d))));
    results.push_back(t.result());
  }

  // Finite-key checks on a few representative points.
  {
    Tracker consistency("finite breakdown consistency", 1e-12);
    Tracker below("finite rate below asymptotic", 0.0);
    Tracker monotone("optimized rate non-decreasing in N", 1e-9);
    Tracker converge("convergence at N = 1e18", 1e-2);
    const std::vector<std::array<double, 2>> points{{0.0, 0.0}, {0.03, 0.0}, {0.05, 0.1}, {0.08, 0.2}};
    for (Protocol pr : {Protocol::kBb84, Protocol::kSixState})
      for (const auto& [d, p] : points) {
        const auto asym = asymptotic_rate(pr, d, p).rate;
        const auto point = ChannelPoint::from_disturbance(pr, d, p);
        double previous = -INFINITY;
        for (double n : {1e5, 1e7, 1e9, 1e11}) {
          const auto r = optimize_rate(point, n, 1e-9);
          consistency.observe(std::max(std::abs(r.recompute_rate() - r.rate), std::abs(r.budget.total() - 1e-9)));
          below.observe(r.rate - asym);
          monotone.observe(previous - r.rate);
          previous = r.rate;
        }
        converge.observe(std::abs(optimize_rate(point, 1e18, 1e-9).rate - asym));
      }
    for (auto* t : {&consistency, &below, &monotone, &converge}) results.push_back(t->result());
  }

  return results;
}

}  // namespace qkdlab
