#pragma once

// Invariant suite over a (D, p) grid: scenario equivalences, Bell-diagonal
// structure, factorization independence, entropy-route agreement and
// finite-key consistency.

#include <string>
#include <vector>

namespace qkdlab {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;      // largest violation measure seen
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyOptions {
  int grid_points = 5;     // per axis; 20 for the fine grid
  // Perturbs the depolarizing parameter of one scenario so the equivalence
  // check must fail.
  bool self_test = false;
};

std::vector<CheckResult> run_verification(const VerifyOptions& options = {});

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace qkdlab
