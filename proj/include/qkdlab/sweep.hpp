#pragma once

// Parameter sweeps producing one report row per grid point.

#include <string_view>
#include <vector>

#include "qkdlab/optimizer.hpp"
#include "qkdlab/report.hpp"

namespace qkdlab {

enum class SweepKind {
  kN0VsD,         // N0 against D, noiseless or with optimal noise
  kPVsD,          // noise parameter minimizing N0 against D
  kRVsN,          // optimized rate against N at fixed D
  kRVsNChannel,   // optimized rate against N at fixed observed QBER and noise
};

std::string_view to_string(SweepKind kind);
SweepKind parse_sweep_kind(std::string_view text);

// "start:stop:step", inclusive of stop up to rounding; start > stop is empty.
std::vector<double> parse_linear_range(std::string_view text);
// "lo:hi:count", log-spaced; count 0 is empty.
std::vector<double> parse_log_range(std::string_view text);

struct SweepSpec {
  SweepKind kind = SweepKind::kN0VsD;
  std::vector<Protocol> protocols{Protocol::kBb84, Protocol::kSixState};
  std::vector<double> disturbances;  // n0-vs-d, p-vs-d
  std::vector<double> signals;       // r-vs-n kinds
  double disturbance = 0.1;          // r-vs-n
  double qber = 0.05;                // r-vs-n-channel
  double noise = 0.0;
  // n0-vs-d / r-vs-n: also emit the optimal-noise row for each point.
  bool optimize_noise = false;
  double eps_total = 1e-9;
  OptimizationConfig config;
  unsigned threads = 0;  // 0: hardware concurrency
};

// Rows in grid order (protocol, then grid point, then noiseless before
// optimal noise), independent of thread scheduling.
std::vector<ReportRow> run_sweep(const SweepSpec& spec);

}  // namespace qkdlab
