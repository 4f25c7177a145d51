#include "qkdlab/sweep.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <functional>
#include <string>
#include <thread>

#include "qkdlab/errors.hpp"
#include "qkdlab/search.hpp"

namespace qkdlab {

namespace {

std::vector<double> split_numbers(std::string_view text, std::size_t expected) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto colon = text.find(':', start);
    const auto piece = text.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start);
    try {
      std::size_t used = 0;
      const std::string s(piece);
      out.push_back(std::stod(s, &used));
      if (used != s.size()) throw DomainError("");
    } catch (const std::exception&) {
      throw DomainError("malformed range '" + std::string(text) + "'");
    }
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (out.size() != expected) throw DomainError("range '" + std::string(text) + "' needs " +
                                                std::to_string(expected) + " colon-separated numbers");
  return out;
}

ReportRow failed_row(Protocol protocol, Scenario scenario, double d, double p, double n, const char* status) {
  return {placeholder_breakdown(protocol, scenario, d, p, n), status};
}

ReportRow rate_row(RateBreakdown b) {
  const char* status = b.rate > 0.0 ? "ok" : "no_key";
  return {std::move(b), status};
}

using Task = std::function<ReportRow()>;

// Evaluates tasks on a pool; each task maps infeasible/no-key outcomes to
// status rows itself, anything else propagates.
std::vector<ReportRow> evaluate(const std::vector<Task>& tasks, unsigned threads) {
  std::vector<ReportRow> rows(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        rows[i] = tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, tasks.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

template <class F>
Task guarded(Protocol protocol, Scenario scenario, double d, double p, double n, F body) {
  return [=]() -> ReportRow {
    try {
      return body();
    } catch (const InfeasibleError&) {
      return failed_row(protocol, scenario, d, p, n, "infeasible");
    } catch (const NoKeyError&) {
      return failed_row(protocol, scenario, d, p, n, "no_key");
    }
  };
}

}  // namespace

std::string_view to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::kN0VsD: return "n0-vs-d";
    case SweepKind::kPVsD: return "p-vs-d";
    case SweepKind::kRVsN: return "r-vs-n";
    case SweepKind::kRVsNChannel: return "r-vs-n-channel";
  }
  return "?";
}

SweepKind parse_sweep_kind(std::string_view text) {
  for (auto k : {SweepKind::kN0VsD, SweepKind::kPVsD, SweepKind::kRVsN, SweepKind::kRVsNChannel}) {
    std::string alt(to_string(k));
    for (auto& c : alt)
      if (c == '-') c = '_';
    if (text == to_string(k) || text == alt) return k;
  }
  throw DomainError("unknown sweep kind '" + std::string(text) + "'");
}

std::vector<double> parse_linear_range(std::string_view text) {
  const auto v = split_numbers(text, 3);
  const double start = v[0], stop = v[1], step = v[2];
  if (!(step > 0.0) || !std::isfinite(start) || !std::isfinite(stop)) throw DomainError("range step must be positive");
  std::vector<double> out;
  if (start > stop) return out;
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

std::vector<double> parse_log_range(std::string_view text) {
  const auto v = split_numbers(text, 3);
  if (!(v[0] > 0.0 && v[1] >= v[0])) throw DomainError("log range needs 0 < lo <= hi");
  if (!(v[2] >= 0.0 && v[2] == std::floor(v[2]))) throw DomainError("log range count must be a non-negative integer");
  return search::logspace(v[0], v[1], static_cast<std::size_t>(v[2]));
}

std::vector<ReportRow> run_sweep(const SweepSpec& spec) {
  const auto& cfg = spec.config;
  const Scenario sc = cfg.rate.scenario;
  const double eps = spec.eps_total;
  std::vector<Task> tasks;

  for (Protocol pr : spec.protocols) {
    switch (spec.kind) {
      case SweepKind::kN0VsD:
        for (double d : spec.disturbances) {
          tasks.push_back(guarded(pr, sc, d, spec.noise, NAN, [=, &cfg] {
            auto r = find_n0(pr, d, spec.noise, eps, cfg);
            return ReportRow{r.witness, "ok"};
          }));
          if (spec.optimize_noise)
            tasks.push_back(guarded(pr, sc, d, NAN, NAN, [=, &cfg] {
              auto r = optimal_noise(pr, d, NoiseObjective::kMinimizeN0, eps, 0.0, cfg);
              return ReportRow{r.witness, "ok"};
            }));
        }
        break;
      case SweepKind::kPVsD:
        for (double d : spec.disturbances)
          tasks.push_back(guarded(pr, sc, d, NAN, NAN, [=, &cfg] {
            auto r = optimal_noise(pr, d, NoiseObjective::kMinimizeN0, eps, 0.0, cfg);
            return ReportRow{r.witness, "ok"};
          }));
        break;
      case SweepKind::kRVsN:
        for (double n : spec.signals) {
          const double d = spec.disturbance;
          tasks.push_back(guarded(pr, sc, d, spec.noise, n, [=, &cfg] {
            return rate_row(optimize_rate(ChannelPoint::from_disturbance(pr, d, spec.noise), n, eps, cfg));
          }));
          if (spec.optimize_noise)
            tasks.push_back(guarded(pr, sc, d, NAN, n, [=, &cfg] {
              return rate_row(optimal_noise(pr, d, NoiseObjective::kMaximizeRateAtN, eps, n, cfg).witness);
            }));
        }
        break;
      case SweepKind::kRVsNChannel:
        for (double n : spec.signals) {
          const auto point = ChannelPoint::from_qber(pr, spec.qber, spec.noise);
          tasks.push_back(guarded(pr, sc, point.disturbance, point.noise, n, [=, &cfg] {
            return rate_row(optimize_rate(point, n, eps, cfg));
          }));
        }
        break;
    }
  }
  return evaluate(tasks, spec.threads);
}

}  // namespace qkdlab
