#include "qkdlab/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace qkdlab {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string csv_row(const ReportRow& row) {
  const auto& b = row.breakdown;
  std::string out;
  auto field = [&](std::string_view text) {
    if (!out.empty()) out += ',';
    out += text;
  };
  field(to_string(b.protocol));
  field(to_string(b.scenario));
  for (double v : {b.disturbance, b.noise, b.qber, b.signals, b.estimation, b.budget.eps_bar, b.budget.eps_pe,
                   b.budget.eps_ec, b.budget.eps_pa, b.sxe, b.hxy, b.zeta, b.aep_penalty, b.pa_correction, b.rate})
    field(format_number(v));
  field(row.status);
  return out;
}

void write_csv(std::ostream& out, std::span<const ReportRow> rows) {
  out << kCsvHeader << '\n';
  for (const auto& row : rows) out << csv_row(row) << '\n';
}

nlohmann::ordered_json to_json(const RateBreakdown& b) {
  nlohmann::ordered_json j;
  auto number = [](double v) -> nlohmann::ordered_json {
    if (std::isfinite(v)) return v;
    return format_number(v);
  };
  j["protocol"] = to_string(b.protocol);
  j["scenario"] = to_string(b.scenario);
  j["D"] = number(b.disturbance);
  j["p"] = number(b.noise);
  j["Q"] = number(b.qber);
  j["asymptotic"] = b.asymptotic;
  j["N"] = number(b.signals);
  j["m"] = number(b.estimation);
  j["n"] = number(b.key_signals);
  j["eps_bar"] = number(b.budget.eps_bar);
  j["eps_PE"] = number(b.budget.eps_pe);
  j["eps_EC"] = number(b.budget.eps_ec);
  j["eps_PA"] = number(b.budget.eps_pa);
  j["f_EC"] = number(b.f_ec);
  j["SXE"] = number(b.sxe);
  j["HXY"] = number(b.hxy);
  j["zeta"] = number(b.zeta);
  j["aep"] = number(b.aep_penalty);
  j["pa_corr"] = number(b.pa_correction);
  j["rate"] = number(b.rate);
  j["worst_Q"] = number(b.worst_qber);
  j["argmin_lambda4"] = b.argmin_lambda4 ? nlohmann::ordered_json(*b.argmin_lambda4) : nlohmann::ordered_json();
  return j;
}

RateBreakdown placeholder_breakdown(Protocol protocol, Scenario scenario, double disturbance, double p,
                                    double signals) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  RateBreakdown b;
  b.protocol = protocol;
  b.scenario = scenario;
  b.disturbance = disturbance;
  b.noise = p;
  b.qber = (1.0 - p) * disturbance + p / 2.0;
  b.asymptotic = false;
  b.signals = signals;
  b.estimation = nan;
  b.key_signals = nan;
  b.budget = {nan, nan, nan, nan};
  b.sxe = b.hxy = b.zeta = b.aep_penalty = b.pa_correction = b.rate = b.worst_qber = nan;
  return b;
}

}  // namespace qkdlab
