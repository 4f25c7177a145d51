#pragma once

// CSV and JSON serialization of rate breakdowns.

#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "json.hpp"
#include "qkdlab/keyrate.hpp"

namespace qkdlab {

inline constexpr std::string_view kCsvHeader =
    "protocol,scenario,D,p,Q,N,m,eps_bar,eps_PE,eps_EC,eps_PA,SXE,HXY,zeta,aep,pa_corr,rate,status";

// 12 significant digits, shortest form, C locale; "inf"/"nan" for non-finite.
std::string format_number(double value);

struct ReportRow {
  RateBreakdown breakdown;
  std::string status = "ok";
};

std::string csv_row(const ReportRow& row);
void write_csv(std::ostream& out, std::span<const ReportRow> rows);

nlohmann::ordered_json to_json(const RateBreakdown& breakdown);

// Breakdown with only the operating point filled in; used for rows whose
// evaluation failed.
RateBreakdown placeholder_breakdown(Protocol protocol, Scenario scenario, double disturbance, double p,
                                    double signals);

}  // namespace qkdlab
