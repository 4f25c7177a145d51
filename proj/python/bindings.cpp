#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qkdlab/errors.hpp"
#include "qkdlab/optimizer.hpp"
#include "qkdlab/report.hpp"
#include "qkdlab/sweep.hpp"
#include "qkdlab/verify.hpp"

namespace py = pybind11;
using namespace qkdlab;

namespace {

OptimizationConfig make_config(const std::string& scenario, double f_ec) {
  OptimizationConfig c;
  c.rate.scenario = parse_scenario(scenario);
  c.rate.f_ec = f_ec;
  return c;
}

ChannelPoint make_point(const std::string& protocol, std::optional<double> disturbance, std::optional<double> qber,
                        double p) {
  if (disturbance && qber) throw DomainError("give either disturbance or qber, not both");
  if (qber) return ChannelPoint::from_qber(parse_protocol(protocol), *qber, p);
  return ChannelPoint::from_disturbance(parse_protocol(protocol), disturbance.value_or(0.0), p);
}

py::dict as_dict(const RateBreakdown& b) { return py::module_::import("json").attr("loads")(to_json(b).dump()); }

}  // namespace

PYBIND11_MODULE(_qkdlab, m) {
  m.doc() = "Finite-key rates for BB84 and six-state QKD with added noise";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());
  py::register_exception<NoKeyError>(m, "NoKeyError", base.ptr());

  py::class_<SecurityBudget>(m, "SecurityBudget")
      .def_readonly("eps_bar", &SecurityBudget::eps_bar)
      .def_readonly("eps_pe", &SecurityBudget::eps_pe)
      .def_readonly("eps_ec", &SecurityBudget::eps_ec)
      .def_readonly("eps_pa", &SecurityBudget::eps_pa)
      .def("total", &SecurityBudget::total);

  py::class_<RateBreakdown>(m, "RateBreakdown")
      .def_property_readonly("protocol", [](const RateBreakdown& b) { return std::string(to_string(b.protocol)); })
      .def_property_readonly("scenario", [](const RateBreakdown& b) { return std::string(to_string(b.scenario)); })
      .def_readonly("D", &RateBreakdown::disturbance)
      .def_readonly("p", &RateBreakdown::noise)
      .def_readonly("Q", &RateBreakdown::qber)
      .def_readonly("asymptotic", &RateBreakdown::asymptotic)
      .def_readonly("N", &RateBreakdown::signals)
      .def_readonly("m", &RateBreakdown::estimation)
      .def_readonly("n", &RateBreakdown::key_signals)
      .def_readonly("budget", &RateBreakdown::budget)
      .def_readonly("sxe", &RateBreakdown::sxe)
      .def_readonly("hxy", &RateBreakdown::hxy)
      .def_readonly("zeta", &RateBreakdown::zeta)
      .def_readonly("aep", &RateBreakdown::aep_penalty)
      .def_readonly("pa_corr", &RateBreakdown::pa_correction)
      .def_readonly("rate", &RateBreakdown::rate)
      .def_readonly("worst_Q", &RateBreakdown::worst_qber)
      .def_readonly("argmin_lambda4", &RateBreakdown::argmin_lambda4)
      .def("to_dict", &as_dict)
      .def("csv_row", [](const RateBreakdown& b) { return csv_row({b, b.rate > 0.0 ? "ok" : "no_key"}); })
      .def("__repr__", [](const RateBreakdown& b) {
        return "<RateBreakdown " + std::string(to_string(b.protocol)) + " D=" + format_number(b.disturbance) +
               " p=" + format_number(b.noise) + " rate=" + format_number(b.rate) + ">";
      });

  m.attr("CSV_HEADER") = std::string(kCsvHeader);

  m.def("binary_entropy", &binary_entropy, py::arg("q"));
  m.def("zeta", &zeta, py::arg("eps_pe"), py::arg("n_p"), py::arg("m"));
  m.def("aep_penalty", &aep_penalty, py::arg("eps_bar"), py::arg("n"));

  m.def(
      "asymptotic_rate",
      [](const std::string& protocol, double disturbance, double p, const std::string& scenario, double f_ec) {
        return asymptotic_rate(parse_protocol(protocol), disturbance, p, make_config(scenario, f_ec).rate);
      },
      py::arg("protocol"), py::arg("disturbance"), py::arg("p") = 0.0, py::arg("scenario") = "S1",
      py::arg("f_ec") = 1.0);

  m.def(
      "finite_rate",
      [](const std::string& protocol, std::optional<double> disturbance, std::optional<double> qber, double p,
         double signals, double estimation, double epsilon, const std::string& scenario, double f_ec) {
        const auto cfg = make_config(scenario, f_ec);
        return finite_rate(make_point(protocol, disturbance, qber, p), {signals, estimation, 1.0},
                           SecurityBudget::even(epsilon), cfg.rate);
      },
      py::kw_only(), py::arg("protocol"), py::arg("disturbance") = py::none(), py::arg("qber") = py::none(),
      py::arg("p") = 0.0, py::arg("signals"), py::arg("estimation"), py::arg("epsilon") = 1e-9,
      py::arg("scenario") = "S1", py::arg("f_ec") = 1.0);

  m.def(
      "optimize_rate",
      [](const std::string& protocol, std::optional<double> disturbance, std::optional<double> qber, double p,
         double signals, double epsilon, const std::string& scenario, double f_ec) {
        py::gil_scoped_release release;
        return optimize_rate(make_point(protocol, disturbance, qber, p), signals, epsilon,
                             make_config(scenario, f_ec));
      },
      py::kw_only(), py::arg("protocol"), py::arg("disturbance") = py::none(), py::arg("qber") = py::none(),
      py::arg("p") = 0.0, py::arg("signals"), py::arg("epsilon") = 1e-9, py::arg("scenario") = "S1",
      py::arg("f_ec") = 1.0);

  m.def(
      "find_n0",
      [](const std::string& protocol, double disturbance, double p, double epsilon) {
        py::gil_scoped_release release;
        const auto r = find_n0(parse_protocol(protocol), disturbance, p, epsilon);
        return std::make_pair(r.n0, r.witness);
      },
      py::arg("protocol"), py::arg("disturbance"), py::arg("p") = 0.0, py::arg("epsilon") = 1e-9,
      "Returns (N0, breakdown at N0).");

  m.def(
      "optimal_noise",
      [](const std::string& protocol, double disturbance, const std::string& objective, double epsilon,
         double signals) {
        py::gil_scoped_release release;
        const auto r = optimal_noise(parse_protocol(protocol), disturbance, parse_noise_objective(objective), epsilon,
                                     signals);
        return std::make_tuple(r.p, r.value, r.witness);
      },
      py::arg("protocol"), py::arg("disturbance"), py::arg("objective") = "asymptotic", py::arg("epsilon") = 1e-9,
      py::arg("signals") = 0.0, "Returns (p*, objective value, breakdown).");

  m.def(
      "disturbance_threshold",
      [](const std::string& protocol, bool with_noise) {
        py::gil_scoped_release release;
        return disturbance_threshold(parse_protocol(protocol), with_noise);
      },
      py::arg("protocol"), py::arg("with_noise") = false);

  m.def(
      "sweep_csv",
      [](const std::string& kind, const std::vector<std::string>& protocols, const std::vector<double>& grid,
         double disturbance, double qber, double p, bool optimize_noise, double epsilon) {
        SweepSpec spec;
        spec.kind = parse_sweep_kind(kind);
        spec.protocols.clear();
        for (const auto& name : protocols) spec.protocols.push_back(parse_protocol(name));
        if (spec.kind == SweepKind::kN0VsD || spec.kind == SweepKind::kPVsD)
          spec.disturbances = grid;
        else
          spec.signals = grid;
        spec.disturbance = disturbance;
        spec.qber = qber;
        spec.noise = p;
        spec.optimize_noise = optimize_noise;
        spec.eps_total = epsilon;
        std::vector<ReportRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_sweep(spec);
        }
        std::string out(kCsvHeader);
        out += '\n';
        for (const auto& row : rows) out += csv_row(row) + '\n';
        return out;
      },
      py::arg("kind"), py::arg("protocols"), py::arg("grid"), py::arg("disturbance") = 0.1, py::arg("qber") = 0.05,
      py::arg("p") = 0.0, py::arg("optimize_noise") = false, py::arg("epsilon") = 1e-9);

  m.def(
      "verify",
      [](bool fine, bool self_test) {
        VerifyOptions options;
        options.grid_points = fine ? 20 : 5;
        options.self_test = self_test;
        std::vector<CheckResult> results;
        {
          py::gil_scoped_release release;
          results = run_verification(options);
        }
        py::list out;
        for (const auto& r : results)
          out.append(py::dict(py::arg("name") = r.name, py::arg("passed") = r.passed, py::arg("worst") = r.worst,
                              py::arg("tolerance") = r.tolerance, py::arg("detail") = r.detail));
        return out;
      },
      py::arg("fine") = false, py::arg("self_test") = false);
}
