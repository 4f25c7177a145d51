// qkdlab: finite-key rates for BB84 and six-state with added noise.
//
//   qkdlab rate --protocol six-state --mode finite --qber 0.05 --noise 0.05 --signals 1e8 --optimize
//   qkdlab sweep --kind n0-vs-d --protocol both --d-range 0.05:0.14:0.005 --optimize-noise --output n0.csv
//   qkdlab verify --grid fine

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qkdlab/config.hpp"
#include "qkdlab/errors.hpp"
#include "qkdlab/optimizer.hpp"
#include "qkdlab/report.hpp"
#include "qkdlab/sweep.hpp"
#include "qkdlab/verify.hpp"

using namespace qkdlab;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInfeasible = 2, kUnwritable = 3 };

struct UnwritableError : Error {
  using Error::Error;
};

struct Common {
  std::string format;
  std::string output;
  std::string config;
};

struct Args {
  std::string protocol = "bb84";
  std::string scenario = "S1";
  std::string mode = "asym";
  std::optional<double> disturbance;
  std::optional<double> qber;
  double noise = 0.0;
  double signals = 1e8;
  std::optional<double> estimation;
  double epsilon = 1e-9;
  double f_ec = 1.0;
  bool optimize = false;
  bool optimize_noise = false;
  bool with_noise = false;
  std::string objective = "asymptotic";
  std::string kind = "n0-vs-d";
  std::string d_range = "0.05:0.14:0.005";
  std::string n_range = "1e4:1e18:29";
  unsigned threads = 0;
  std::string grid = "coarse";
  bool self_test = false;
};

// Output sink opened before any computation so that an unwritable path
// fails fast.
class Sink {
 public:
  explicit Sink(const std::string& path) : path_(path) {
    if (path_.empty() || path_ == "-") return;
    file_.open(path_, std::ios::binary | std::ios::trunc);
    if (!file_) throw UnwritableError("cannot write to '" + path_ + "'");
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void finish() {
    stream().flush();
    if (!stream()) throw UnwritableError("write to '" + path_ + "' failed");
  }

 private:
  std::string path_;
  std::ofstream file_;
};

// Options registered with add_flag.
std::set<const CLI::Option*> g_flags;

bool is_flag(const CLI::Option* opt) { return g_flags.count(opt) > 0; }

// Fills options not given on the command line from the config file.
void merge_config(CLI::App& sub, const ConfigMap& config) {
  for (CLI::Option* opt : sub.get_options()) {
    const auto& name = opt->get_single_name();
    if (opt->count() > 0 || name == "help") continue;
    auto it = config.find(name);
    if (it == config.end()) continue;
    bool excluded = false;
    for (const auto* other : opt->get_excludes()) excluded = excluded || other->count() > 0;
    if (excluded) continue;
    std::string value = it->second;
    if (is_flag(opt)) {
      if (value != "true" && value != "1") continue;
      value = "true";
    }
    opt->add_result(value);
    opt->run_callback();
  }
}

// Every option of the subcommand with its effective value.
json resolved_config(const CLI::App& sub) {
  json out;
  out["command"] = sub.get_name();
  for (const CLI::Option* opt : sub.get_options()) {
    const auto& name = opt->get_single_name();
    if (name == "help" || name == "config") continue;
    if (is_flag(opt)) {
      out[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      out[name] = opt->results().back();
    } else {
      const auto& def = opt->get_default_str();
      out[name] = def.empty() ? json() : json(def);
    }
  }
  return out;
}

Protocol protocol_of(const Args& a) { return parse_protocol(a.protocol); }

OptimizationConfig optimizer_config(const Args& a) {
  OptimizationConfig c;
  c.rate.scenario = parse_scenario(a.scenario);
  if (!(a.f_ec >= 1.0)) throw DomainError("f_EC must be at least 1");
  c.rate.f_ec = a.f_ec;
  return c;
}

double noise_for(const Args& a) {
  const auto sc = parse_scenario(a.scenario);
  if (sc == Scenario::kNone && a.noise != 0.0) throw DomainError("scenario S0 requires --noise 0");
  return a.noise;
}

ChannelPoint channel_point(const Args& a) {
  if (a.disturbance && a.qber) throw DomainError("--disturbance and --qber are mutually exclusive");
  const double p = noise_for(a);
  if (a.qber) {
    const auto point = ChannelPoint::from_qber(protocol_of(a), *a.qber, p);
    if (point.clamped) std::cerr << "warning: QBER below the noise floor p/2; D clamped to 0\n";
    return point;
  }
  return ChannelPoint::from_disturbance(protocol_of(a), a.disturbance.value_or(0.0), p);
}

double disturbance_of(const Args& a) {
  if (a.qber) return channel_point(a).disturbance;
  return a.disturbance.value_or(0.0);
}

void emit(Sink& sink, const Common& common, const json& config, const json& result,
          const std::vector<ReportRow>& rows) {
  if (common.format == "csv") {
    std::cerr << "# config " << config.dump() << '\n';
    write_csv(sink.stream(), rows);
  } else {
    json doc;
    doc["config"] = config;
    doc["result"] = result;
    sink.stream() << doc.dump(2) << '\n';
  }
}

int cmd_rate(const Args& a, const Common& common, const json& config) {
  Sink sink(common.output);
  const auto point = channel_point(a);
  const auto cfg = optimizer_config(a);
  RateBreakdown b;
  if (a.mode == "asym") {
    b = asymptotic_rate(point.protocol, point.disturbance, point.noise, cfg.rate);
  } else if (a.optimize) {
    b = optimize_rate(point, a.signals, a.epsilon, cfg);
  } else {
    const double m = a.estimation.value_or(std::round(a.signals / 10.0));
    b = finite_rate(point, {a.signals, m, 1.0}, SecurityBudget::even(a.epsilon), cfg.rate);
  }
  const std::vector<ReportRow> rows{{b, b.rate > 0.0 ? "ok" : "no_key"}};
  emit(sink, common, config, to_json(b), rows);
  sink.finish();
  return kOk;
}

int cmd_n0(const Args& a, const Common& common, const json& config) {
  Sink sink(common.output);
  const auto cfg = optimizer_config(a);
  const double d = disturbance_of(a);
  N0Result r;
  if (a.optimize_noise) {
    const auto best = optimal_noise(protocol_of(a), d, NoiseObjective::kMinimizeN0, a.epsilon, 0.0, cfg);
    r = {best.value, best.p, best.witness};
  } else {
    r = find_n0(protocol_of(a), d, noise_for(a), a.epsilon, cfg);
  }
  json result;
  result["N0"] = r.n0;
  result["p"] = r.optimal_p;
  result["witness"] = to_json(r.witness);
  emit(sink, common, config, result, {{r.witness, "ok"}});
  sink.finish();
  return kOk;
}

int cmd_opt_noise(const Args& a, const Common& common, const json& config) {
  Sink sink(common.output);
  const auto cfg = optimizer_config(a);
  const auto objective = parse_noise_objective(a.objective);
  const auto best = optimal_noise(protocol_of(a), disturbance_of(a), objective, a.epsilon, a.signals, cfg);
  json result;
  result["p"] = best.p;
  result["objective"] = std::string(to_string(objective));
  result["value"] = best.value;
  result["witness"] = to_json(best.witness);
  emit(sink, common, config, result, {{best.witness, best.witness.rate > 0.0 ? "ok" : "no_key"}});
  sink.finish();
  return kOk;
}

int cmd_threshold(const Args& a, const Common& common, const json& config) {
  Sink sink(common.output);
  const auto cfg = optimizer_config(a);
  const double d = disturbance_threshold(protocol_of(a), a.with_noise, cfg);
  json result;
  result["protocol"] = a.protocol;
  result["with_noise"] = a.with_noise;
  result["D"] = d;
  if (common.format == "csv") {
    std::cerr << "# config " << config.dump() << '\n';
    sink.stream() << "protocol,with_noise,D\n"
                  << to_string(protocol_of(a)) << ',' << (a.with_noise ? 1 : 0) << ',' << format_number(d) << '\n';
  } else {
    sink.stream() << json{{"config", config}, {"result", result}}.dump(2) << '\n';
  }
  sink.finish();
  return kOk;
}

int cmd_sweep(const Args& a, const Common& common, const json& config) {
  Sink sink(common.output);
  SweepSpec spec;
  spec.kind = parse_sweep_kind(a.kind);
  if (a.protocol == "both")
    spec.protocols = {Protocol::kBb84, Protocol::kSixState};
  else
    spec.protocols = {protocol_of(a)};
  spec.config = optimizer_config(a);
  spec.eps_total = a.epsilon;
  spec.noise = noise_for(a);
  spec.optimize_noise = a.optimize_noise;
  spec.threads = a.threads;
  if (spec.kind == SweepKind::kN0VsD || spec.kind == SweepKind::kPVsD) {
    spec.disturbances = parse_linear_range(a.d_range);
  } else {
    spec.signals = parse_log_range(a.n_range);
    spec.disturbance = a.disturbance.value_or(0.1);
    spec.qber = a.qber.value_or(0.05);
  }
  const auto rows = run_sweep(spec);
  Common csv = common;
  csv.format = "csv";
  emit(sink, csv, config, json(), rows);
  sink.finish();
  return kOk;
}

int cmd_verify(const Args& a, const Common& common, const json& config) {
  Sink sink(common.output);
  VerifyOptions options;
  if (a.grid == "fine")
    options.grid_points = 20;
  else if (a.grid != "coarse")
    throw DomainError("--grid must be coarse or fine");
  options.self_test = a.self_test;
  const auto results = run_verification(options);
  auto& out = sink.stream();
  if (common.format == "json") {
    json doc;
    doc["config"] = config;
    json checks = json::array();
    for (const auto& r : results)
      checks.push_back({{"name", r.name}, {"passed", r.passed}, {"worst", r.worst}, {"tolerance", r.tolerance},
                        {"detail", r.detail}});
    doc["checks"] = checks;
    doc["passed"] = all_passed(results);
    out << doc.dump(2) << '\n';
  } else {
    std::cerr << "# config " << config.dump() << '\n';
    for (const auto& r : results)
      out << (r.passed ? "PASS " : "FAIL ") << r.name << "  worst=" << format_number(r.worst)
          << " tol=" << format_number(r.tolerance) << "  (" << r.detail << ")\n";
  }
  sink.finish();
  return all_passed(results) ? kOk : kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-key rate lab for BB84 and six-state QKD with added noise"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  Common common;
  Args a;

  auto flag = [](CLI::App* sub, const std::string& name, bool& target, const std::string& help) {
    g_flags.insert(sub->add_flag(name, target, help));
  };
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--output,-o", common.output, "Output path (default stdout)");
    sub->add_option("--config", common.config, "key=value or JSON config file; flags win")
        ->envname("QKDLAB_CONFIG");
  };
  auto add_protocol = [&](CLI::App* sub, bool allow_both = false) {
    std::vector<std::string> names{"bb84", "six-state", "sixstate", "6state"};
    if (allow_both) names.push_back("both");
    sub->add_option("--protocol", a.protocol, "bb84 | six-state")->check(CLI::IsMember(names));
  };
  auto add_channel = [&](CLI::App* sub) {
    auto* d = sub->add_option("--disturbance,-D", a.disturbance, "Eve's disturbance D");
    auto* q = sub->add_option("--qber,-Q", a.qber, "Observed QBER");
    d->excludes(q);
    sub->add_option("--noise,-p", a.noise, "Noise parameter p");
    sub->add_option("--scenario", a.scenario, "Noise scenario S0..S4");
    sub->add_option("--f-ec", a.f_ec, "Error-correction inefficiency");
  };

  auto* rate = app.add_subcommand("rate", "Key rate at one operating point");
  add_protocol(rate);
  add_channel(rate);
  rate->add_option("--mode", a.mode, "asym | finite")->check(CLI::IsMember({"asym", "finite"}));
  rate->add_option("--signals,-N", a.signals, "Total number of signals N");
  rate->add_option("--estimation,-m", a.estimation, "Parameter-estimation sample size (without --optimize)");
  rate->add_option("--epsilon", a.epsilon, "Total security parameter");
  flag(rate, "--optimize", a.optimize, "Optimize m and the epsilon budget");
  add_common(rate);

  auto* n0 = app.add_subcommand("n0", "Minimal number of signals for a positive rate");
  add_protocol(n0);
  add_channel(n0);
  n0->add_option("--epsilon", a.epsilon, "Total security parameter");
  flag(n0, "--optimize-noise", a.optimize_noise, "Use the noise parameter minimizing N0");
  add_common(n0);

  auto* opt = app.add_subcommand("opt-noise", "Optimal noise parameter");
  add_protocol(opt);
  add_channel(opt);
  opt->add_option("--objective", a.objective, "asymptotic | minimize-n0 | maximize-rate");
  opt->add_option("--signals,-N", a.signals, "N for maximize-rate");
  opt->add_option("--epsilon", a.epsilon, "Total security parameter");
  add_common(opt);

  auto* thr = app.add_subcommand("threshold", "Largest disturbance with a positive asymptotic rate");
  add_protocol(thr);
  thr->add_option("--scenario", a.scenario, "Noise scenario S0..S4");
  flag(thr, "--with-noise", a.with_noise, "Maximize over the noise parameter");
  add_common(thr);

  auto* sweep = app.add_subcommand("sweep", "Grid sweep written as CSV");
  add_protocol(sweep, true);
  add_channel(sweep);
  sweep->add_option("--kind", a.kind, "n0-vs-d | p-vs-d | r-vs-n | r-vs-n-channel");
  sweep->add_option("--d-range", a.d_range, "start:stop:step");
  sweep->add_option("--n-range", a.n_range, "lo:hi:count (log-spaced)");
  sweep->add_option("--epsilon", a.epsilon, "Total security parameter");
  flag(sweep, "--optimize-noise", a.optimize_noise, "Add rows with optimal noise");
  sweep->add_option("--threads", a.threads, "Worker threads (0: all cores)");
  add_common(sweep);

  auto* verify = app.add_subcommand("verify", "Run the invariant suite");
  verify->add_option("--grid", a.grid, "coarse | fine")->check(CLI::IsMember({"coarse", "fine"}));
  flag(verify, "--self-test", a.self_test, "Perturb a channel constant; the suite must fail");
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    const std::string name = sub->get_name();
    if (sub->get_option("--format")->count() == 0) common.format = (name == "sweep" || name == "verify") ? "csv" : "json";
    if (!common.config.empty()) merge_config(*sub, load_config(common.config));
    json config = resolved_config(*sub);
    config["format"] = common.format;
    if (name == "rate") return cmd_rate(a, common, config);
    if (name == "n0") return cmd_n0(a, common, config);
    if (name == "opt-noise") return cmd_opt_noise(a, common, config);
    if (name == "threshold") return cmd_threshold(a, common, config);
    if (name == "sweep") return cmd_sweep(a, common, config);
    return cmd_verify(a, common, config);
  } catch (const UnwritableError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUnwritable;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const NoKeyError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
