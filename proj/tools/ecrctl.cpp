// ecrctl: calibrate, characterize and benchmark ECR gates on a simulated device.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

#include "ecr/io.hpp"

using namespace ecr;

namespace {

constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kConfigError = 2;

struct Flags {
  std::string config;
  std::string state;
  std::string results;
  std::string out;
  std::string pair;
  std::string format = "all";
  std::optional<std::uint64_t> seed;
  std::optional<int> shots;
  std::optional<int> threads;
  bool exact = false;
  bool suppress = false;
  bool quiet = false;
};

DeviceConfig load_config(const Flags& f) {
  DeviceConfig c = f.config.empty() ? default_device(f.seed.value_or(20240601)) : config_from_json(read_json(f.config));
  if (f.seed) {
    c.seed = *f.seed;
    c.has_seed = true;
  }
  if (f.shots) c.shots = *f.shots;
  if (f.threads) c.threads = *f.threads;
  if (f.exact) c.exact = true;
  c.validate();
  return c;
}

DeviceState load_state(const Flags& f, const DeviceConfig& config) {
  if (f.state.empty()) {
    if (!f.quiet) std::cerr << "no --state given, calibrating\n";
    return calibrate_device(config);
  }
  DeviceState s = state_from_json(read_json(f.state));
  if (s.snapshot != snapshot_of(config, s.pairs))
    throw ConfigError("device state " + f.state + " was not calibrated from this config");
  return s;
}

std::vector<const PairConfig*> selected(const DeviceConfig& c, const Flags& f) {
  std::vector<const PairConfig*> out;
  for (const auto& p : c.pairs)
    if (f.pair.empty() || p.params.label == f.pair) out.push_back(&p);
  if (out.empty()) throw ConfigError("no pair labelled '" + f.pair + "'");
  return out;
}

void emit(const Flags& f, const Json& j) {
  if (f.out.empty())
    std::cout << j.dump(2) << '\n';
  else
    write_json(f.out, j);
}

int cmd_calibrate(const Flags& f) {
  const DeviceConfig c = load_config(f);
  const DeviceState s = calibrate_device(c);
  emit(f, to_json(s));
  int failed = 0;
  for (const auto& p : s.pairs)
    if (!p.ok) {
      ++failed;
      std::cerr << p.label << ": " << p.error << '\n';
    }
  return failed ? kPartial : kOk;
}

int cmd_tomography(const Flags& f) {
  const DeviceConfig c = load_config(f);
  const DeviceState s = load_state(f, c);
  Json out = Json::array();
  int failed = 0;
  for (const PairConfig* p : selected(c, f)) {
    const PairCalibration& cal = s.at(p->params.label);
    Json row{{"label", p->params.label}};
    try {
      if (!cal.ok) throw CalibrationFailure(cal.error);
      const PairSimulator sim(p->params, c.dt);
      const GateTomography g = gate_tomography(sim, cr_pulse(cal.cr, +1));
      const EffectiveHamiltonian h = g.rates();
      Json rates = Json::object();
      for (Term t : kAllTerms) rates[to_string(t)] = rad_per_ns_to_mhz(h[t]);
      row["rates_mhz"] = rates;
      row["iz_epg"] = term_epg(h, Term::iz, g.duration);
      row["zz_epg"] = term_epg(h, Term::zz, g.duration);
      row["conditional_angle_rad"] = g.conditional_angle();
    } catch (const Error& e) {
      ++failed;
      row["error"] = e.what();
    }
    out.push_back(row);
  }
  emit(f, out);
  return failed ? kPartial : kOk;
}

Json report_json(const LeakageReport& r) {
  Json j = Json::object();
  for (LeakageType t : r.detected) j[to_string(t)] = r.rate.at(t);
  return j;
}

int cmd_leakage(const Flags& f, bool suppress) {
  const DeviceConfig c = load_config(f);
  DeviceState s = load_state(f, c);
  Json out = Json::array();
  int failed = 0;
  for (const PairConfig* p : selected(c, f)) {
    PairCalibration* cal = nullptr;
    for (auto& q : s.pairs)
      if (q.label == p->params.label) cal = &q;
    Json row{{"label", p->params.label}};
    try {
      if (cal == nullptr || !cal->ok) throw CalibrationFailure(cal ? cal->error : "not calibrated");
      const PairSimulator sim(p->params, c.dt);
      const LeakageReport r = characterize_leakage(sim, cal->cr);
      row["rate_per_pulse"] = report_json(r);
      if (suppress && !r.empty()) {
        CROptions o;
        o.amplitude_ceiling = p->amplitude_ceiling;
        const SuppressionResult res = suppress_leakage(sim, cal->cr, r, o);
        cal->cr = res.cfg;
        row["after"] = report_json(res.after);
        row["residual"] = res.residual;
        row["stretched"] = res.stretched;
        row["drag_alpha_ns"] = res.cfg.drag_alpha;
      }
    } catch (const Error& e) {
      ++failed;
      row["error"] = e.what();
    }
    out.push_back(row);
  }
  if (suppress && !f.out.empty()) {
    // The suppressed pulses form a new calibration snapshot of the same config.
    s.snapshot = snapshot_of(c, s.pairs);
    s.created = iso_timestamp();
    write_json(f.out, to_json(s));
    std::cout << out.dump(2) << '\n';
  } else {
    emit(f, out);
  }
  return failed ? kPartial : kOk;
}

PipelineOptions pipeline_options(const Flags& f) {
  PipelineOptions o;
  o.suppress = f.suppress;
  if (!f.quiet)
    o.progress = [](const PairResult& r, bool after) {
      std::cerr << (after ? "[after]  " : "[before] ") << r.label;
      if (r.ok)
        std::cerr << "  irb epg " << r.irb.epg << " +- " << r.irb.epg_err << '\n';
      else
        std::cerr << "  failed at " << r.failed_stage << ": " << r.error << '\n';
    };
  return o;
}

ResultsDocument run_selected(const Flags& f) {
  DeviceConfig c = load_config(f);
  const DeviceState s = load_state(f, c);
  if (!f.pair.empty()) {
    const PairConfig one = *selected(c, f).front();
    c.pairs = {one};
  }
  return run_pipeline(c, s, pipeline_options(f));
}

int cmd_irb(const Flags& f) {
  const ResultsDocument doc = run_selected(f);
  Json out = Json::array();
  for (const auto* v : {&doc.before, &doc.after})
    for (const auto& r : *v) {
      Json row{{"label", r.label}, {"suppressed", v == &doc.after}};
      if (r.ok) {
        row["epg"] = r.irb.epg;
        row["epg_err"] = r.irb.epg_err;
        row["alpha_ref"] = r.irb.alpha_ref;
        row["alpha_int"] = r.irb.alpha_int;
        if (r.irb.negative_warning) row["warning"] = "interleaved decay slower than reference";
      } else {
        row["error"] = r.error;
      }
      out.push_back(row);
    }
  emit(f, out);
  return doc.all_ok() ? kOk : kPartial;
}

void print_budget(const ResultsDocument& doc) {
  std::printf("%-10s %-6s %9s %9s %9s %9s %9s %9s\n", "pair", "run", "incoh", "iz", "zz", "leakage", "unexpl",
              "irb");
  for (const auto* v : {&doc.before, &doc.after})
    for (const auto& r : *v) {
      const char* run = v == &doc.before ? "before" : "after";
      if (!r.ok) {
        std::printf("%-10s %-6s failed at %s\n", r.label.c_str(), run, r.failed_stage.c_str());
        continue;
      }
      const auto& c = r.budget.components;
      std::printf("%-10s %-6s %8.3f%% %8.3f%% %8.3f%% %8.3f%% %8.3f%% %8.3f%%\n", r.label.c_str(), run,
                  100 * c.at(Component::incoherent), 100 * c.at(Component::iz), 100 * c.at(Component::zz),
                  100 * c.at(Component::leakage), 100 * c.at(Component::unexplained), 100 * r.budget.irb_epg);
    }
  if (!doc.after.empty()) {
    try {
      const BeforeAfter s = summarize(doc);
      std::printf("median IRB EPG %.3f%% -> %.3f%%, median ratio %.2f\n", 100 * s.median_before,
                  100 * s.median_after, s.median_ratio);
    } catch (const Error&) {
    }
  }
}

int cmd_budget(const Flags& f) {
  const ResultsDocument doc = run_selected(f);
  print_budget(doc);
  if (!f.out.empty()) write_text(f.out, budget_csv(doc));
  return doc.all_ok() ? kOk : kPartial;
}

void write_reports(const ResultsDocument& doc, const std::filesystem::path& dir, const std::string& format) {
  if (format != "all" && format != "json" && format != "csv" && format != "svg")
    throw ConfigError("unknown report format '" + format + "'");
  const bool all = format == "all";
  if (all || format == "json") write_json(dir / "results.json", to_json(doc));
  if (all || format == "csv") {
    write_text(dir / "budget.csv", budget_csv(doc));
    write_text(dir / "survival.csv", survival_csv(doc));
  }
  if (all || format == "svg") {
    write_text(dir / "budget.svg", budget_svg(doc));
    if (!doc.after.empty()) write_text(dir / "cdf.svg", cdf_svg(doc));
    for (const auto& r : doc.before)
      if (r.ok) write_text(dir / ("leakage_" + r.label + ".svg"), leakage_svg(doc, r.label));
  }
}

int cmd_pipeline(const Flags& f) {
  const ResultsDocument doc = run_selected(f);
  write_reports(doc, f.out.empty() ? "results" : f.out, "all");
  if (!f.quiet) print_budget(doc);
  return doc.all_ok() ? kOk : kPartial;
}

int cmd_report(const Flags& f) {
  if (f.results.empty()) throw ConfigError("report needs --results");
  const ResultsDocument doc = results_from_json(read_json(f.results));
  write_reports(doc, f.out.empty() ? "." : f.out, f.format);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Echoed cross-resonance calibration and benchmarking on simulated transmon pairs"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&](CLI::App* s, bool state) {
    s->add_option("--config", f.config, "Device config JSON (default: built-in 15-pair ensemble)");
    if (state) s->add_option("--state", f.state, "Calibrated device state JSON (default: calibrate now)");
    s->add_option("--seed", f.seed, "Override the config seed");
    s->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
    s->add_flag("--quiet", f.quiet, "No progress output");
  };
  auto add_rb = [&](CLI::App* s) {
    s->add_option("--shots", f.shots, "Shots per RB sequence")->check(CLI::PositiveNumber);
    s->add_flag("--exact", f.exact, "Expectation values instead of sampled shots");
    s->add_flag("--suppress", f.suppress, "Also run leakage suppression and coherent corrections");
    s->add_option("--pair", f.pair, "Restrict to one pair label");
  };

  auto* cal = app.add_subcommand("calibrate", "Calibrate SX and CR pulses of every pair");
  add_common(cal, false);
  cal->add_option("--out", f.out, "Device state output (default: stdout)");

  auto* tomo = app.add_subcommand("tomography", "Effective Hamiltonian of the calibrated CR pulse");
  add_common(tomo, true);
  tomo->add_option("--pair", f.pair, "Restrict to one pair label");
  tomo->add_option("--out", f.out, "JSON output (default: stdout)");

  auto* leak = app.add_subcommand("leakage", "Amplify and classify control leakage");
  add_common(leak, true);
  leak->add_option("--pair", f.pair, "Restrict to one pair label");
  leak->add_option("--out", f.out, "JSON output (default: stdout)");

  auto* sup = app.add_subcommand("suppress", "DRAG leakage suppression; writes the updated device state");
  add_common(sup, true);
  sup->add_option("--pair", f.pair, "Restrict to one pair label");
  sup->add_option("--out", f.out, "Updated device state output");

  auto* irb = app.add_subcommand("irb", "Interleaved randomized benchmarking of the ECR");
  add_common(irb, true);
  add_rb(irb);
  irb->add_option("--out", f.out, "JSON output (default: stdout)");

  auto* bud = app.add_subcommand("budget", "Error budget table");
  add_common(bud, true);
  add_rb(bud);
  bud->add_option("--out", f.out, "CSV output");

  auto* pipe = app.add_subcommand("pipeline", "Full pipeline with JSON, CSV and SVG outputs");
  add_common(pipe, true);
  add_rb(pipe);
  pipe->add_option("--out", f.out, "Output directory (default: results)");

  auto* rep = app.add_subcommand("report", "Re-emit artifacts from a results document");
  rep->add_option("--results", f.results, "Results JSON")->required();
  rep->add_option("--format", f.format, "json, csv, svg or all");
  rep->add_option("--out", f.out, "Output directory (default: .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*cal) return cmd_calibrate(f);
    if (*tomo) return cmd_tomography(f);
    if (*leak) return cmd_leakage(f, false);
    if (*sup) return cmd_leakage(f, true);
    if (*irb) return cmd_irb(f);
    if (*bud) return cmd_budget(f);
    if (*pipe) return cmd_pipeline(f);
    if (*rep) return cmd_report(f);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kPartial;
  }
  return kOk;
}
