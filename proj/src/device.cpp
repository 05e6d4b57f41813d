#include "ecr/device.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <mutex>
#include <random>
#include <set>
#include <thread>

#include "ecr/io.hpp"

namespace ecr {

namespace {

int worker_count(int requested, std::size_t tasks) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(n, 1, static_cast<int>(std::max<std::size_t>(tasks, 1)));
}

template <typename F>
void parallel_for(std::size_t n, int threads, F&& body) {
  const int workers = worker_count(threads, n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
}

RBOptions rb_options(const DeviceConfig& c) {
  RBOptions o;
  o.lengths = c.rb_lengths;
  o.n_seeds = c.rb_seeds;
  o.shots = c.shots;
  o.exact = c.exact;
  o.seed = c.seed;
  o.readout = c.readout;
  o.threads = 1;
  return o;
}

CROptions cr_options(const PairConfig& p) {
  CROptions o;
  o.amplitude_ceiling = p.amplitude_ceiling;
  return o;
}

// Repetitions for the stored scans: as many as fit before the strongest process wraps.
int scan_reps(const LeakageReport& report, int max_reps) {
  double p = 0;
  for (const auto& [t, r] : report.rate) p = std::max(p, r);
  if (p <= 0) return max_reps;
  const double theta = 2 * std::asin(std::sqrt(std::min(p, 1.0)));
  return std::clamp(static_cast<int>(0.75 * std::numbers::pi / theta), 2, max_reps);
}

}  // namespace

void DeviceConfig::validate() const {
  if (pairs.empty()) throw ConfigError("device config has no pairs");
  if (!has_seed) throw ConfigError("device config needs a seed");
  std::set<std::string> labels;
  for (const auto& p : pairs) {
    if (!labels.insert(p.params.label).second) throw ConfigError("duplicate pair label '" + p.params.label + "'");
    if (!(p.amplitude_ceiling > 0)) throw ConfigError("amplitude ceiling of " + p.params.label + " must be positive");
    try {
      p.params.validate();
    } catch (const Error& e) {
      throw ConfigError(p.params.label + ": " + e.what());
    }
  }
  if (!(dt > 0) || std::abs(kDefaultDt / dt - std::round(kDefaultDt / dt)) > 1e-9)
    throw ConfigError("dt must divide the 0.25 ns sample grid");
  try {
    rb_options(*this).validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

DeviceConfig default_device(std::uint64_t seed) {
  struct Spec {
    double delta_mhz, j_mhz, ceiling;
  };
  // Chain order; even chain positions are the low-frequency targets.
  // strong: 103 (0-2 two-photon), 136 and 146 (1-2)
  // intermediate: 40, 55, 85, 99, 103.5, 125, 130
  // clean: 60, 62, 68, 70, 75
  // high ZZ: 125, 130, 136, 146
  const std::vector<Spec> specs{{40, 2.7, 0.1},  {55, 2.9, 0.1},   {60, 2.9, 0.1},    {62, 2.7, 0.1},
                                {68, 2.7, 0.1},  {70, 2.9, 0.1},   {75, 2.9, 0.1},    {85, 2.7, 0.1},
                                {99, 2.4, 0.12}, {103, 2.0, 0.15}, {103.5, 2.0, 0.15}, {125, 2.7, 0.1},
                                {130, 2.7, 0.1}, {136, 2.7, 0.1},  {146, 2.7, 0.1}};
  const std::size_t n_qubits = specs.size() + 1;

  std::vector<double> freq(n_qubits);
  freq[0] = 4.40;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const double d = specs[k].delta_mhz * 1e-3;
    freq[k + 1] = k % 2 == 0 ? freq[k] + d : freq[k] - d;
  }

  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> jitter(0.0, 0.2);
  std::vector<TransmonParams> qubits(n_qubits);
  for (std::size_t q = 0; q < n_qubits; ++q) {
    auto& t = qubits[q];
    t.frequency_ghz = freq[q];
    t.t1_us = 69.0 * jitter(rng);
    t.t2e_us = std::min(103.0 * jitter(rng), 2 * t.t1_us);
  }

  DeviceConfig c;
  c.seed = seed;
  c.has_seed = true;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const std::size_t hi = k % 2 == 0 ? k + 1 : k, lo = k % 2 == 0 ? k : k + 1;
    PairConfig p;
    p.params.label = "Q" + std::to_string(k) + "-Q" + std::to_string(k + 1);
    p.params.control = qubits[hi];
    p.params.target = qubits[lo];
    p.params.j_mhz = specs[k].j_mhz;
    p.amplitude_ceiling = specs[k].ceiling;
    c.pairs.push_back(p);
  }
  return c;
}

const PairCalibration& DeviceState::at(const std::string& label) const {
  for (const auto& p : pairs)
    if (p.label == label) return p;
  throw InvalidArgument("no calibration for pair '" + label + "'");
}

std::string iso_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

DeviceState calibrate_device(const DeviceConfig& config) {
  config.validate();
  DeviceState state;
  state.pairs.resize(config.pairs.size());
  parallel_for(config.pairs.size(), config.threads, [&](std::size_t i) {
    const auto& pc = config.pairs[i];
    auto& cal = state.pairs[i];
    cal.label = pc.params.label;
    try {
      PairSimulator sim(pc.params, config.dt);
      cal.sq = calibrate_single_qubit_gates(sim);
      cal.cr = calibrate_cr(sim, cr_options(pc));
      cal.ok = true;
    } catch (const Error& e) {
      cal.ok = false;
      cal.error = e.what();
    }
  });
  state.snapshot = snapshot_of(config, state.pairs);
  state.created = iso_timestamp();
  return state;
}

CRPulseConfig applied_pulse(const CRPulseConfig& cfg) {
  CRPulseConfig p = cfg;
  const auto& c = cfg.corrections;
  p.cr_amplitude *= c.zx_rescale;
  p.cancel_amplitude *= c.zx_rescale;
  p.cr_phase = wrap_phase(p.cr_phase + c.zy_phase_fix);
  p.cancel_phase = wrap_phase(p.cancel_phase + c.zy_phase_fix);
  p.corrections = CorrectionSet{};
  return p;
}

bool ResultsDocument::all_ok() const {
  auto ok = [](const PairResult& r) { return r.ok; };
  return std::ranges::all_of(before, ok) && std::ranges::all_of(after, ok);
}

PairResult run_pair(const DeviceConfig& config, const PairConfig& pair, const PairCalibration& cal,
                    const std::string& snapshot, bool suppress, const PipelineOptions& options) {
  PairResult r;
  r.label = pair.params.label;
  std::string stage = "calibration";
  try {
    if (!cal.ok) throw CalibrationFailure(cal.error.empty() ? "pair was not calibrated" : cal.error);
    const PairSimulator sim(pair.params, config.dt);
    CRPulseConfig cfg = cal.cr;
    const SingleQubitGates& sq = cal.sq;

    if (suppress) {
      stage = "leakage";
      const LeakageReport found = characterize_leakage(sim, cfg, options.scan_reps, options.scan_points);
      if (!found.empty()) {
        stage = "suppression";
        const SuppressionResult s = suppress_leakage(sim, cfg, found, cr_options(pair));
        cfg = s.cfg;
        r.stretched = s.stretched;
      }
      stage = "corrections";
      const GateTomography bare = gate_tomography(sim, cr_pulse(cfg, +1));
      const double zz = term_epg(bare.rates(), Term::zz, bare.duration);
      const double ecr = assemble_ecr(cfg, sq, false).duration();
      const double marginal = incoherent_epg(pair.params, ecr + 4 * sq.target.duration) -
                              incoherent_epg(pair.params, ecr);
      r.zz_compensated = zz_compensation_worthwhile(zz, marginal);
      CorrectionOptions co;
      co.compensate_zz = r.zz_compensated;
      cfg = calibrate_corrections(sim, cfg, sq, co);
    }
    r.cr = cfg;

    stage = "tomography";
    const GateTomography g =
        suppress ? segment_tomography(sim, cfg, sq.target) : gate_tomography(sim, cr_pulse(cfg, +1));
    r.hamiltonian = g.rates();
    r.segment_duration = g.duration;
    r.ecr_duration = assemble_ecr(cfg, sq, suppress).duration();
    for (Term t : {Term::iz, Term::zz}) r.term_epg[t] = term_epg(r.hamiltonian, t, r.segment_duration);

    stage = "leakage";
    const CRPulseConfig pulse = suppress ? applied_pulse(cfg) : cfg;
    r.leakage = characterize_leakage(sim, pulse, options.scan_reps, options.scan_points);
    const int n = scan_reps(r.leakage, options.scan_reps);
    const auto phis = phase_grid(options.scan_points);
    r.scan0 = run_amplification(sim, pulse, n, phis, 0);
    r.scan1 = run_amplification(sim, pulse, n, phis, 1);

    stage = "irb";
    r.irb = run_irb(simulated_gate_set(sim, sq, cfg, suppress, true), rb_options(config));

    stage = "budget";
    BudgetInputs in;
    in.label = r.label;
    in.incoherent = incoherent_epg(pair.params, r.ecr_duration);
    in.iz_epg = r.term_epg[Term::iz];
    in.zz_epg = r.term_epg[Term::zz];
    in.leakage_rate = total_leakage_rate(r.leakage);
    in.tomography_epoch = in.leakage_epoch = in.irb_epoch = snapshot;
    r.budget = assemble_budget(in, r.irb, suppress);
  } catch (const Error& e) {
    r.ok = false;
    r.failed_stage = stage;
    r.error = e.what();
  }
  return r;
}

ResultsDocument run_pipeline(const DeviceConfig& config, const DeviceState& state, const PipelineOptions& options) {
  config.validate();
  ResultsDocument doc;
  doc.snapshot = state.snapshot;
  const std::size_t n = config.pairs.size();
  doc.before.resize(n);
  if (options.suppress) doc.after.resize(n);
  const std::size_t tasks = options.suppress ? 2 * n : n;
  std::mutex report;
  parallel_for(tasks, config.threads, [&](std::size_t k) {
    const std::size_t i = k % n;
    const bool after = k >= n;
    const auto& pc = config.pairs[i];
    PairCalibration missing;
    missing.label = pc.params.label;
    missing.error = "pair missing from device state";
    const PairCalibration* cal = &missing;
    for (const auto& c : state.pairs)
      if (c.label == pc.params.label) cal = &c;
    auto& slot = (after ? doc.after : doc.before)[i];
    slot = run_pair(config, pc, *cal, state.snapshot, after, options);
    if (options.progress) {
      std::scoped_lock lock(report);
      options.progress(slot, after);
    }
  });
  doc.created = iso_timestamp();
  return doc;
}

BeforeAfter summarize(const ResultsDocument& doc) {
  std::vector<ErrorBudget> naive, corrected;
  for (const auto& b : doc.before) {
    if (!b.ok) continue;
    for (const auto& a : doc.after)
      if (a.label == b.label && a.ok) {
        naive.push_back(b.budget);
        corrected.push_back(a.budget);
      }
  }
  if (naive.empty()) throw InvalidArgument("no pair succeeded in both runs");
  return compare_before_after(naive, corrected);
}

}  // namespace ecr
