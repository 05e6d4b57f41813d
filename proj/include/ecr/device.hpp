#pragma once

// Device ensembles and the end-to-end pipeline: calibration, tomography, leakage,
// optional suppression and corrections, interleaved RB and error budgets per pair.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ecr/budget.hpp"
#include "ecr/corrections.hpp"

namespace ecr {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct PairConfig {
  PairParams params;
  double amplitude_ceiling = 0.15;  // rad/ns
};

struct DeviceConfig {
  std::vector<PairConfig> pairs;
  double dt = kDefaultDt;  // ns
  std::uint64_t seed = 0;
  bool has_seed = false;
  int shots = 1024;
  bool exact = false;
  int rb_seeds = 30;
  std::vector<int> rb_lengths = RBOptions{}.lengths;
  ReadoutModel readout;
  int threads = 0;  // 0 = hardware concurrency

  /// At least one pair, unique labels, a seed, valid physics and RB settings.
  void validate() const;
};

/// Fifteen pairs along a sixteen-qubit zigzag chain: three strongly leaking (two 1-2
/// collisions and a mixed two-photon case), seven intermediate, five clean, and four
/// pairs near |Delta| ~ |alpha| with large ZZ. Coherence times carry seeded jitter
/// around T1 = 69 us, T2e = 103 us.
DeviceConfig default_device(std::uint64_t seed = 20240601);

struct PairCalibration {
  std::string label;
  bool ok = false;
  std::string error;
  SingleQubitGates sq;
  CRPulseConfig cr;
};

struct DeviceState {
  std::string snapshot;  // hash of the config and calibrations
  std::string created;   // ISO-8601 timestamp, not part of the snapshot
  std::vector<PairCalibration> pairs;

  const PairCalibration& at(const std::string& label) const;
};

/// Calibrates every pair; failures are recorded per pair and the rest continue.
DeviceState calibrate_device(const DeviceConfig& config);

/// Corrections folded into the pulse itself (amplitude rescale and drive phase), as
/// applied inside a corrected segment.
CRPulseConfig applied_pulse(const CRPulseConfig& cfg);

struct PairResult {
  std::string label;
  bool ok = true;
  std::string failed_stage;
  std::string error;

  EffectiveHamiltonian hamiltonian;  // of the segment actually used in the gate
  double segment_duration = 0;       // ns
  double ecr_duration = 0;           // ns
  std::map<Term, double> term_epg;   // iz, zz
  LeakageReport leakage;
  LeakageScan scan0, scan1;          // amplification scans of the gate's pulse
  bool stretched = false;
  bool zz_compensated = false;
  CRPulseConfig cr;
  IRBResult irb;
  ErrorBudget budget;
};

struct ResultsDocument {
  int schema_version = 1;
  std::string snapshot;
  std::string created;
  std::vector<PairResult> before;  // naive gates
  std::vector<PairResult> after;   // suppressed and corrected; empty unless requested

  bool all_ok() const;
};

struct PipelineOptions {
  bool suppress = false;
  int scan_points = 48;
  int scan_reps = 12;
  /// Called after each pair run, serialized across workers.
  std::function<void(const PairResult&, bool after)> progress;
};

/// Tomography, leakage scan, IRB and budget of the naive gate for every calibrated pair;
/// with `suppress` also leakage suppression, corrections, refit, IRB and budget of the
/// corrected gate. Stage failures are isolated to their pair.
ResultsDocument run_pipeline(const DeviceConfig& config, const DeviceState& state, const PipelineOptions& options);

/// One pair, naive (`suppress` false) or suppressed and corrected.
PairResult run_pair(const DeviceConfig& config, const PairConfig& pair, const PairCalibration& cal,
                    const std::string& snapshot, bool suppress, const PipelineOptions& options = {});

/// Before/after summary over the pairs that succeeded in both runs.
BeforeAfter summarize(const ResultsDocument& doc);

std::string iso_timestamp();

}  // namespace ecr
