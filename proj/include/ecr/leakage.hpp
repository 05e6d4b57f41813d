#pragma once

// Control-leakage amplification, classification and DRAG suppression.
//
// Repeat unit: one ZX(pi/4) CR pulse followed by a virtual Z(phi) on the control.
// The Z(phi) advances the relative phase of |1>,|2> by phi and of |0>,|2> by 2 phi,
// so a leakage transition adds coherently at one phi (period 2 pi) for 1-2 and at two
// phis pi apart for the two-photon 0-2 process.

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "ecr/calibration.hpp"

namespace ecr {

enum class LeakageType { l01, l12, l02_2 };
const char* to_string(LeakageType t);
LeakageType leakage_type_from_string(const std::string& s);

struct LeakageScan {
  std::vector<double> phis;  // rad, sorted in [0, 2 pi)
  int n_reps = 0;
  int control_init = 0;
  std::vector<double> p2;      // control |2> population
  std::vector<double> p_flip;  // control population in the other computational level
};

struct LeakagePeak {
  double phi = 0;
  double height = 0;
};

struct LeakageReport {
  std::set<LeakageType> detected;
  std::map<LeakageType, double> rate;  // probability per ZX(pi/4)
  std::map<LeakageType, std::vector<double>> peak_phis;
  bool empty() const { return detected.empty(); }
};

class UnclassifiedPattern : public Error {
 public:
  UnclassifiedPattern(const std::string& what, LeakageScan scan0, LeakageScan scan1)
      : Error(what), scan0(std::move(scan0)), scan1(std::move(scan1)) {}
  LeakageScan scan0, scan1;
};

class RateSaturation : public Error {
 public:
  using Error::Error;
};

class SuppressionFailure : public Error {
 public:
  SuppressionFailure(const std::string& what, double residual) : Error(what), residual(residual) {}
  double residual;
};

/// Uniform grid of n points on [0, 2 pi).
std::vector<double> phase_grid(int n = 48);

/// Amplification scan from the unitary of one CR pulse.
LeakageScan run_amplification(const Operator& pulse, int n_reps, const std::vector<double>& phis, int control_init);
LeakageScan run_amplification(const PairSimulator& sim, const CRPulseConfig& cfg, int n_reps,
                              const std::vector<double>& phis, int control_init);

struct PeakOptions {
  double mad_factor = 5;
  double floor = 2e-3;         // absolute population floor
  double coincide_tol = 0.35;  // rad, same-phi test for 1-2 flips
  double pi_tol = 0.35;        // rad, tolerance on the pi separation
  double min_rate = 1e-4;      // fitted per-pulse rate below which a type is dropped
};

/// Local maxima rising above the scan minimum by the absolute floor and by k robust
/// standard deviations of the point-to-point noise.
std::vector<LeakagePeak> find_peaks(const std::vector<double>& phis, const std::vector<double>& y,
                                    const PeakOptions& opt = {});

/// Applies the peak rules. Rates are first estimates from the peak heights.
LeakageReport classify_leakage(const LeakageScan& scan0, const LeakageScan& scan1, const PeakOptions& opt = {});

/// Per-pulse probability from a peak height P after n coherent repetitions,
/// P = sin^2(n theta / 2), p = sin^2(theta / 2). Throws RateSaturation above 0.9.
double rate_from_peak(double peak, int n_reps);
/// Same, from the scan's largest p2 (or flip) value.
double estimate_leakage_rate(const LeakageScan& scan, bool use_flip = false);

/// Fits sin^2(n theta / 2) to the peak population over a sweep of repetition counts.
double fit_leakage_rate(const Operator& pulse, LeakageType type, double phi, const std::vector<int>& ns = {4, 8, 12});

/// Coherent per-pulse rate of `type`: locates the peak with a scan and fits the n sweep.
double measure_leakage_rate(const Operator& pulse, LeakageType type);

/// Scans both control preparations and classifies; rates come from the n-sweep fit.
LeakageReport characterize_leakage(const PairSimulator& sim, const CRPulseConfig& cfg, int n_reps = 12,
                                   int n_phis = 48, const PeakOptions& opt = {});

/// Worst coherent rate over all three processes.
double worst_leakage_rate(const Operator& pulse);

/// Transition frequency (GHz) of the control process behind `type`.
double leakage_transition_ghz(const PairModel& model, LeakageType type);

struct SuppressionResult {
  CRPulseConfig cfg;
  LeakageReport before;
  LeakageReport after;
  bool stretched = false;
  double residual = 0;  // largest re-measured per-pulse rate
};

/// DRAG on the dominant transition (local +-30% sweep minimizing the worst rate), after a
/// 10-20% flat stretch when the two-photon process coexists with another type. Re-calibrates the CR pulse
/// after every change. Throws SuppressionFailure when a rate stays at or above 1e-3.
SuppressionResult suppress_leakage(const PairSimulator& sim, const CRPulseConfig& cfg, const LeakageReport& report,
                                   const CROptions& opt = {});

/// Amplitude keeping the CR area constant when the flat top changes.
double area_preserving_amplitude(const CRPulseConfig& cfg, double new_flat);

}  // namespace ecr
