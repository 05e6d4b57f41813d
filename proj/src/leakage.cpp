#include "ecr/leakage.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/minima.hpp>

#include "ecr/fitting.hpp"

namespace ecr {

namespace {

constexpr double kPi = std::numbers::pi;

double median(std::vector<double> v) {
  const size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + static_cast<long>(n / 2), v.end());
  double m = v[n / 2];
  if (n % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + static_cast<long>(n / 2 - 1), v.end());
    m = 0.5 * (m + v[n / 2 - 1]);
  }
  return m;
}

double circular_distance(double a, double b) { return std::abs(std::remainder(a - b, 2 * kPi)); }

Operator control_phase(double phi) {
  Operator z = Operator::Zero();
  for (int c = 0; c < 3; ++c)
    for (int t = 0; t < 3; ++t) z(3 * c + t, 3 * c + t) = std::polar(1.0, phi * c);
  return z;
}

/// Control populations after n repeat units at phase phi: (p2, p_flip).
std::pair<double, double> repeat_populations(const Operator& pulse, double phi, int n, int control_init) {
  const Operator unit = control_phase(phi) * pulse;
  StateVector psi = StateVector::Zero();
  psi(3 * control_init) = 1.0;
  for (int k = 0; k < n; ++k) psi = unit * psi;
  double p2 = 0, flip = 0;
  const int other = 1 - control_init;
  for (int t = 0; t < 3; ++t) {
    p2 += std::norm(psi(6 + t));
    flip += std::norm(psi(3 * other + t));
  }
  return {p2, flip};
}

int init_for(LeakageType t) { return t == LeakageType::l12 ? 1 : 0; }

double observable(const Operator& pulse, LeakageType t, double phi, int n) {
  const auto [p2, flip] = repeat_populations(pulse, phi, n, init_for(t));
  return t == LeakageType::l01 ? flip : p2;
}

bool has_pi_pair(const std::vector<LeakagePeak>& peaks, double tol, std::vector<double>* phis) {
  for (size_t i = 0; i < peaks.size(); ++i) {
    for (size_t j = i + 1; j < peaks.size(); ++j) {
      if (std::abs(circular_distance(peaks[i].phi, peaks[j].phi) - kPi) <= tol) {
        if (phis) *phis = {peaks[i].phi, peaks[j].phi};
        return true;
      }
    }
  }
  return false;
}

void check_scan_pair(const LeakageScan& a, const LeakageScan& b) {
  if (a.phis != b.phis || a.n_reps != b.n_reps) throw InvalidArgument("scans must share the phase grid and n_reps");
  if (a.control_init == b.control_init) throw InvalidArgument("need one scan per control preparation");
}

}  // namespace

const char* to_string(LeakageType t) {
  switch (t) {
    case LeakageType::l01:
      return "L01";
    case LeakageType::l12:
      return "L12";
    case LeakageType::l02_2:
      return "L02_2";
  }
  return "?";
}

LeakageType leakage_type_from_string(const std::string& s) {
  for (LeakageType t : {LeakageType::l01, LeakageType::l12, LeakageType::l02_2}) {
    if (s == to_string(t)) return t;
  }
  throw InvalidArgument("unknown leakage type: " + s);
}

std::vector<double> phase_grid(int n) {
  std::vector<double> g(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) g[static_cast<size_t>(k)] = 2 * kPi * k / n;
  return g;
}

LeakageScan run_amplification(const Operator& pulse, int n_reps, const std::vector<double>& phis, int control_init) {
  if (n_reps < 1) throw InvalidArgument("n_reps must be positive");
  if (control_init != 0 && control_init != 1) throw InvalidArgument("control_init must be 0 or 1");
  if (!std::is_sorted(phis.begin(), phis.end())) throw InvalidArgument("phis must be sorted");
  LeakageScan s;
  s.phis = phis;
  s.n_reps = n_reps;
  s.control_init = control_init;
  for (double phi : phis) {
    const auto [p2, flip] = repeat_populations(pulse, phi, n_reps, control_init);
    s.p2.push_back(p2);
    s.p_flip.push_back(flip);
  }
  return s;
}

LeakageScan run_amplification(const PairSimulator& sim, const CRPulseConfig& cfg, int n_reps,
                              const std::vector<double>& phis, int control_init) {
  return run_amplification(sim.unitary(cr_pulse(cfg, +1)), n_reps, phis, control_init);
}

std::vector<LeakagePeak> find_peaks(const std::vector<double>& phis, const std::vector<double>& y,
                                    const PeakOptions& opt) {
  const size_t n = y.size();
  std::vector<LeakagePeak> out;
  if (n < 3) return out;
  // Noise from the second differences, so a broad, strong modulation does not raise the
  // threshold; the baseline is the scan minimum.
  std::vector<double> d2(n);
  for (size_t i = 0; i < n; ++i) d2[i] = y[(i + n - 1) % n] - 2 * y[i] + y[(i + 1) % n];
  const double d2_med = median(d2);
  std::vector<double> dev(n);
  for (size_t i = 0; i < n; ++i) dev[i] = std::abs(d2[i] - d2_med);
  const double sigma = 1.4826 * median(dev) / std::sqrt(6.0);
  const double threshold = *std::min_element(y.begin(), y.end()) + std::max(opt.mad_factor * sigma, opt.floor);
  for (size_t i = 0; i < n; ++i) {
    const double left = y[(i + n - 1) % n], right = y[(i + 1) % n];
    if (y[i] > threshold && y[i] > left && y[i] >= right) out.push_back({phis[i], y[i]});
  }
  return out;
}

LeakageReport classify_leakage(const LeakageScan& scan0_in, const LeakageScan& scan1_in, const PeakOptions& opt) {
  check_scan_pair(scan0_in, scan1_in);
  const LeakageScan& s0 = scan0_in.control_init == 0 ? scan0_in : scan1_in;
  const LeakageScan& s1 = scan0_in.control_init == 0 ? scan1_in : scan0_in;

  const auto p2_0 = find_peaks(s0.phis, s0.p2, opt);
  const auto p2_1 = find_peaks(s1.phis, s1.p2, opt);
  const auto fl_0 = find_peaks(s0.phis, s0.p_flip, opt);
  const auto fl_1 = find_peaks(s1.phis, s1.p_flip, opt);

  LeakageReport r;
  const auto max_of = [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); };

  // Same-phi flip peaks from both preparations: the 0-1 transition.
  std::vector<double> coincident;
  for (const auto& a : fl_0) {
    for (const auto& b : fl_1) {
      if (circular_distance(a.phi, b.phi) <= opt.coincide_tol) coincident.push_back(a.phi);
    }
  }
  if (!coincident.empty()) {
    r.detected.insert(LeakageType::l01);
    r.peak_phis[LeakageType::l01] = coincident;
    r.rate[LeakageType::l01] = rate_from_peak(std::min(0.9, std::max(max_of(s0.p_flip), max_of(s1.p_flip))), s0.n_reps);
  }
  // A strong |2> process also moves population through the other level, so unmatched
  // peaks are only an error when nothing else explains the scans.
  const bool stray_flips = coincident.empty() && (!fl_0.empty() || !fl_1.empty());

  std::vector<double> pair;
  if (has_pi_pair(p2_0, opt.pi_tol, &pair)) {
    r.detected.insert(LeakageType::l02_2);
    r.peak_phis[LeakageType::l02_2] = pair;
    r.rate[LeakageType::l02_2] = rate_from_peak(std::min(0.9, max_of(s0.p2)), s0.n_reps);
  }
  const bool stray_p2 = pair.empty() && !p2_0.empty() && coincident.empty();

  if (!p2_1.empty()) {
    r.detected.insert(LeakageType::l12);
    std::vector<double> phis;
    for (const auto& p : p2_1) phis.push_back(p.phi);
    r.peak_phis[LeakageType::l12] = phis;
    r.rate[LeakageType::l12] = rate_from_peak(std::min(0.9, max_of(s1.p2)), s1.n_reps);
  }
  if (r.empty() && stray_flips) throw UnclassifiedPattern("control flip peaks do not coincide between preparations", s0, s1);
  if (r.empty() && stray_p2) throw UnclassifiedPattern("|2> peaks from |0> without a pi-separated partner", s0, s1);
  return r;
}

double rate_from_peak(double peak, int n_reps) {
  if (peak > 0.9) throw RateSaturation("peak population above 0.9; use fewer repetitions");
  if (peak <= 0) return 0.0;
  const double theta = 2 * std::asin(std::sqrt(peak)) / n_reps;
  return std::pow(std::sin(0.5 * theta), 2);
}

double estimate_leakage_rate(const LeakageScan& scan, bool use_flip) {
  const auto& y = use_flip ? scan.p_flip : scan.p2;
  if (y.empty()) throw InvalidArgument("empty scan");
  return rate_from_peak(*std::max_element(y.begin(), y.end()), scan.n_reps);
}

double fit_leakage_rate(const Operator& pulse, LeakageType type, double phi, const std::vector<int>& ns) {
  // sin^2(n theta / 2) is single valued only while n theta < pi; a single pulse bounds theta.
  const double p_one = observable(pulse, type, phi, 1);
  if (p_one > 0.5) throw RateSaturation("a single pulse already leaks more than half the population");
  const double theta_one = 2 * std::asin(std::sqrt(p_one));
  std::vector<double> n_used, p_used;
  for (int n : ns) {
    if (n * theta_one > 0.8 * kPi) continue;
    const double p = observable(pulse, type, phi, n);
    if (p <= 0.9) {
      n_used.push_back(n);
      p_used.push_back(p);
    }
  }
  if (n_used.empty()) return p_one;
  const double theta0 = 2 * std::asin(std::sqrt(p_used.front())) / n_used.front();
  if (n_used.size() == 1 || theta0 == 0.0) return std::pow(std::sin(0.5 * theta0), 2);
  const int m = static_cast<int>(n_used.size());
  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    for (int i = 0; i < m; ++i) r(i) = std::pow(std::sin(0.5 * n_used[i] * x(0)), 2) - p_used[i];
  };
  Eigen::VectorXd x0(1);
  x0 << theta0;
  const double theta = least_squares(residual, x0, m).x(0);
  return std::pow(std::sin(0.5 * theta), 2);
}

double measure_leakage_rate(const Operator& pulse, LeakageType type) {
  // Locate the coherent-addition phase with a coarse scan, then polish it.
  const auto grid = phase_grid(48);
  const double theta_one = 2 * std::asin(std::sqrt(std::min(1.0, observable(pulse, type, 0.0, 1))));
  const int n_scan = theta_one > 0 ? std::clamp(static_cast<int>(0.75 * kPi / theta_one), 2, 4) : 4;
  size_t best = 0;
  double best_val = -1;
  for (size_t i = 0; i < grid.size(); ++i) {
    const double v = observable(pulse, type, grid[i], n_scan);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double step = grid[1] - grid[0];
  std::uintmax_t it = 40;
  const auto r = boost::math::tools::brent_find_minima(
      [&](double phi) { return -observable(pulse, type, phi, n_scan); }, grid[best] - step, grid[best] + step, 30, it);
  return fit_leakage_rate(pulse, type, r.first);
}

LeakageReport characterize_leakage(const PairSimulator& sim, const CRPulseConfig& cfg, int n_reps, int n_phis,
                                   const PeakOptions& opt) {
  const Operator pulse = sim.unitary(cr_pulse(cfg, +1));
  const auto phis = phase_grid(n_phis);
  // Coherent build-up wraps around once n theta passes pi, so a strongly leaking pulse can
  // look clean after n_reps repetitions. Bound n with the single-pulse populations first.
  double p_one = 0;
  for (int init : {0, 1}) {
    const LeakageScan one = run_amplification(pulse, 1, {0.0}, init);
    p_one = std::max({p_one, one.p2.front(), one.p_flip.front()});
  }
  if (p_one > 0.5) throw RateSaturation("a single pulse already leaks more than half the population");
  // Phase structure needs at least two repetitions.
  if (p_one > 0) n_reps = std::clamp(static_cast<int>(0.75 * kPi / (2 * std::asin(std::sqrt(p_one)))), 2, n_reps);
  // Halve the repetitions until no scan is close to saturation.
  for (int n = n_reps;; n = std::max(2, n / 2)) {
    const LeakageScan s0 = run_amplification(pulse, n, phis, 0);
    const LeakageScan s1 = run_amplification(pulse, n, phis, 1);
    double peak = 0;
    for (const auto* v : {&s0.p2, &s0.p_flip, &s1.p2, &s1.p_flip}) peak = std::max(peak, *std::max_element(v->begin(), v->end()));
    if (peak > 0.5 && n > 2) continue;
    if (peak > 0.9) throw RateSaturation("two pulses already leak nearly all the population");
    LeakageReport r = classify_leakage(s0, s1, opt);
    for (auto it = r.detected.begin(); it != r.detected.end();) {
      const double rate = measure_leakage_rate(pulse, *it);
      if (rate < opt.min_rate) {
        r.rate.erase(*it);
        r.peak_phis.erase(*it);
        it = r.detected.erase(it);
      } else {
        r.rate[*it] = rate;
        ++it;
      }
    }
    return r;
  }
}

double worst_leakage_rate(const Operator& pulse) {
  double worst = 0;
  for (LeakageType t : {LeakageType::l01, LeakageType::l12, LeakageType::l02_2}) {
    worst = std::max(worst, measure_leakage_rate(pulse, t));
  }
  return worst;
}

double leakage_transition_ghz(const PairModel& model, LeakageType type) {
  switch (type) {
    case LeakageType::l01:
      return model.transition_frequency_ghz(Qubit::control, 0, 1);
    case LeakageType::l12:
      return model.transition_frequency_ghz(Qubit::control, 1, 2);
    case LeakageType::l02_2:
      return 0.5 * model.transition_frequency_ghz(Qubit::control, 0, 2);
  }
  throw InvalidArgument("unknown leakage type");
}

double area_preserving_amplitude(const CRPulseConfig& cfg, double new_flat) {
  const double a_old = gaussian_square(1.0, cfg.sigma(), cfg.rise, cfg.cr_flat, 0.25).area().real();
  const double a_new = gaussian_square(1.0, cfg.sigma(), cfg.rise, new_flat, 0.25).area().real();
  return cfg.cr_amplitude * a_old / a_new;
}

namespace {

CRPulseConfig recalibrate(const PairSimulator& sim, CRPulseConfig cfg, const CROptions& opt) {
  for (int round = 0; round < 3; ++round) {
    cfg = retune_zx(sim, cfg, opt);
    cfg = calibrate_cancellation(sim, cfg);
  }
  return retune_zx(sim, cfg, opt);
}

LeakageType dominant(const LeakageReport& r) {
  LeakageType best = *r.detected.begin();
  for (LeakageType t : r.detected) {
    if (r.rate.at(t) > r.rate.at(best)) best = t;
  }
  return best;
}

constexpr double kDragLimit = 8.0;  // ns

CRPulseConfig apply_drag_for(const PairSimulator& sim, CRPulseConfig cfg, LeakageType type, const CROptions& opt) {
  const PairModel& m = sim.model();
  const double f_cr = m.reference_frequency_ghz(Qubit::target);
  const double alpha0 = drag_alpha(leakage_transition_ghz(m, type), f_cr, type == LeakageType::l02_2);
  auto rate_at = [&](double alpha) {
    CRPulseConfig c = cfg;
    c.drag_alpha = alpha;
    return worst_leakage_rate(sim.unitary(cr_pulse(c, +1)));
  };
  // The closed form diverges near the two-photon resonance, so it only seeds a bounded grid.
  std::vector<double> grid;
  for (double a = -kDragLimit; a <= kDragLimit + 1e-9; a += 1.0) grid.push_back(a);
  for (double s : {0.7, 1.0, 1.3}) {
    if (std::abs(s * alpha0) < kDragLimit) grid.push_back(s * alpha0);
  }
  double start = 0, best = 2.0;
  for (double a : grid) {
    const double v = rate_at(a);
    if (v < best) {
      best = v;
      start = a;
    }
  }
  std::uintmax_t it = 40;
  const auto r = boost::math::tools::brent_find_minima(rate_at, start - 1.0, start + 1.0, 24, it);
  cfg.drag_alpha = r.first;
  return recalibrate(sim, cfg, opt);
}

}  // namespace

SuppressionResult suppress_leakage(const PairSimulator& sim, const CRPulseConfig& cfg, const LeakageReport& report,
                                   const CROptions& opt) {
  SuppressionResult out{cfg, report, report, false, 0.0};
  if (report.empty()) return out;

  out.residual = 2.0;
  const bool mixed = report.detected.count(LeakageType::l02_2) && report.detected.size() > 1;
  auto stretches = [&] {
    // The two-photon rate oscillates with the flat length; rank 10-20% stretches by it.
    std::vector<std::pair<double, CRPulseConfig>> v;
    for (double s : {1.10, 1.125, 1.15, 1.175, 1.20}) {
      CRPulseConfig t = cfg;
      t.cr_flat = 0.25 * std::round(cfg.cr_flat * s / 0.25);
      t.cr_amplitude = area_preserving_amplitude(cfg, t.cr_flat);
      t.cancel_amplitude *= t.cr_amplitude / cfg.cr_amplitude;
      v.emplace_back(measure_leakage_rate(sim.unitary(cr_pulse(t, +1)), LeakageType::l02_2), t);
    }
    std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    return v;
  };
  auto attempt = [&](CRPulseConfig c, bool stretched) {
    LeakageReport current = report;
    if (stretched) {
      c = recalibrate(sim, c, opt);
      current = characterize_leakage(sim, c);
    }
    if (!current.empty()) c = apply_drag_for(sim, c, dominant(current), opt);
    const Operator pulse = sim.unitary(cr_pulse(c, +1));
    LeakageReport after;
    double residual = 0;
    for (LeakageType t : {LeakageType::l01, LeakageType::l12, LeakageType::l02_2}) {
      const double rate = measure_leakage_rate(pulse, t);
      after.rate[t] = rate;
      if (rate >= 1e-3) after.detected.insert(t);
      residual = std::max(residual, rate);
    }
    if (residual < out.residual) {
      out.cfg = c;
      out.after = after;
      out.residual = residual;
      out.stretched = stretched;
    }
  };

  if (!mixed) attempt(cfg, false);
  // A lone two-photon process that DRAG leaves above ~1e-4 also gets the stretch.
  if (mixed || (report.detected.count(LeakageType::l02_2) && out.residual > 2e-4)) {
    for (const auto& [rate, t] : stretches()) attempt(t, true);
  }
  if (out.residual >= 1e-3) {
    throw SuppressionFailure("leakage " + std::to_string(out.residual) + " per pulse remains after suppression",
                             out.residual);
  }
  return out;
}

}  // namespace ecr
