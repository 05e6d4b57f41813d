#include "ecr/budget.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ecr {

namespace {

double qubit_fidelity(double t1_us, double t2_us, double t_ns) {
  const double t = t_ns * 1e-3;
  return (3 + std::exp(-t / t1_us) + 2 * std::exp(-t / t2_us)) / 6;
}

}  // namespace

const char* to_string(Component c) {
  switch (c) {
    case Component::incoherent:
      return "incoherent";
    case Component::iz:
      return "iz";
    case Component::zz:
      return "zz";
    case Component::leakage:
      return "leakage";
    case Component::unexplained:
      return "unexplained";
  }
  return "?";
}

Component component_from_string(const std::string& s) {
  for (Component c : kComponents)
    if (s == to_string(c)) return c;
  throw InvalidArgument("unknown budget component '" + s + "'");
}

double incoherent_epg(double t1_c_us, double t2e_c_us, double t1_t_us, double t2e_t_us, double duration_ns) {
  for (double t : {t1_c_us, t2e_c_us, t1_t_us, t2e_t_us})
    if (!(t > 0)) throw InvalidArgument("coherence times must be positive");
  if (!(duration_ns >= 0)) throw InvalidArgument("gate duration must be non-negative");
  return 1 - qubit_fidelity(t1_c_us, t2e_c_us, duration_ns) * qubit_fidelity(t1_t_us, t2e_t_us, duration_ns);
}

double incoherent_epg(const PairParams& pair, double duration_ns) {
  return incoherent_epg(pair.control.t1_us, pair.control.t2e_us, pair.target.t1_us, pair.target.t2e_us, duration_ns);
}

double ErrorBudget::known() const {
  double s = 0;
  for (const auto& [c, v] : components)
    if (c != Component::unexplained) s += v;
  return s;
}

double total_leakage_rate(const LeakageReport& report) {
  double s = 0;
  for (LeakageType t : report.detected) {
    const auto it = report.rate.find(t);
    if (it != report.rate.end()) s += it->second;
  }
  return s;
}

ErrorBudget assemble_budget(const BudgetInputs& in, double irb_epg, double irb_epg_err, bool suppressed) {
  if (in.tomography_epoch != in.leakage_epoch || in.tomography_epoch != in.irb_epoch) {
    throw EpochMismatch("budget inputs for " + in.label + " come from different calibration snapshots");
  }
  for (double v : {in.incoherent, in.iz_epg, in.zz_epg, in.leakage_rate})
    if (!(v >= 0)) throw InvalidArgument("budget components must be non-negative");
  ErrorBudget b;
  b.label = in.label;
  b.suppressed = suppressed;
  b.irb_epg = irb_epg;
  b.irb_epg_err = irb_epg_err;
  b.components[Component::incoherent] = in.incoherent;
  b.components[Component::iz] = in.iz_epg;
  b.components[Component::zz] = in.zz_epg;
  b.components[Component::leakage] = 2 * in.leakage_rate;
  b.unexplained_raw = irb_epg - b.known();
  b.components[Component::unexplained] = std::max(0.0, b.unexplained_raw);
  return b;
}

ErrorBudget assemble_budget(const BudgetInputs& in, const IRBResult& irb, bool suppressed) {
  return assemble_budget(in, irb.epg, irb.epg_err, suppressed);
}

double median(std::vector<double> v) {
  if (v.empty()) throw InvalidArgument("median of an empty set");
  std::ranges::sort(v);
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<CdfPoint> empirical_cdf(std::vector<double> v) {
  std::ranges::sort(v);
  std::vector<CdfPoint> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back({v[i], double(i + 1) / v.size()});
  return out;
}

BeforeAfter compare_before_after(const std::vector<ErrorBudget>& naive, const std::vector<ErrorBudget>& corrected) {
  std::map<std::string, const ErrorBudget*> after;
  for (const auto& b : corrected) after[b.label] = &b;
  if (after.size() != corrected.size() || naive.size() != corrected.size() || naive.empty()) {
    throw InvalidArgument("before and after ensembles must cover the same pairs");
  }
  BeforeAfter s;
  for (const auto& b : naive) {
    const auto it = after.find(b.label);
    if (it == after.end()) throw InvalidArgument("pair " + b.label + " missing from the corrected ensemble");
    s.labels.push_back(b.label);
    s.before.push_back(b.irb_epg);
    s.after.push_back(it->second->irb_epg);
    s.ratio.push_back(it->second->irb_epg > 0 ? b.irb_epg / it->second->irb_epg
                                              : std::numeric_limits<double>::infinity());
  }
  const auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
  s.median_before = median(s.before);
  s.median_after = median(s.after);
  s.mean_before = mean(s.before);
  s.mean_after = mean(s.after);
  s.median_ratio = median(s.ratio);
  s.cdf_before = empirical_cdf(s.before);
  s.cdf_after = empirical_cdf(s.after);
  return s;
}

}  // namespace ecr
