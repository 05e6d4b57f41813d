#pragma once

// Per-pair error budgets: incoherent, IZ, ZZ and leakage contributions against the IRB
// error per gate, and ensemble before/after summaries.

#include <map>
#include <string>
#include <vector>

#include "ecr/benchmarking.hpp"
#include "ecr/leakage.hpp"

namespace ecr {

class EpochMismatch : public Error {
 public:
  using Error::Error;
};

enum class Component { incoherent, iz, zz, leakage, unexplained };
const char* to_string(Component c);
Component component_from_string(const std::string& s);
inline constexpr std::array<Component, 5> kComponents{Component::incoherent, Component::iz, Component::zz,
                                                      Component::leakage, Component::unexplained};

/// 1 - F_c F_t with F_q = (3 + exp(-t/T1) + 2 exp(-t/T2)) / 6. Times in us, duration in ns.
double incoherent_epg(double t1_c_us, double t2e_c_us, double t1_t_us, double t2e_t_us, double duration_ns);
double incoherent_epg(const PairParams& pair, double duration_ns);

struct ErrorBudget {
  std::string label;
  std::map<Component, double> components;  // unexplained floored at 0
  double unexplained_raw = 0;              // irb_epg - sum of known components, signed
  double irb_epg = 0;
  double irb_epg_err = 0;
  bool suppressed = false;

  double known() const;
};

/// Inputs of one budget, each stamped with the calibration snapshot it came from.
struct BudgetInputs {
  std::string label;
  double incoherent = 0;
  double iz_epg = 0;
  double zz_epg = 0;
  double leakage_rate = 0;  // per ZX(pi/4) pulse, summed over processes
  std::string tomography_epoch;
  std::string leakage_epoch;
  std::string irb_epoch;
};

/// Sum of detected per-pulse rates.
double total_leakage_rate(const LeakageReport& report);

/// Leakage counts twice (two CR pulses per ECR). Throws EpochMismatch when the inputs come
/// from different snapshots.
ErrorBudget assemble_budget(const BudgetInputs& in, const IRBResult& irb, bool suppressed);
ErrorBudget assemble_budget(const BudgetInputs& in, double irb_epg, double irb_epg_err, bool suppressed);

struct CdfPoint {
  double epg = 0;
  double fraction = 0;
};

struct BeforeAfter {
  std::vector<std::string> labels;
  std::vector<double> before, after, ratio;  // ratio = before / after
  double median_before = 0, median_after = 0;
  double mean_before = 0, mean_after = 0;
  double median_ratio = 0;
  std::vector<CdfPoint> cdf_before, cdf_after;
};

/// Pairs are matched by label; throws InvalidArgument when the label sets differ.
BeforeAfter compare_before_after(const std::vector<ErrorBudget>& naive, const std::vector<ErrorBudget>& corrected);

double median(std::vector<double> v);
std::vector<CdfPoint> empirical_cdf(std::vector<double> v);

}  // namespace ecr
