#include "ecr/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ecr {

namespace {

constexpr int kSchemaVersion = 1;

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw InvalidArgument(std::string("missing field '") + key + "'");
  return j.at(key).get<T>();
}

template <typename T>
T field_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

// ---- physics parameters

Json transmon_json(const TransmonParams& t) {
  return {{"frequency_ghz", t.frequency_ghz},
          {"anharmonicity_mhz", t.anharmonicity_mhz},
          {"t1_us", t.t1_us},
          {"t2e_us", t.t2e_us}};
}

TransmonParams transmon_from(const Json& j) {
  TransmonParams t;
  t.frequency_ghz = field<double>(j, "frequency_ghz");
  t.anharmonicity_mhz = field_or(j, "anharmonicity_mhz", t.anharmonicity_mhz);
  t.t1_us = field_or(j, "t1_us", t.t1_us);
  t.t2e_us = field_or(j, "t2e_us", t.t2e_us);
  return t;
}

Json sx_json(const SingleQubitGateConfig& c) {
  return {{"amplitude_rad_per_ns", c.amplitude},
          {"sigma_ns", c.sigma},
          {"duration_ns", c.duration},
          {"drag_alpha_ns", c.drag_alpha}};
}

SingleQubitGateConfig sx_from(const Json& j) {
  SingleQubitGateConfig c;
  c.amplitude = field<double>(j, "amplitude_rad_per_ns");
  c.sigma = field<double>(j, "sigma_ns");
  c.duration = field<double>(j, "duration_ns");
  c.drag_alpha = field<double>(j, "drag_alpha_ns");
  return c;
}

Json cr_json(const CRPulseConfig& c) {
  const auto& k = c.corrections;
  return {{"cr_amplitude_rad_per_ns", c.cr_amplitude},
          {"cr_phase_rad", c.cr_phase},
          {"cr_flat_ns", c.cr_flat},
          {"rise_ns", c.rise},
          {"drag_alpha_ns", c.drag_alpha},
          {"cancel_amplitude_rad_per_ns", c.cancel_amplitude},
          {"cancel_phase_rad", c.cancel_phase},
          {"corrections",
           {{"theta_c_rad", k.theta_c},
            {"zy_phase_fix_rad", k.zy_phase_fix},
            {"y_comp_angle_rad", k.y_comp_angle},
            {"zx_rescale", k.zx_rescale}}}};
}

CRPulseConfig cr_from(const Json& j) {
  CRPulseConfig c;
  c.cr_amplitude = field<double>(j, "cr_amplitude_rad_per_ns");
  c.cr_phase = field<double>(j, "cr_phase_rad");
  c.cr_flat = field<double>(j, "cr_flat_ns");
  c.rise = field<double>(j, "rise_ns");
  c.drag_alpha = field<double>(j, "drag_alpha_ns");
  c.cancel_amplitude = field<double>(j, "cancel_amplitude_rad_per_ns");
  c.cancel_phase = field<double>(j, "cancel_phase_rad");
  const Json& k = j.at("corrections");
  c.corrections.theta_c = field<double>(k, "theta_c_rad");
  c.corrections.zy_phase_fix = field<double>(k, "zy_phase_fix_rad");
  c.corrections.y_comp_angle = field<double>(k, "y_comp_angle_rad");
  c.corrections.zx_rescale = field<double>(k, "zx_rescale");
  return c;
}

Json calibration_json(const PairCalibration& p) {
  Json j{{"label", p.label}, {"ok", p.ok}};
  if (!p.ok) j["error"] = p.error;
  j["sx"] = {{"control", sx_json(p.sq.control)}, {"target", sx_json(p.sq.target)}};
  j["cr"] = cr_json(p.cr);
  return j;
}

PairCalibration calibration_from(const Json& j) {
  PairCalibration p;
  p.label = field<std::string>(j, "label");
  p.ok = field<bool>(j, "ok");
  p.error = field_or<std::string>(j, "error", "");
  p.sq.control = sx_from(j.at("sx").at("control"));
  p.sq.target = sx_from(j.at("sx").at("target"));
  p.cr = cr_from(j.at("cr"));
  return p;
}

// ---- results

Json hamiltonian_json(const EffectiveHamiltonian& h) {
  Json j = Json::object();
  for (Term t : kAllTerms) j[std::string("omega_") + to_string(t)] = h[t];
  return j;
}

EffectiveHamiltonian hamiltonian_from(const Json& j) {
  EffectiveHamiltonian h;
  for (Term t : kAllTerms) h[t] = field<double>(j, (std::string("omega_") + to_string(t)).c_str());
  return h;
}

Json leakage_json(const LeakageReport& r) {
  Json detected = Json::array(), rate = Json::object(), peaks = Json::object();
  for (LeakageType t : r.detected) detected.push_back(to_string(t));
  for (const auto& [t, v] : r.rate) rate[to_string(t)] = v;
  for (const auto& [t, v] : r.peak_phis) peaks[to_string(t)] = v;
  return {{"detected", detected}, {"rate_per_pulse", rate}, {"peak_phis_rad", peaks}};
}

LeakageReport leakage_from(const Json& j) {
  LeakageReport r;
  for (const auto& s : j.at("detected")) r.detected.insert(leakage_type_from_string(s.get<std::string>()));
  for (const auto& [k, v] : j.at("rate_per_pulse").items()) r.rate[leakage_type_from_string(k)] = v.get<double>();
  for (const auto& [k, v] : j.at("peak_phis_rad").items())
    r.peak_phis[leakage_type_from_string(k)] = v.get<std::vector<double>>();
  return r;
}

Json scan_json(const LeakageScan& s) {
  return {{"control_init", s.control_init}, {"n_reps", s.n_reps}, {"phis_rad", s.phis}, {"p2", s.p2},
          {"p_flip", s.p_flip}};
}

LeakageScan scan_from(const Json& j) {
  LeakageScan s;
  s.control_init = field<int>(j, "control_init");
  s.n_reps = field<int>(j, "n_reps");
  s.phis = field<std::vector<double>>(j, "phis_rad");
  s.p2 = field<std::vector<double>>(j, "p2");
  s.p_flip = field<std::vector<double>>(j, "p_flip");
  return s;
}

Json curve_json(const RBCurve& c) {
  return {{"lengths", c.lengths},
          {"samples", c.samples},
          {"mean", c.mean},
          {"stddev", c.stddev},
          {"fit",
           {{"a", c.fit.a},
            {"alpha", c.fit.alpha},
            {"b", c.fit.b},
            {"alpha_err", c.fit.alpha_err},
            {"residual_rms", c.fit.residual_rms}}}};
}

RBCurve curve_from(const Json& j) {
  RBCurve c;
  c.lengths = field<std::vector<int>>(j, "lengths");
  c.samples = field<std::vector<std::vector<double>>>(j, "samples");
  c.mean = field<std::vector<double>>(j, "mean");
  c.stddev = field<std::vector<double>>(j, "stddev");
  const Json& f = j.at("fit");
  c.fit = {field<double>(f, "a"), field<double>(f, "alpha"), field<double>(f, "b"), field<double>(f, "alpha_err"),
           field<double>(f, "residual_rms")};
  return c;
}

Json irb_json(const IRBResult& r) {
  return {{"reference", curve_json(r.reference)},
          {"interleaved", curve_json(r.interleaved)},
          {"alpha_ref", r.alpha_ref},
          {"alpha_int", r.alpha_int},
          {"epg", r.epg},
          {"epg_err", r.epg_err},
          {"negative_warning", r.negative_warning},
          {"n_seeds", r.n_seeds},
          {"shots", r.shots}};
}

IRBResult irb_from(const Json& j) {
  IRBResult r;
  r.reference = curve_from(j.at("reference"));
  r.interleaved = curve_from(j.at("interleaved"));
  r.alpha_ref = field<double>(j, "alpha_ref");
  r.alpha_int = field<double>(j, "alpha_int");
  r.epg = field<double>(j, "epg");
  r.epg_err = field<double>(j, "epg_err");
  r.negative_warning = field<bool>(j, "negative_warning");
  r.n_seeds = field<int>(j, "n_seeds");
  r.shots = field<int>(j, "shots");
  return r;
}

Json budget_json(const ErrorBudget& b) {
  Json comps = Json::object();
  for (const auto& [c, v] : b.components) comps[to_string(c)] = v;
  return {{"components", comps},
          {"unexplained_raw", b.unexplained_raw},
          {"irb_epg", b.irb_epg},
          {"irb_epg_err", b.irb_epg_err},
          {"suppressed", b.suppressed}};
}

ErrorBudget budget_from(const Json& j, const std::string& label) {
  ErrorBudget b;
  b.label = label;
  for (const auto& [k, v] : j.at("components").items()) b.components[component_from_string(k)] = v.get<double>();
  b.unexplained_raw = field<double>(j, "unexplained_raw");
  b.irb_epg = field<double>(j, "irb_epg");
  b.irb_epg_err = field<double>(j, "irb_epg_err");
  b.suppressed = field<bool>(j, "suppressed");
  return b;
}

Json pair_result_json(const PairResult& r) {
  Json j{{"label", r.label}, {"ok", r.ok}};
  if (!r.ok) {
    j["failed_stage"] = r.failed_stage;
    j["error"] = r.error;
    return j;
  }
  Json terms = Json::object();
  for (const auto& [t, v] : r.term_epg) terms[to_string(t)] = v;
  j["hamiltonian_rad_per_ns"] = hamiltonian_json(r.hamiltonian);
  j["segment_duration_ns"] = r.segment_duration;
  j["ecr_duration_ns"] = r.ecr_duration;
  j["term_epg"] = terms;
  j["leakage"] = leakage_json(r.leakage);
  j["scans"] = {scan_json(r.scan0), scan_json(r.scan1)};
  j["stretched"] = r.stretched;
  j["zz_compensated"] = r.zz_compensated;
  j["cr"] = cr_json(r.cr);
  j["irb"] = irb_json(r.irb);
  j["budget"] = budget_json(r.budget);
  return j;
}

PairResult pair_result_from(const Json& j) {
  PairResult r;
  r.label = field<std::string>(j, "label");
  r.ok = field<bool>(j, "ok");
  if (!r.ok) {
    r.failed_stage = field<std::string>(j, "failed_stage");
    r.error = field<std::string>(j, "error");
    return r;
  }
  r.hamiltonian = hamiltonian_from(j.at("hamiltonian_rad_per_ns"));
  r.segment_duration = field<double>(j, "segment_duration_ns");
  r.ecr_duration = field<double>(j, "ecr_duration_ns");
  for (const auto& [k, v] : j.at("term_epg").items()) r.term_epg[term_from_string(k)] = v.get<double>();
  r.leakage = leakage_from(j.at("leakage"));
  r.scan0 = scan_from(j.at("scans").at(0));
  r.scan1 = scan_from(j.at("scans").at(1));
  r.stretched = field<bool>(j, "stretched");
  r.zz_compensated = field<bool>(j, "zz_compensated");
  r.cr = cr_from(j.at("cr"));
  r.irb = irb_from(j.at("irb"));
  r.budget = budget_from(j.at("budget"), r.label);
  return r;
}

void check_schema(const Json& j, const char* kind) {
  if (field_or(j, "kind", std::string()) != kind) throw InvalidArgument(std::string("not a ") + kind + " document");
  if (field_or(j, "schema_version", 0) != kSchemaVersion)
    throw InvalidArgument(std::string("unsupported ") + kind + " schema version");
}

const PairResult* find(const std::vector<PairResult>& v, const std::string& label) {
  for (const auto& r : v)
    if (r.label == label) return &r;
  return nullptr;
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Round axis maximum: 1, 2 or 5 times a power of ten, split into `ticks` steps.
double nice_step(double max, int ticks) {
  const double raw = max / ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
    if (m * mag >= raw) return m * mag;
  return 10 * mag;
}

std::string percent(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << 100 * v << '%';
  return os.str();
}

const char* component_color(Component c) {
  switch (c) {
    case Component::incoherent: return "#4c72b0";
    case Component::iz: return "#dd8452";
    case Component::zz: return "#55a868";
    case Component::leakage: return "#c44e52";
    case Component::unexplained: return "#bbbbbb";
  }
  return "#000";
}

class Svg {
 public:
  Svg(double w, double h) : w_(w), h_(h) {}
  std::ostringstream& body() { return os_; }
  void text(double x, double y, const std::string& s, const char* anchor = "start", int size = 11) {
    os_ << "<text x=\"" << px(x) << "\" y=\"" << px(y) << "\" font-size=\"" << size << "\" text-anchor=\"" << anchor
        << "\">" << xml_escape(s) << "</text>\n";
  }
  void line(double x1, double y1, double x2, double y2, const char* extra = "") {
    os_ << "<line x1=\"" << px(x1) << "\" y1=\"" << px(y1) << "\" x2=\"" << px(x2) << "\" y2=\"" << px(y2)
        << "\" stroke=\"#333\" " << extra << "/>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts, const char* color, bool dashed,
                const std::string& cls) {
    os_ << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
        << (dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
    for (const auto& [x, y] : pts) os_ << px(x) << ',' << px(y) << ' ';
    os_ << "\"/>\n";
  }
  std::string str() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(w_) << "\" height=\"" << px(h_)
        << "\" font-family=\"sans-serif\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << os_.str() << "</svg>\n";
    return out.str();
  }

 private:
  double w_, h_;
  std::ostringstream os_;
};

}  // namespace

// ---- documents

Json to_json(const DeviceConfig& c) {
  Json pairs = Json::array();
  for (const auto& p : c.pairs) {
    pairs.push_back({{"label", p.params.label},
                     {"j_mhz", p.params.j_mhz},
                     {"amplitude_ceiling_rad_per_ns", p.amplitude_ceiling},
                     {"control", transmon_json(p.params.control)},
                     {"target", transmon_json(p.params.target)}});
  }
  Json j{{"kind", "device_config"}, {"schema_version", kSchemaVersion}};
  if (c.has_seed) j["seed"] = c.seed;
  j["dt_ns"] = c.dt;
  j["shots"] = c.shots;
  j["exact"] = c.exact;
  j["rb"] = {{"n_seeds", c.rb_seeds}, {"lengths", c.rb_lengths}};
  j["readout"] = {{"assignment_error", c.readout.assignment_error},
                  {"leak_reads_one", c.readout.leak_reads_one}};
  j["threads"] = c.threads;
  j["pairs"] = pairs;
  return j;
}

DeviceConfig config_from_json(const Json& j) {
  DeviceConfig c;
  try {
    if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
    if (j.contains("kind")) check_schema(j, "device_config");
    if (j.contains("seed")) {
      c.seed = j.at("seed").get<std::uint64_t>();
      c.has_seed = true;
    }
    c.dt = field_or(j, "dt_ns", c.dt);
    c.shots = field_or(j, "shots", c.shots);
    c.exact = field_or(j, "exact", c.exact);
    if (j.contains("rb")) {
      c.rb_seeds = field_or(j.at("rb"), "n_seeds", c.rb_seeds);
      c.rb_lengths = field_or(j.at("rb"), "lengths", c.rb_lengths);
    }
    if (j.contains("readout")) {
      c.readout.assignment_error = field_or(j.at("readout"), "assignment_error", c.readout.assignment_error);
      c.readout.leak_reads_one = field_or(j.at("readout"), "leak_reads_one", c.readout.leak_reads_one);
    }
    c.threads = field_or(j, "threads", c.threads);
    for (const auto& p : field<Json>(j, "pairs")) {
      PairConfig pc;
      pc.params.label = field<std::string>(p, "label");
      pc.params.j_mhz = field_or(p, "j_mhz", pc.params.j_mhz);
      pc.amplitude_ceiling = field_or(p, "amplitude_ceiling_rad_per_ns", pc.amplitude_ceiling);
      pc.params.control = transmon_from(p.at("control"));
      pc.params.target = transmon_from(p.at("target"));
      c.pairs.push_back(pc);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return c;
}

Json to_json(const DeviceState& s) {
  Json pairs = Json::array();
  for (const auto& p : s.pairs) pairs.push_back(calibration_json(p));
  return {{"kind", "device_state"},
          {"schema_version", kSchemaVersion},
          {"snapshot", s.snapshot},
          {"created", s.created},
          {"pairs", pairs}};
}

DeviceState state_from_json(const Json& j) {
  check_schema(j, "device_state");
  DeviceState s;
  s.snapshot = field<std::string>(j, "snapshot");
  s.created = field_or<std::string>(j, "created", "");
  for (const auto& p : j.at("pairs")) s.pairs.push_back(calibration_from(p));
  return s;
}

Json to_json(const ResultsDocument& r) {
  Json before = Json::array(), after = Json::array();
  for (const auto& p : r.before) before.push_back(pair_result_json(p));
  for (const auto& p : r.after) after.push_back(pair_result_json(p));
  return {{"kind", "results"},
          {"schema_version", r.schema_version},
          {"snapshot", r.snapshot},
          {"created", r.created},
          {"units",
           {{"epg", "probability per ECR"},
            {"leakage rate", "probability per ZX(pi/4) pulse"},
            {"omega", "rad/ns"},
            {"phi", "rad"}}},
          {"before", before},
          {"after", after}};
}

ResultsDocument results_from_json(const Json& j) {
  check_schema(j, "results");
  ResultsDocument r;
  r.schema_version = field<int>(j, "schema_version");
  r.snapshot = field<std::string>(j, "snapshot");
  r.created = field_or<std::string>(j, "created", "");
  for (const auto& p : j.at("before")) r.before.push_back(pair_result_from(p));
  for (const auto& p : j.at("after")) r.after.push_back(pair_result_from(p));
  return r;
}

std::string content_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string snapshot_of(const DeviceConfig& config, const std::vector<PairCalibration>& pairs) {
  Json cal = Json::array();
  for (const auto& p : pairs) cal.push_back(calibration_json(p));
  return content_hash(Json{{"config", to_json(config)}, {"calibration", cal}}.dump());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out << text;
    if (!out) throw InvalidArgument("write failed for " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

Json read_json(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

// ---- tables

std::string budget_csv(const ResultsDocument& r) {
  std::ostringstream os;
  os << "pair,component,epg_before,epg_after,irb_before,irb_after\n";
  for (const auto& b : r.before) {
    const PairResult* a = find(r.after, b.label);
    const bool has_a = a != nullptr && a->ok;
    for (Component c : kComponents) {
      os << b.label << ',' << to_string(c) << ',';
      if (b.ok) os << num(b.budget.components.at(c));
      os << ',';
      if (has_a) os << num(a->budget.components.at(c));
      os << ',';
      if (b.ok) os << num(b.budget.irb_epg);
      os << ',';
      if (has_a) os << num(a->budget.irb_epg);
      os << '\n';
    }
  }
  return os.str();
}

std::string survival_csv(const ResultsDocument& r) {
  std::ostringstream os;
  os << "pair,run,curve,length,mean,stddev\n";
  auto emit = [&](const std::vector<PairResult>& v, const char* run) {
    for (const auto& p : v) {
      if (!p.ok) continue;
      for (const auto* c : {&p.irb.reference, &p.irb.interleaved})
        for (std::size_t i = 0; i < c->lengths.size(); ++i)
          os << p.label << ',' << run << ',' << (c == &p.irb.reference ? "reference" : "interleaved") << ','
             << c->lengths[i] << ',' << num(c->mean[i]) << ',' << num(c->stddev[i]) << '\n';
    }
  };
  emit(r.before, "before");
  emit(r.after, "after");
  return os.str();
}

// ---- plots

std::string budget_svg(const ResultsDocument& r) {
  const double left = 60, top = 30, height = 260, group = 44, bar = 16;
  const double width = left + 20 + group * static_cast<double>(r.before.size()) + 140;
  double ymax = 0;
  auto total = [](const PairResult* p) {
    if (p == nullptr || !p->ok) return 0.0;
    double s = 0;
    for (const auto& [c, v] : p->budget.components) s += v;
    return std::max(s, p->budget.irb_epg);
  };
  for (const auto& b : r.before) ymax = std::max({ymax, total(&b), total(find(r.after, b.label))});
  if (ymax <= 0) ymax = 1e-3;
  const double step = nice_step(ymax, 5);
  ymax = step * std::ceil(ymax / step);
  auto y = [&](double v) { return top + height * (1 - v / ymax); };

  Svg svg(width, top + height + 70);
  auto& os = svg.body();
  svg.text(left, 18, "EPG budget per pair (left: before, right: after)", "start", 13);
  svg.line(left, top, left, top + height);
  svg.line(left, top + height, width - 140, top + height);
  for (double v = 0; v <= ymax * (1 + 1e-9); v += step) svg.text(left - 4, y(v) + 4, percent(v), "end", 10);
  double x = left + 10;
  for (const auto& b : r.before) {
    os << "<g class=\"pair\" data-label=\"" << xml_escape(b.label) << "\">\n";
    const PairResult* a = find(r.after, b.label);
    int slot = 0;
    for (const PairResult* p : {&b, a}) {
      const double bx = x + slot * (bar + 2);
      const char* cls = slot == 0 ? "before" : "after";
      ++slot;
      if (p == nullptr || !p->ok) continue;
      os << "<g class=\"bar " << cls << "\">\n";
      double base = 0;
      for (Component c : kComponents) {
        const double v = p->budget.components.at(c);
        if (v <= 0) continue;
        os << "<rect class=\"" << to_string(c) << "\" x=\"" << px(bx) << "\" y=\"" << px(y(base + v)) << "\" width=\""
           << px(bar) << "\" height=\"" << px(y(base) - y(base + v)) << "\" fill=\"" << component_color(c)
           << "\"/>\n";
        base += v;
      }
      const double e = p->budget.irb_epg;
      os << "<line class=\"irb\" x1=\"" << px(bx - 2) << "\" x2=\"" << px(bx + bar + 2) << "\" y1=\"" << px(y(e))
         << "\" y2=\"" << px(y(e)) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
      os << "</g>\n";
    }
    os << "<text x=\"" << px(x + bar) << "\" y=\"" << px(top + height + 12) << "\" font-size=\"9\" "
       << "text-anchor=\"end\" transform=\"rotate(-45 " << px(x + bar) << ' ' << px(top + height + 12) << ")\">"
       << xml_escape(b.label) << "</text>\n";
    os << "</g>\n";
    x += group;
  }
  double ly = top;
  for (Component c : kComponents) {
    os << "<rect x=\"" << px(width - 130) << "\" y=\"" << px(ly) << "\" width=\"10\" height=\"10\" fill=\""
       << component_color(c) << "\"/>\n";
    svg.text(width - 115, ly + 9, to_string(c), "start", 10);
    ly += 16;
  }
  svg.line(width - 130, ly + 5, width - 120, ly + 5, "stroke-width=\"2\"");
  svg.text(width - 115, ly + 9, "IRB EPG", "start", 10);
  return svg.str();
}

std::string cdf_svg(const ResultsDocument& r) {
  std::vector<double> before, after;
  for (const auto& p : r.before)
    if (p.ok) before.push_back(p.budget.irb_epg);
  for (const auto& p : r.after)
    if (p.ok) after.push_back(p.budget.irb_epg);
  const double left = 60, top = 30, w = 420, h = 260;
  double xmax = 1e-3;
  for (double v : before) xmax = std::max(xmax, v);
  for (double v : after) xmax = std::max(xmax, v);
  const double step = nice_step(xmax, 5);
  xmax = step * std::ceil(xmax * 1.02 / step);
  auto X = [&](double v) { return left + w * std::max(v, 0.0) / xmax; };
  auto Y = [&](double f) { return top + h * (1 - f); };

  Svg svg(left + w + 120, top + h + 50);
  svg.text(left, 18, "Cumulative distribution of IRB EPG", "start", 13);
  svg.line(left, top, left, top + h);
  svg.line(left, top + h, left + w, top + h);
  for (double v = 0; v <= xmax * (1 + 1e-9); v += step) svg.text(X(v), top + h + 16, percent(v), "middle", 10);
  for (int k = 0; k <= 4; ++k) svg.text(left - 4, Y(k / 4.0) + 4, num(k / 4.0), "end", 10);
  svg.text(left + w / 2, top + h + 34, "IRB error per gate", "middle", 11);
  auto curve = [&](const std::vector<double>& v, const char* color, const char* cls) {
    if (v.empty()) return;
    std::vector<std::pair<double, double>> pts{{X(0), Y(0)}};
    for (const auto& c : empirical_cdf(v)) {
      pts.emplace_back(X(c.epg), pts.back().second);
      pts.emplace_back(X(c.epg), Y(c.fraction));
    }
    pts.emplace_back(X(xmax), pts.back().second);
    svg.polyline(pts, color, false, cls);
    double mean = 0;
    for (double e : v) mean += e;
    mean /= static_cast<double>(v.size());
    svg.polyline({{X(mean), Y(0)}, {X(mean), Y(1)}}, color, true, std::string(cls) + "-mean");
  };
  curve(before, "#c44e52", "before");
  curve(after, "#4c72b0", "after");
  svg.polyline({{left + w + 10, top + 8}, {left + w + 30, top + 8}}, "#c44e52", false, "legend");
  svg.text(left + w + 35, top + 12, "before", "start", 11);
  svg.polyline({{left + w + 10, top + 24}, {left + w + 30, top + 24}}, "#4c72b0", false, "legend");
  svg.text(left + w + 35, top + 28, "after", "start", 11);
  svg.text(left + w + 10, top + 46, "dashed: mean", "start", 10);
  return svg.str();
}

std::string leakage_svg(const ResultsDocument& r, const std::string& label) {
  const PairResult* b = find(r.before, label);
  const PairResult* a = find(r.after, label);
  if (b == nullptr && a == nullptr) throw InvalidArgument("no results for pair '" + label + "'");
  const double left = 50, top = 30, w = 300, h = 180, gap = 60;
  Svg svg(left + 2 * w + gap + 20, top + h + 70);
  svg.text(left, 18, label + ": control |2> population vs phi (dashed before, solid after)", "start", 12);
  for (int init = 0; init < 2; ++init) {
    const double x0 = left + init * (w + gap);
    double ymax = 1e-3;
    for (const PairResult* p : {b, a}) {
      if (p == nullptr || !p->ok) continue;
      for (double v : (init == 0 ? p->scan0 : p->scan1).p2) ymax = std::max(ymax, v);
    }
    ymax *= 1.1;
    svg.line(x0, top, x0, top + h);
    svg.line(x0, top + h, x0 + w, top + h);
    svg.text(x0 + w / 2, top + h + 30, init == 0 ? "control |0>, phi (rad)" : "control |1>, phi (rad)", "middle", 10);
    svg.text(x0 - 4, top + 4, num(std::round(ymax * 1e4) / 1e4), "end", 9);
    svg.text(x0 - 4, top + h + 4, "0", "end", 9);
    for (int k = 0; k <= 2; ++k)
      svg.text(x0 + w * k / 2, top + h + 14, k == 0 ? "0" : (k == 1 ? "pi" : "2pi"), "middle", 9);
    for (const PairResult* p : {b, a}) {
      if (p == nullptr || !p->ok) continue;
      const LeakageScan& s = init == 0 ? p->scan0 : p->scan1;
      std::vector<std::pair<double, double>> pts;
      for (std::size_t i = 0; i < s.phis.size(); ++i)
        pts.emplace_back(x0 + w * s.phis[i] / kTwoPi, top + h * (1 - s.p2[i] / ymax));
      svg.polyline(pts, p == b ? "#c44e52" : "#4c72b0", p == b, p == b ? "before" : "after");
    }
  }
  double lx = left;
  for (const PairResult* p : {b, a}) {
    if (p == nullptr || !p->ok) continue;
    svg.polyline({{lx, top + h + 50}, {lx + 20, top + h + 50}}, p == b ? "#c44e52" : "#4c72b0", p == b, "legend");
    svg.text(lx + 25, top + h + 54,
             std::string(p == b ? "before" : "after") + ", " + std::to_string(p->scan0.n_reps) + " repetitions", "start",
             10);
    lx += 200;
  }
  return svg.str();
}

}  // namespace ecr
