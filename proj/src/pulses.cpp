#include "ecr/pulses.hpp"

#include <algorithm>
#include <cmath>

namespace ecr {

namespace {

constexpr double kGridTol = 1e-9;

long steps_of(double length, double dt, const char* what) {
  const double n = length / dt;
  const double r = std::round(n);
  if (std::abs(n - r) > kGridTol * std::max(1.0, n)) {
    throw InvalidArgument(std::string(what) + " is not a multiple of dt");
  }
  return static_cast<long>(r);
}

double lifted_gaussian(double t, double center, double sigma, double half_width) {
  const double g = std::exp(-0.5 * (t - center) * (t - center) / (sigma * sigma));
  const double g0 = std::exp(-0.5 * half_width * half_width / (sigma * sigma));
  return std::max(0.0, (g - g0) / (1.0 - g0));
}

}  // namespace

const char* to_string(Channel c) {
  switch (c) {
    case Channel::control_drive:
      return "control_drive";
    case Channel::target_drive:
      return "target_drive";
    case Channel::cross_resonance:
      return "cross_resonance";
  }
  return "?";
}

Channel channel_from_string(const std::string& s) {
  if (s == "control_drive") return Channel::control_drive;
  if (s == "target_drive") return Channel::target_drive;
  if (s == "cross_resonance") return Channel::cross_resonance;
  throw InvalidArgument("unknown channel: " + s);
}

cplx Envelope::area() const {
  cplx acc = 0;
  for (const auto& s : samples) acc += s;
  return acc * dt;
}

bool Envelope::is_real() const {
  return std::all_of(samples.begin(), samples.end(), [](const cplx& s) { return s.imag() == 0.0; });
}

Envelope gaussian_square(double amplitude, double sigma, double rise, double flat, double dt) {
  if (!(dt > 0)) throw InvalidArgument("gaussian_square: dt must be positive");
  if (rise > 0 && !(sigma > 0)) throw InvalidArgument("gaussian_square: sigma must be positive");
  if (rise < 0 || flat < 0) throw InvalidArgument("gaussian_square: negative rise or flat length");
  const long n_rise = steps_of(rise, dt, "rise");
  const long n_flat = steps_of(flat, dt, "flat");

  Envelope env;
  env.dt = dt;
  env.samples.resize(static_cast<size_t>(2 * n_rise + n_flat));
  for (long k = 0; k < n_rise; ++k) {
    const double t = (static_cast<double>(k) + 0.5) * dt;
    const double v = amplitude * lifted_gaussian(t, rise, sigma, rise);
    env.samples[static_cast<size_t>(k)] = v;
    env.samples[static_cast<size_t>(2 * n_rise + n_flat - 1 - k)] = v;
  }
  for (long k = 0; k < n_flat; ++k) env.samples[static_cast<size_t>(n_rise + k)] = amplitude;
  return env;
}

Envelope gaussian_pulse(double amplitude, double sigma, double duration, double dt) {
  if (!(dt > 0)) throw InvalidArgument("gaussian_pulse: dt must be positive");
  if (!(sigma > 0)) throw InvalidArgument("gaussian_pulse: sigma must be positive");
  const long n = steps_of(duration, dt, "duration");
  Envelope env;
  env.dt = dt;
  env.samples.resize(static_cast<size_t>(n));
  const double center = 0.5 * duration;
  for (long k = 0; k < n; ++k) {
    const double t = (static_cast<double>(k) + 0.5) * dt;
    env.samples[static_cast<size_t>(k)] = amplitude * lifted_gaussian(t, center, sigma, center);
  }
  return env;
}

Envelope apply_drag(const Envelope& env, double alpha) {
  Envelope out = env;
  const auto n = env.samples.size();
  if (n < 2) return out;
  const cplx scale(0.0, alpha);
  for (size_t k = 0; k < n; ++k) {
    cplx derivative;
    if (k == 0) {
      derivative = (env.samples[1] - env.samples[0]) / env.dt;
    } else if (k == n - 1) {
      derivative = (env.samples[n - 1] - env.samples[n - 2]) / env.dt;
    } else {
      derivative = (env.samples[k + 1] - env.samples[k - 1]) / (2.0 * env.dt);
    }
    out.samples[k] = env.samples[k] + scale * derivative;
  }
  out.drag_applications = env.drag_applications + 1;
  return out;
}

double drag_alpha(double f_transition_ghz, double f_cr_ghz, bool two_photon) {
  const double detuning = f_transition_ghz - f_cr_ghz;
  if (!(std::abs(detuning) > 1e-12) || !std::isfinite(detuning)) {
    throw InvalidArgument("drag_alpha: drive sits on the transition (frequency collision)");
  }
  const double single = 1.0 / (kTwoPi * detuning);
  return two_photon ? single / 2.0 : single;
}

double spectral_weight(const Envelope& env, double f_offset_mhz) {
  if (env.samples.empty()) throw InvalidArgument("spectral_weight: empty envelope");
  const double f = f_offset_mhz * 1e-3;  // GHz, paired with ns
  cplx at_f = 0;
  cplx at_zero = 0;
  for (size_t k = 0; k < env.samples.size(); ++k) {
    const double t = (static_cast<double>(k) + 0.5) * env.dt;
    at_f += env.samples[k] * std::polar(1.0, -kTwoPi * f * t);
    at_zero += env.samples[k];
  }
  if (std::abs(at_zero) == 0.0) throw InvalidArgument("spectral_weight: envelope has no DC component");
  return 10.0 * std::log10(std::norm(at_f) / std::norm(at_zero));
}

void Schedule::add(Channel channel, double start, Envelope envelope) {
  if (start < 0) throw InvalidArgument("schedule entry starts before t = 0");
  for (const auto& s : envelope.samples) {
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
      throw InvalidArgument("schedule entry has non-finite samples");
    }
  }
  ScheduleEntry entry{channel, start, std::move(envelope)};
  for (const auto& other : entries_) {
    if (other.channel != channel) continue;
    const double lo = std::max(other.start, entry.start);
    const double hi = std::min(other.end(), entry.end());
    if (hi - lo > kGridTol) throw InvalidArgument("overlapping pulses on one channel");
  }
  entries_.push_back(std::move(entry));
}

void Schedule::add_frame(Qubit qubit, double time, double angle) {
  if (time < 0 || !std::isfinite(angle)) throw InvalidArgument("invalid frame update");
  frame_ops_.push_back({qubit, time, angle});
  normalize_frames();
}

void Schedule::normalize_frames() {
  std::stable_sort(frame_ops_.begin(), frame_ops_.end(), [](const FrameOp& a, const FrameOp& b) {
    if (a.time != b.time) return a.time < b.time;
    return static_cast<int>(a.qubit) < static_cast<int>(b.qubit);
  });
  std::vector<FrameOp> merged;
  for (const auto& op : frame_ops_) {
    if (!merged.empty() && merged.back().qubit == op.qubit && std::abs(merged.back().time - op.time) < kGridTol) {
      merged.back().angle += op.angle;
    } else {
      merged.push_back(op);
    }
  }
  std::erase_if(merged, [](const FrameOp& op) { return op.angle == 0.0; });
  frame_ops_ = std::move(merged);
}

void Schedule::append(const Schedule& other) {
  const double offset = duration();
  for (const auto& e : other.entries_) add(e.channel, e.start + offset, e.envelope);
  for (const auto& f : other.frame_ops_) frame_ops_.push_back({f.qubit, f.time + offset, f.angle});
  normalize_frames();
  min_duration_ = std::max(min_duration_, offset + other.duration());
}

double Schedule::duration() const {
  double d = min_duration_;
  for (const auto& e : entries_) d = std::max(d, e.end());
  for (const auto& f : frame_ops_) d = std::max(d, f.time);
  return d;
}

double Schedule::frame_angle(Qubit qubit, double t) const {
  double acc = 0;
  for (const auto& f : frame_ops_) {
    if (f.qubit == qubit && f.time <= t + kGridTol) acc += f.angle;
  }
  return acc;
}

double Schedule::final_frame_angle(Qubit qubit) const {
  double acc = 0;
  for (const auto& f : frame_ops_) {
    if (f.qubit == qubit) acc += f.angle;
  }
  return acc;
}

Schedule virtual_z(const Schedule& schedule, Qubit qubit, double angle, double time) {
  if (!std::isfinite(angle)) throw InvalidArgument("virtual_z: angle must be finite");
  Schedule out = schedule;
  if (angle != 0.0) out.add_frame(qubit, time, angle);
  return out;
}

}  // namespace ecr
