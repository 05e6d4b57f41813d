#pragma once

#include <vector>

#include "ecr/types.hpp"

namespace ecr {

/// Drive channels. The cross-resonance channel drives the control transmon but is
/// referenced to the target qubit's frame, so a virtual Z on the target rotates it.
enum class Channel { control_drive, target_drive, cross_resonance };

const char* to_string(Channel c);
Channel channel_from_string(const std::string& s);

/// Transmon physically driven by the channel.
inline Qubit driven_transmon(Channel c) { return c == Channel::target_drive ? Qubit::target : Qubit::control; }
/// Qubit whose frame the channel's carrier and phase are referenced to.
inline Qubit frame_qubit(Channel c) { return c == Channel::control_drive ? Qubit::control : Qubit::target; }

/// Piecewise-constant complex envelope. Sample k holds on [k*dt, (k+1)*dt).
/// Amplitudes are angular drive rates in rad/ns; I is the real part, Q the imaginary.
struct Envelope {
  double dt = 0.25;                 // ns
  std::vector<cplx> samples;        // rad/ns
  double carrier_detuning_mhz = 0;  // relative to the channel frame
  double phase = 0;                 // rad
  int drag_applications = 0;        // >1 means DRAG was composed

  double duration() const { return dt * static_cast<double>(samples.size()); }
  /// Sum of samples times dt (complex area, rad).
  cplx area() const;
  bool is_real() const;
};

/// Flat-top pulse with Gaussian edges of length `rise` (lifted so the endpoints vanish).
/// `rise` and `flat` must be multiples of `dt`.
Envelope gaussian_square(double amplitude, double sigma, double rise, double flat, double dt);

/// Lifted Gaussian centered in a window of length `duration`.
Envelope gaussian_pulse(double amplitude, double sigma, double duration, double dt);

/// F -> (1 + i alpha d/dt) F with a centered finite-difference derivative
/// (one-sided at the ends). alpha in ns.
Envelope apply_drag(const Envelope& env, double alpha);

/// DRAG parameter (ns) nulling the spectral content at a control transition
/// `f_transition` for a drive at `f_cr` (both GHz). The two-photon value is half
/// the single-photon one.
double drag_alpha(double f_transition_ghz, double f_cr_ghz, bool two_photon);

/// |DTFT(f_offset)|^2 / |DTFT(0)|^2 in dB.
double spectral_weight(const Envelope& env, double f_offset_mhz);

struct ScheduleEntry {
  Channel channel;
  double start = 0;  // ns
  Envelope envelope;

  double end() const { return start + envelope.duration(); }
};

/// Zero-duration frame update: every later pulse on channels in `qubit`'s frame picks
/// up phase -angle. Equivalent to an ideal Z(angle) on the qubit.
struct FrameOp {
  Qubit qubit;
  double time = 0;  // ns
  double angle = 0;
};

class Schedule {
 public:
  /// Throws InvalidArgument when the pulse overlaps another on the same channel.
  void add(Channel channel, double start, Envelope envelope);
  void add_frame(Qubit qubit, double time, double angle);

  /// Stretches the schedule to at least `duration` ns of (possibly idle) time.
  void set_min_duration(double duration) { min_duration_ = duration; }

  /// Appends `other` shifted to start at this schedule's current end.
  void append(const Schedule& other);
  /// Appends an idle gap.
  void pad(double duration) { min_duration_ = this->duration() + duration; }

  double duration() const;
  const std::vector<ScheduleEntry>& entries() const { return entries_; }
  const std::vector<FrameOp>& frame_ops() const { return frame_ops_; }

  /// Accumulated frame angle of `qubit` from ops at times <= t.
  double frame_angle(Qubit qubit, double t) const;
  double final_frame_angle(Qubit qubit) const;

 private:
  void normalize_frames();

  std::vector<ScheduleEntry> entries_;
  std::vector<FrameOp> frame_ops_;
  double min_duration_ = 0;
};

/// Returns `schedule` with a virtual Z(angle) on `qubit` at `time`. Frame ops at the
/// same instant are merged; a net zero rotation leaves no trace.
Schedule virtual_z(const Schedule& schedule, Qubit qubit, double angle, double time);

}  // namespace ecr
