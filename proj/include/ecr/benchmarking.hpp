#pragma once

// Two-qubit Clifford group, compilation to {SX, RZ, ECR}, and standard / interleaved
// randomized benchmarking on 81x81 channels.
//
// Class decomposition (circuit order, first applied on the left):
//   single: (C1 x C1)
//   cnot:   (C1 x C1), CNOT, (S1 x S1)
//   iswap:  (C1 x C1), iSWAP, (S1 x S1)
//   swap:   (C1 x C1), SWAP
// with C1 the 24 single-qubit Cliffords and S1 = {I, V, V^2}, V: X -> Y -> Z -> X.

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "ecr/gates.hpp"

namespace ecr {

enum class CliffordClass { single, cnot, iswap, swap };
const char* to_string(CliffordClass c);

inline constexpr int kCliffordGroupOrder = 11520;
/// Class sizes 576, 5184, 5184, 576 over the group order.
inline constexpr std::array<double, 4> kClassWeights{0.05, 0.45, 0.45, 0.05};

/// The 24 single-qubit Cliffords with canonical global phase; index 0 is the identity.
const std::vector<Matrix2c>& single_qubit_cliffords();
/// Indices into single_qubit_cliffords() of I, V, V^2.
const std::array<int, 3>& s1_indices();

/// Removes the global phase: the first entry (column-major) above 1e-3 in modulus
/// becomes real positive.
Matrix4c canonical_phase(const Matrix4c& u);
bool equal_up_to_phase(const Matrix4c& a, const Matrix4c& b, double tol = 1e-9);
/// Pauli-conjugation membership test: u P u^dagger is a signed Pauli word for every P.
bool is_clifford(const Matrix4c& u, double tol = 1e-9);

struct CliffordElement {
  std::array<int, 2> left{0, 0};  // C1 indices on (control, target), applied first
  CliffordClass cls = CliffordClass::single;
  std::array<int, 2> right{0, 0};  // S1 positions 0..2, applied last (cnot/iswap only)
  Matrix4c unitary = Matrix4c::Identity();
};

CliffordElement make_clifford(std::array<int, 2> left, CliffordClass cls, std::array<int, 2> right = {0, 0});
/// All 11520 elements in class order.
const std::vector<CliffordElement>& clifford_table();
/// Decomposition of a two-qubit Clifford unitary (any global phase). Throws InvalidArgument otherwise.
const CliffordElement& find_clifford(const Matrix4c& u);
/// Uniform sample: class by weight, then uniform components.
CliffordElement sample_clifford(std::mt19937_64& rng);

/// Number of distinct (up to phase) elements generated by `generators`.
std::size_t closure_size(const std::vector<Matrix4c>& generators);

struct NativeOp {
  enum class Kind { sx, rz, ecr };
  Kind kind = Kind::sx;
  Qubit qubit = Qubit::control;  // ignored for ecr
  double angle = 0;              // rz only, physical exp(i angle n)
};

/// Time-ordered native sequence realizing `c` up to global phase. ECR count per class is
/// 0, 1, 2, 3; single-qubit parts use at most two SX per qubit.
std::vector<NativeOp> compile_to_natives(const CliffordElement& c);
/// Product of the ideal gates of a native sequence.
Matrix4c ideal_unitary(const std::vector<NativeOp>& ops);
int ecr_count(const std::vector<NativeOp>& ops);

/// Channels of the native gates on the two-transmon space.
struct NativeGateSet {
  Superoperator sx_control;
  Superoperator sx_target;
  Superoperator ecr;
};
/// Ideal qubit gates embedded with |2> levels left untouched.
NativeGateSet ideal_gate_set();
/// Pulse-level gates from the simulator, with or without decoherence.
NativeGateSet simulated_gate_set(const PairSimulator& sim, const SingleQubitGates& sq, const CRPulseConfig& cr,
                                 bool corrected, bool noisy);

struct ReadoutModel {
  double assignment_error = 0.04;  // symmetric 0 <-> 1 flip probability per qubit
  double leak_reads_one = 0.9;     // probability that |2> reads as 1
};

/// Probability of reading 00.
double survival_probability(const DensityMatrix& rho, const ReadoutModel& readout);

struct RBOptions {
  std::vector<int> lengths{1, 2, 4, 8, 16, 32, 64};
  int n_seeds = 30;
  int shots = 1024;
  bool exact = false;  // expectation values instead of sampled shots
  std::uint64_t seed = 1;
  ReadoutModel readout;
  double clifford_depolarizing = 0;     // injected after every Clifford
  double interleaved_depolarizing = 0;  // injected after every interleaved ECR
  int threads = 0;                      // 0 = hardware concurrency

  void validate() const;
};

struct DecayFit {
  double a = 0, alpha = 0, b = 0;
  double alpha_err = 0;
  double residual_rms = 0;  // over per-length means
};

/// Fits A alpha^m + B to (m, survival) samples; alpha is kept in [0, 1].
DecayFit fit_decay(const std::vector<int>& m, const std::vector<double>& survival);

struct RBCurve {
  std::vector<int> lengths;
  std::vector<std::vector<double>> samples;  // [length][seed]
  std::vector<double> mean, stddev;
  DecayFit fit;
};

struct IRBResult {
  RBCurve reference;
  RBCurve interleaved;
  double alpha_ref = 0, alpha_int = 0;
  double epg = 0, epg_err = 0;
  bool negative_warning = false;  // alpha_int above alpha_ref beyond the uncertainty
  int n_seeds = 0;
  int shots = 0;
};

/// Reference RB or, with `interleave`, the ECR after every random Clifford. Sequences end
/// with the inverting Clifford and start from |00>. Deterministic given options.seed.
RBCurve run_rb(const NativeGateSet& gates, const RBOptions& options, bool interleave);
/// Both curves from shared random sequences, fitted.
IRBResult run_irb(const NativeGateSet& gates, const RBOptions& options);

/// r = (d - 1)/d (1 - alpha_int / alpha_ref), d = 4.
double irb_epg(double alpha_ref, double alpha_int);
/// Fills alphas, EPG and its propagated uncertainty from the two fitted curves.
IRBResult fit_epg(IRBResult result);

}  // namespace ecr
