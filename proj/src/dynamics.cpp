#include "ecr/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace ecr {

namespace {

constexpr double kGridTol = 1e-9;

long grid_steps(double length, double dt, const char* what) {
  const double n = length / dt;
  const double r = std::round(n);
  if (std::abs(n - r) > kGridTol * std::max(1.0, n)) {
    throw InvalidArgument(std::string(what) + " is not aligned to the integration step");
  }
  return static_cast<long>(r);
}

Operator total_number(const Operator& n_c, const Operator& n_t) { return n_c + n_t; }

/// exp(-i H tau) for Hermitian H.
Operator expm_hermitian(const Operator& h, double tau) {
  Eigen::SelfAdjointEigenSolver<Operator> es(h);
  const auto& w = es.eigenvectors();
  Eigen::Matrix<cplx, kDim, 1> phases;
  for (int k = 0; k < kDim; ++k) phases(k) = std::polar(1.0, -es.eigenvalues()(k) * tau);
  return w * phases.asDiagonal() * w.adjoint();
}

/// exp(i w N t) for a diagonal number operator N.
Operator number_phase(const Operator& n_total, double w_t) {
  Operator d = Operator::Zero();
  for (int k = 0; k < kDim; ++k) d(k, k) = std::polar(1.0, w_t * n_total(k, k).real());
  return d;
}

// Largest drive phase (rad) swept within one substep when simultaneous tones
// have different carriers and no common frame makes the Hamiltonian constant.
constexpr double kMaxSubstepPhase = 0.005;

// A run of identical integration steps, or a single step with mixed carriers
// split into substeps.
struct Block {
  double frame_omega = 0;
  double t_start = 0;
  long steps = 0;
  cplx drive_c = 0;
  cplx drive_t = 0;
  std::vector<std::array<cplx, 2>> sub;

  bool mixed() const { return !sub.empty(); }
};

struct Plan {
  std::vector<Block> blocks;
  double duration = 0;
  double dt = 0;
  double final_frame_omega = 0;
};

Plan make_plan(const PairModel& model, const Schedule& schedule, double dt) {
  if (!(dt > 0) || !std::isfinite(dt)) throw InvalidArgument("integration step must be positive");
  Plan plan;
  plan.dt = dt;
  plan.duration = schedule.duration();
  const long n_steps = grid_steps(plan.duration, dt, "schedule duration");

  struct Active {
    const ScheduleEntry* entry;
    long first_step;
    long substeps;  // integration steps per envelope sample
    double carrier;
  };
  std::vector<Active> active;
  for (const auto& e : schedule.entries()) {
    const auto& env = e.envelope;
    for (const auto& s : env.samples) {
      if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
        throw InvalidArgument("schedule entry has non-finite samples");
      }
    }
    if (env.samples.empty()) continue;
    const long sub = grid_steps(env.dt, dt, "envelope sample interval");
    if (sub < 1) throw InvalidArgument("envelope sample interval shorter than the integration step");
    const long first = grid_steps(e.start, dt, "pulse start");
    const double carrier =
        model.reference_omega(frame_qubit(e.channel)) + mhz_to_rad_per_ns(env.carrier_detuning_mhz);
    active.push_back({&e, first, sub, carrier});
  }

  struct Term {
    Qubit transmon;
    cplx amplitude;
    double carrier;
    double phase;
  };
  std::vector<Term> terms;
  std::optional<double> frame;
  for (long k = 0; k < n_steps; ++k) {
    const double t0 = static_cast<double>(k) * dt;
    const double t_mid = t0 + 0.5 * dt;
    terms.clear();
    for (const auto& a : active) {
      const long local = k - a.first_step;
      if (local < 0) continue;
      const long sample = local / a.substeps;
      const auto& env = a.entry->envelope;
      if (sample >= static_cast<long>(env.samples.size())) continue;
      const cplx s = env.samples[static_cast<size_t>(sample)];
      if (s == cplx(0.0)) continue;
      const double phase = env.phase - schedule.frame_angle(frame_qubit(a.entry->channel), t_mid);
      terms.push_back({driven_transmon(a.entry->channel), s, a.carrier, phase});
    }

    bool shared = true;
    if (!terms.empty()) {
      const double w0 = terms.front().carrier;
      shared = std::all_of(terms.begin(), terms.end(), [&](const Term& t) { return t.carrier == w0; });
      if (shared || !frame) frame = w0;
    }
    if (!frame) frame = model.reference_omega(Qubit::target);

    Block b;
    b.frame_omega = *frame;
    b.t_start = t0;
    b.steps = 1;
    if (shared) {
      for (const auto& t : terms) {
        const cplx c = t.amplitude * std::polar(1.0, (t.carrier - b.frame_omega) * t_mid - t.phase);
        (t.transmon == Qubit::control ? b.drive_c : b.drive_t) += c;
      }
      if (!plan.blocks.empty()) {
        auto& last = plan.blocks.back();
        if (!last.mixed() && last.frame_omega == b.frame_omega && last.drive_c == b.drive_c &&
            last.drive_t == b.drive_t) {
          ++last.steps;
          continue;
        }
      }
    } else {
      double spread = 0;
      for (const auto& t : terms) spread = std::max(spread, std::abs(t.carrier - b.frame_omega));
      const long m = std::max(1L, static_cast<long>(std::ceil(spread * dt / kMaxSubstepPhase)));
      b.sub.resize(static_cast<size_t>(m));
      for (long j = 0; j < m; ++j) {
        const double tj = t0 + (static_cast<double>(j) + 0.5) * dt / static_cast<double>(m);
        std::array<cplx, 2> d{0.0, 0.0};
        for (const auto& t : terms) {
          d[t.transmon == Qubit::control ? 0 : 1] +=
              t.amplitude * std::polar(1.0, (t.carrier - b.frame_omega) * tj - t.phase);
        }
        b.sub[static_cast<size_t>(j)] = d;
      }
    }
    plan.blocks.push_back(std::move(b));
  }
  plan.final_frame_omega = frame.value_or(model.reference_omega(Qubit::target));
  return plan;
}

Operator block_hamiltonian(const PairModel& model, double frame_omega, cplx drive_c, cplx drive_t) {
  Operator h = model.static_hamiltonian(frame_omega);
  if (drive_c != cplx(0.0)) h += model.drive_term(Qubit::control, drive_c);
  if (drive_t != cplx(0.0)) h += model.drive_term(Qubit::target, drive_t);
  return h;
}

/// Propagator of one integration step of the block.
Operator step_unitary(const PairModel& model, const Block& b, double dt) {
  if (!b.mixed()) return expm_hermitian(block_hamiltonian(model, b.frame_omega, b.drive_c, b.drive_t), dt);
  const double h = dt / static_cast<double>(b.sub.size());
  const Operator h0 = model.static_hamiltonian(b.frame_omega);
  Operator u = Operator::Identity();
  for (const auto& d : b.sub) {
    u = expm_hermitian(h0 + model.drive_term(Qubit::control, d[0]) + model.drive_term(Qubit::target, d[1]), h) * u;
  }
  return u;
}

/// Propagator of the whole block.
Operator block_unitary(const PairModel& model, const Block& b, double dt) {
  if (b.mixed()) return step_unitary(model, b, dt);
  return expm_hermitian(block_hamiltonian(model, b.frame_omega, b.drive_c, b.drive_t),
                        dt * static_cast<double>(b.steps));
}

/// Map from the bare basis in the simulation frame at time T to the qubit frame.
Operator qubit_frame_map(const PairModel& model, const Schedule& schedule, double frame_omega, double duration) {
  Operator r = Operator::Zero();
  const double wc = model.reference_omega(Qubit::control) - frame_omega;
  const double wt = model.reference_omega(Qubit::target) - frame_omega;
  const double zc = schedule.final_frame_angle(Qubit::control);
  const double zt = schedule.final_frame_angle(Qubit::target);
  for (int n = 0; n < kLevels; ++n) {
    for (int m = 0; m < kLevels; ++m) {
      r(3 * n + m, 3 * n + m) = std::polar(1.0, (wc * n + wt * m) * duration + zc * n + zt * m);
    }
  }
  return r * model.dressed_basis().adjoint();
}

/// Lindblad dissipator D (column-stacked, 81x81), frame independent.
Superoperator dissipator(const PairModel& model, const NoiseModel& noise) {
  const int d2 = kDim * kDim;
  Superoperator out = Superoperator::Zero(d2, d2);
  const Operator id = Operator::Identity();
  auto add = [&](const Operator& c) {
    const Operator cdc = c.adjoint() * c;
    out += Eigen::kroneckerProduct(c.conjugate(), c).eval();
    out -= 0.5 * Eigen::kroneckerProduct(id, cdc).eval();
    out -= 0.5 * Eigen::kroneckerProduct(cdc.transpose(), id).eval();
  };
  for (int q = 0; q < 2; ++q) {
    const Qubit which = q == 0 ? Qubit::control : Qubit::target;
    if (noise.gamma1[q] > 0) add(std::sqrt(noise.gamma1[q]) * model.lowering(which));
    if (noise.gamma_phi[q] > 0) add(std::sqrt(2.0 * noise.gamma_phi[q]) * model.number(which));
  }
  return out;
}

void conjugate_columns(Superoperator& s, const Operator& u) {
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    Eigen::Map<Operator> col(s.col(j).data());
    col = (u * col * u.adjoint()).eval();
  }
}

}  // namespace

void TransmonParams::validate() const {
  if (!(frequency_ghz > 1.0 && frequency_ghz < 20.0)) throw InvalidArgument("transmon frequency outside (1, 20) GHz");
  if (!(anharmonicity_mhz < 0)) throw InvalidArgument("transmon anharmonicity must be negative");
  if (!(t1_us > 0) || !(t2e_us > 0)) throw InvalidArgument("coherence times must be positive");
  if (t2e_us > 2.0 * t1_us * (1.0 + 1e-12)) throw InvalidArgument("T2e exceeds 2 T1");
}

void PairParams::validate() const {
  control.validate();
  target.validate();
  if (!(j_mhz >= 0) || !std::isfinite(j_mhz)) throw InvalidArgument("coupling J must be non-negative");
  const double delta = detuning_mhz();
  if (!std::isfinite(delta) || delta == 0.0) throw InvalidArgument("control and target are degenerate");
}

NoiseModel NoiseModel::from_pair(const PairParams& pair) {
  NoiseModel n;
  n.enabled = true;
  const TransmonParams* tr[2] = {&pair.control, &pair.target};
  for (int q = 0; q < 2; ++q) {
    const double t1 = tr[q]->t1_us * 1e3;
    const double t2 = tr[q]->t2e_us * 1e3;
    n.gamma1[q] = 1.0 / t1;
    n.gamma_phi[q] = std::max(0.0, 1.0 / t2 - 0.5 / t1);
  }
  return n;
}

PairModel::PairModel(const PairParams& params) : params_(params) {
  a_c_ = embed_qutrit_operator<double>(annihilation_operator(), Qubit::control);
  a_t_ = embed_qutrit_operator<double>(annihilation_operator(), Qubit::target);
  n_c_ = embed_qutrit_operator<double>(number_operator(), Qubit::control);
  n_t_ = embed_qutrit_operator<double>(number_operator(), Qubit::target);

  // Diagonalize in a frame near the pair so the matrix entries are small.
  w_frame_ = ghz_to_rad_per_ns(params_.target.frequency_ghz);
  Eigen::SelfAdjointEigenSolver<Operator> es(static_hamiltonian(w_frame_));
  const Operator& vecs = es.eigenvectors();

  dressed_ = Operator::Zero();
  energies_.setZero();
  std::array<bool, kDim> used{};
  for (int label = 0; label < kDim; ++label) {
    int best = -1;
    double best_overlap = -1;
    for (int k = 0; k < kDim; ++k) {
      const double ov = std::norm(vecs(label, k));
      if (ov > best_overlap) {
        best_overlap = ov;
        best = k;
      }
    }
    if (best_overlap < 0.5 || used[static_cast<size_t>(best)]) {
      throw DegenerateAssignment("dressed state assignment is ambiguous for |" + std::to_string(label / 3) + "," +
                                 std::to_string(label % 3) + ">");
    }
    used[static_cast<size_t>(best)] = true;
    Eigen::Matrix<cplx, kDim, 1> v = vecs.col(best);
    v *= std::polar(1.0, -std::arg(v(label)));
    dressed_.col(label) = v;
    const int n = label / 3;
    const int m = label % 3;
    energies_(n, m) = es.eigenvalues()(best);
  }
}

Operator PairModel::static_hamiltonian(double frame_omega) const {
  const TransmonParams* tr[2] = {&params_.control, &params_.target};
  const Operator* num[2] = {&n_c_, &n_t_};
  Operator h = Operator::Zero();
  for (int q = 0; q < 2; ++q) {
    const double w = ghz_to_rad_per_ns(tr[q]->frequency_ghz) - frame_omega;
    const double a = mhz_to_rad_per_ns(tr[q]->anharmonicity_mhz);
    const Operator& n = *num[q];
    h += w * n + 0.5 * a * (n * n - n);
  }
  const double j = mhz_to_rad_per_ns(params_.j_mhz);
  const Operator hop = a_c_.adjoint() * a_t_;
  h += j * (hop + hop.adjoint());
  return h;
}

Operator PairModel::drive_term(Qubit transmon, cplx coefficient) const {
  const Operator& a = lowering(transmon);
  return 0.5 * (coefficient * a + std::conj(coefficient) * a.adjoint());
}

double PairModel::reference_omega(Qubit q) const {
  return w_frame_ + (q == Qubit::control ? energies_(1, 0) - energies_(0, 0) : energies_(0, 1) - energies_(0, 0));
}

double PairModel::transition_frequency_ghz(Qubit q, int lower, int upper) const {
  if (lower < 0 || upper >= kLevels || lower >= upper) throw InvalidArgument("invalid transition levels");
  const double e = q == Qubit::control ? energies_(upper, 0) - energies_(lower, 0)
                                       : energies_(0, upper) - energies_(0, lower);
  return (e + w_frame_ * (upper - lower)) / kTwoPi;
}

PairModel build_hamiltonian(const PairParams& pair) {
  pair.validate();
  return PairModel(pair);
}

double static_zz_rate(const PairParams& pair) {
  const PairModel model = build_hamiltonian(pair);
  return model.zz_omega() / kTwoPi * 1e6;
}

Superoperator unitary_superoperator(const Operator& u) { return Eigen::kroneckerProduct(u.conjugate(), u).eval(); }

DensityMatrix apply_superoperator(const Superoperator& s, const DensityMatrix& rho) {
  if (s.rows() != kDim * kDim || s.cols() != kDim * kDim) throw InvalidArgument("superoperator has wrong shape");
  const Eigen::Map<const Eigen::Matrix<cplx, kDim * kDim, 1>> v(rho.data());
  const Eigen::VectorXcd out = s * v;
  return Eigen::Map<const Operator>(out.data());
}

Operator propagate_unitary(const PairModel& model, const Schedule& schedule, double dt) {
  const Plan plan = make_plan(model, schedule, dt);
  const Operator n_total = total_number(model.number(Qubit::control), model.number(Qubit::target));
  Operator u = Operator::Identity();
  double frame = plan.blocks.empty() ? plan.final_frame_omega : plan.blocks.front().frame_omega;
  for (const auto& b : plan.blocks) {
    if (b.frame_omega != frame) {
      u = number_phase(n_total, (b.frame_omega - frame) * b.t_start) * u;
      frame = b.frame_omega;
    }
    u = block_unitary(model, b, dt) * u;
  }
  return qubit_frame_map(model, schedule, frame, plan.duration) * u * model.dressed_basis();
}

DensityMatrix propagate_lindblad(const PairModel& model, const Schedule& schedule, const NoiseModel& noise,
                                 const QuantumState& initial, double dt) {
  initial.validate(1e-8);
  const Plan plan = make_plan(model, schedule, dt);
  const Operator n_total = total_number(model.number(Qubit::control), model.number(Qubit::target));
  const Operator& v = model.dressed_basis();
  DensityMatrix rho = v * initial.density() * v.adjoint();

  std::optional<Superoperator> half;
  if (noise.enabled) {
    const Superoperator d = dissipator(model, noise);
    if (d.cwiseAbs().maxCoeff() > 0) half = (d * (0.5 * dt)).exp();
  }

  double frame = plan.blocks.empty() ? plan.final_frame_omega : plan.blocks.front().frame_omega;
  for (const auto& b : plan.blocks) {
    if (b.frame_omega != frame) {
      const Operator f = number_phase(n_total, (b.frame_omega - frame) * b.t_start);
      rho = f * rho * f.adjoint();
      frame = b.frame_omega;
    }
    if (!half) {
      const Operator u = block_unitary(model, b, dt);
      rho = u * rho * u.adjoint();
      continue;
    }
    const Operator u = step_unitary(model, b, dt);
    for (long k = 0; k < b.steps; ++k) {
      rho = apply_superoperator(*half, rho);
      rho = u * rho * u.adjoint();
      rho = apply_superoperator(*half, rho);
    }
  }
  const Operator w = qubit_frame_map(model, schedule, frame, plan.duration);
  rho = w * rho * w.adjoint();
  return 0.5 * (rho + rho.adjoint());
}

Superoperator propagate_superoperator(const PairModel& model, const Schedule& schedule, const NoiseModel& noise,
                                      double dt) {
  std::optional<Superoperator> full, half;
  if (noise.enabled) {
    const Superoperator d = dissipator(model, noise);
    if (d.cwiseAbs().maxCoeff() > 0) {
      half = (d * (0.5 * dt)).exp();
      full = (*half) * (*half);
    }
  }
  if (!half) return unitary_superoperator(propagate_unitary(model, schedule, dt));

  const Plan plan = make_plan(model, schedule, dt);
  const int d2 = kDim * kDim;
  if (plan.blocks.empty()) return Superoperator::Identity(d2, d2);
  const Operator n_total = total_number(model.number(Qubit::control), model.number(Qubit::target));

  // Strang splitting: the product of E_h U E_h over steps collapses to
  // E_h U E U E ... U E_h; runs of identical steps use repeated squaring.
  Superoperator s = *half;
  double frame = plan.blocks.front().frame_omega;
  for (size_t i = 0; i < plan.blocks.size(); ++i) {
    const auto& b = plan.blocks[i];
    if (b.frame_omega != frame) {
      conjugate_columns(s, number_phase(n_total, (b.frame_omega - frame) * b.t_start));
      frame = b.frame_omega;
    }
    const Operator u = step_unitary(model, b, dt);
    const bool last_block = i + 1 == plan.blocks.size();
    long body = last_block ? b.steps - 1 : b.steps;
    if (body > 2) {
      Superoperator m = (*full) * unitary_superoperator(u);
      Superoperator acc;
      bool first = true;
      while (body > 0) {
        if (body & 1) {
          acc = first ? m : (m * acc).eval();
          first = false;
        }
        body >>= 1;
        if (body > 0) m = (m * m).eval();
      }
      s = acc * s;
    } else {
      for (long k = 0; k < body; ++k) {
        conjugate_columns(s, u);
        s = (*full) * s;
      }
    }
    if (last_block) {
      conjugate_columns(s, u);
      s = (*half) * s;
    }
  }
  const Operator w = qubit_frame_map(model, schedule, frame, plan.duration);
  return unitary_superoperator(w) * s * unitary_superoperator(model.dressed_basis());
}

}  // namespace ecr
