#include "ecr/tomography.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include "ecr/fitting.hpp"

namespace ecr {

namespace {

constexpr double kPi = std::numbers::pi;

/// Target preparation p as a qubit vector: |0>, |+>, |+i>.
Eigen::Vector2cd preparation(int p) {
  const double r = std::sqrt(0.5);
  switch (p) {
    case 0:
      return {1.0, 0.0};
    case 1:
      return {r, r};
    default:
      return {cplx(r), cplx(0, r)};
  }
}

Eigen::Vector2cd antipode(int p) {
  const double r = std::sqrt(0.5);
  switch (p) {
    case 0:
      return {0.0, 1.0};
    case 1:
      return {r, -r};
    default:
      return {cplx(r), cplx(0, -r)};
  }
}

/// Ideal Bloch vector of preparation p.
Eigen::Vector3d preparation_axis(int p) {
  switch (p) {
    case 0:
      return Eigen::Vector3d::UnitZ();
    case 1:
      return Eigen::Vector3d::UnitX();
    default:
      return Eigen::Vector3d::UnitY();
  }
}

StateVector product_state(int control_level, const Eigen::Vector2cd& target) {
  StateVector psi = StateVector::Zero();
  psi(3 * control_level) = target(0);
  psi(3 * control_level + 1) = target(1);
  return psi;
}

Matrix2c target_block(const Operator& u, int k) {
  Matrix2c b;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) b(i, j) = u(3 * k + i, 3 * k + j);
  return b;
}

double block_phase(const Matrix2c& b) { return -0.5 * std::arg(b.determinant()); }

bool has_antipodes(const BlochTrajectory& t) { return !t.antipodes[0].empty(); }

/// Image of preparation axis p used by the fit.
Eigen::Vector3d image(const BlochTrajectory& t, int p, size_t i) {
  const auto k = static_cast<size_t>(p);
  if (has_antipodes(t)) return 0.5 * (t.points[k][i].xyz() - t.antipodes[k][i].xyz());
  return t.points[k][i].xyz();
}

Eigen::Matrix3d kabsch(const BlochTrajectory& t, size_t i) {
  return kabsch_rotation(image(t, 1, i), image(t, 2, i), image(t, 0, i));
}

/// Removes jumps of `period` between consecutive samples.
std::vector<double> unwrap(std::vector<double> x, double period) {
  for (size_t i = 1; i < x.size(); ++i) {
    const double d = x[i] - x[i - 1];
    x[i] -= period * std::round(d / period);
  }
  return x;
}

struct BlockFit {
  Eigen::Vector3d w;
  double rss = 0;
  long n = 0;
};

BlockFit fit_block(const BlochTrajectory& t) {
  const size_t n = t.durations.size();
  std::vector<Eigen::Matrix3d> r(n);
  for (size_t i = 0; i < n; ++i) r[i] = kabsch(t, i);

  // Incremental rotations give the precession rate directly once the
  // pulse edges are factored into C.
  Eigen::Vector3d w = Eigen::Vector3d::Zero();
  double total = 0;
  for (size_t i = 0; i + 1 < n; ++i) {
    const double dd = t.durations[i + 1] - t.durations[i];
    w += rotation_vector(r[i + 1] * r[i].transpose());
    total += dd;
  }
  if (total > 0) w /= total;
  const Eigen::Vector3d c = rotation_vector(rotation_from_vector(-w * t.durations.front()) * r.front());

  Eigen::VectorXd x0(6);
  x0 << w, c;
  const int m = static_cast<int>(9 * n);
  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& res) {
    const Eigen::Vector3d wx = x.head<3>();
    const Eigen::Matrix3d cx = rotation_from_vector(x.tail<3>());
    for (size_t i = 0; i < n; ++i) {
      const Eigen::Matrix3d rot = rotation_from_vector(wx * t.durations[i]) * cx;
      for (int p = 0; p < kPreparations; ++p) {
        res.segment<3>(static_cast<Eigen::Index>(9 * i + 3 * p)) =
            rot * preparation_axis(p) - image(t, p, i);
      }
    }
  };
  const LeastSquaresResult fit = least_squares(residual, x0, m, 1e-14);
  return {fit.x.head<3>(), fit.rss, m};
}

void check_trajectory(const BlochTrajectory& t) {
  const size_t n = t.durations.size();
  if (n < 2) throw InvalidArgument("trajectory needs at least two durations");
  for (const auto& pts : t.points) {
    if (pts.size() != n) throw InvalidArgument("trajectory has mismatched point counts");
  }
  if (has_antipodes(t)) {
    for (const auto& pts : t.antipodes) {
      if (pts.size() != n) throw InvalidArgument("trajectory has mismatched antipode counts");
    }
  }
  if (t.block_phase.size() != n) throw InvalidArgument("trajectory has mismatched phase records");
  for (size_t i = 1; i < n; ++i) {
    if (!(t.durations[i] > t.durations[i - 1])) throw InvalidArgument("durations must be strictly increasing");
  }
}

Matrix4c expm_hermitian4(const Matrix4c& h, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(h);
  Eigen::Vector4cd ph;
  for (int k = 0; k < 4; ++k) ph(k) = std::polar(1.0, -es.eigenvalues()(k) * t);
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

const char* to_string(Term t) {
  switch (t) {
    case Term::ix:
      return "IX";
    case Term::iy:
      return "IY";
    case Term::iz:
      return "IZ";
    case Term::zi:
      return "ZI";
    case Term::zx:
      return "ZX";
    case Term::zy:
      return "ZY";
    case Term::zz:
      return "ZZ";
  }
  return "?";
}

Term term_from_string(const std::string& s) {
  for (Term t : kAllTerms) {
    if (s == to_string(t)) return t;
  }
  throw InvalidArgument("unknown Hamiltonian term: " + s);
}

double& EffectiveHamiltonian::operator[](Term t) {
  switch (t) {
    case Term::ix:
      return omega_ix;
    case Term::iy:
      return omega_iy;
    case Term::iz:
      return omega_iz;
    case Term::zi:
      return omega_zi;
    case Term::zx:
      return omega_zx;
    case Term::zy:
      return omega_zy;
    case Term::zz:
      return omega_zz;
  }
  throw InvalidArgument("unknown term");
}

double EffectiveHamiltonian::operator[](Term t) const { return const_cast<EffectiveHamiltonian&>(*this)[t]; }

Matrix4c EffectiveHamiltonian::matrix() const {
  Matrix4c h = omega_ix * pauli_word(0, 1) + omega_iy * pauli_word(0, 2) + omega_iz * pauli_word(0, 3) +
               omega_zi * pauli_word(3, 0) + omega_zx * pauli_word(3, 1) + omega_zy * pauli_word(3, 2) +
               omega_zz * pauli_word(3, 3);
  return 0.5 * h;
}

Eigen::Vector3d EffectiveHamiltonian::block_rate(int control_state) const {
  const double s = control_state == 0 ? 1.0 : -1.0;
  return {omega_ix + s * omega_zx, omega_iy + s * omega_zy, omega_iz + s * omega_zz};
}

EffectiveHamiltonian echo_partner(const EffectiveHamiltonian& h) {
  EffectiveHamiltonian m = h;
  m.omega_ix = -h.omega_ix;
  m.omega_iy = -h.omega_iy;
  m.omega_zx = -h.omega_zx;
  m.omega_zy = -h.omega_zy;
  return m;
}

Eigen::Matrix3d rotation_from_vector(const Eigen::Vector3d& v) {
  const double angle = v.norm();
  if (angle < 1e-300) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(angle, v / angle).toRotationMatrix();
}

Eigen::Vector3d rotation_vector(const Eigen::Matrix3d& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

Eigen::Matrix3d kabsch_rotation(const Eigen::Vector3d& image_x, const Eigen::Vector3d& image_y,
                                const Eigen::Vector3d& image_z) {
  Eigen::Matrix3d m;
  m << image_x, image_y, image_z;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

BlochTrajectory measure_bloch_trajectories(const PairSimulator& sim, const CRPulseConfig& cfg,
                                           const std::vector<double>& durations, int control_init, bool noisy) {
  if (control_init != 0 && control_init != 1) throw InvalidArgument("control_init must be 0 or 1");
  BlochTrajectory t;
  t.durations = durations;
  t.control_init = control_init;
  for (double d : durations) {
    CRPulseConfig c = cfg;
    c.cr_flat = d;
    const Schedule s = cr_pulse(c, +1);
    const Operator u = sim.unitary(s);
    auto measure = [&](const Eigen::Vector2cd& target) {
      const StateVector psi = product_state(control_init, target);
      DensityMatrix rho;
      if (noisy) {
        rho = sim.evolve(s, QuantumState(psi), true);
      } else {
        const StateVector out = u * psi;
        rho = out * out.adjoint();
      }
      return bloch_vector(partial_trace(rho, Qubit::target));
    };
    for (int p = 0; p < kPreparations; ++p) {
      t.points[static_cast<size_t>(p)].push_back(measure(preparation(p)));
      t.antipodes[static_cast<size_t>(p)].push_back(measure(antipode(p)));
    }
    t.block_phase.push_back(block_phase(target_block(u, control_init)));
  }
  return t;
}

BlochTrajectory synthetic_trajectory(const EffectiveHamiltonian& h, const std::vector<double>& durations,
                                     int control_init) {
  BlochTrajectory t;
  t.durations = durations;
  t.control_init = control_init;
  const Matrix4c hm = h.matrix();
  for (double d : durations) {
    const Matrix4c u = expm_hermitian4(hm, d);
    const Matrix2c b = u.block<2, 2>(2 * control_init, 2 * control_init);
    auto measure = [&](const Eigen::Vector2cd& target) {
      const Eigen::Vector2cd out = b * target;
      QutritMatrix r = QutritMatrix::Zero();
      r.topLeftCorner<2, 2>() = out * out.adjoint();
      return bloch_vector(r);
    };
    for (int p = 0; p < kPreparations; ++p) {
      t.points[static_cast<size_t>(p)].push_back(measure(preparation(p)));
      t.antipodes[static_cast<size_t>(p)].push_back(measure(antipode(p)));
    }
    t.block_phase.push_back(block_phase(b));
  }
  return t;
}

HamiltonianFit fit_effective_hamiltonian(const BlochTrajectory& traj0, const BlochTrajectory& traj1,
                                         double residual_threshold) {
  check_trajectory(traj0);
  check_trajectory(traj1);
  if (traj0.durations != traj1.durations) throw InvalidArgument("trajectories use different duration grids");
  if (traj0.control_init == traj1.control_init) throw InvalidArgument("need one trajectory per control state");
  const BlochTrajectory& t0 = traj0.control_init == 0 ? traj0 : traj1;
  const BlochTrajectory& t1 = traj0.control_init == 0 ? traj1 : traj0;

  const BlockFit f0 = fit_block(t0);
  const BlockFit f1 = fit_block(t1);

  HamiltonianFit out;
  out.block_rates = {f0.w, f1.w};
  const Eigen::Vector3d mean = 0.5 * (f0.w + f1.w);
  const Eigen::Vector3d diff = 0.5 * (f0.w - f1.w);
  out.rates.omega_ix = mean.x();
  out.rates.omega_iy = mean.y();
  out.rates.omega_iz = mean.z();
  out.rates.omega_zx = diff.x();
  out.rates.omega_zy = diff.y();
  out.rates.omega_zz = diff.z();

  // Relative block phase grows as Omega_ZI * d.
  const auto p0 = unwrap(t0.block_phase, kPi);
  const auto p1 = unwrap(t1.block_phase, kPi);
  const size_t n = p0.size();
  double sd = 0, sp = 0, sdd = 0, sdp = 0;
  for (size_t i = 0; i < n; ++i) {
    const double d = t0.durations[i], p = p0[i] - p1[i];
    sd += d;
    sp += p;
    sdd += d * d;
    sdp += d * p;
  }
  const double nn = static_cast<double>(n);
  out.rates.omega_zi = (nn * sdp - sd * sp) / (nn * sdd - sd * sd);

  out.residual_rms = std::sqrt((f0.rss + f1.rss) / static_cast<double>(f0.n + f1.n));
  out.block_diagonal = out.residual_rms <= residual_threshold;
  return out;
}

EffectiveHamiltonian GateTomography::rates() const {
  EffectiveHamiltonian h;
  if (!(duration > 0)) return h;
  const Eigen::Vector3d mean = 0.5 * (v0 + v1) / duration;
  const Eigen::Vector3d diff = 0.5 * (v0 - v1) / duration;
  h.omega_ix = mean.x();
  h.omega_iy = mean.y();
  h.omega_iz = mean.z();
  h.omega_zx = diff.x();
  h.omega_zy = diff.y();
  h.omega_zz = diff.z();
  double dphi = phi0 - phi1;
  dphi -= kPi * std::round(dphi / kPi);
  h.omega_zi = dphi / duration;
  return h;
}

GateTomography gate_tomography(const PairSimulator& sim, const Schedule& segment) {
  const Operator u = sim.unitary(segment);
  GateTomography g;
  g.duration = segment.duration();
  for (int k = 0; k < 2; ++k) {
    std::array<Eigen::Vector3d, kPreparations> img;
    auto measure = [&](const Eigen::Vector2cd& target) {
      const StateVector out = u * product_state(k, target);
      double kept = 0;
      for (int q = 0; q < 4; ++q) kept += std::norm(out(qutrit_index(q)));
      g.leakage = std::max(g.leakage, 1.0 - kept);
      const DensityMatrix rho = out * out.adjoint();
      return bloch_vector(partial_trace(rho, Qubit::target)).xyz();
    };
    for (int p = 0; p < kPreparations; ++p) {
      img[static_cast<size_t>(p)] = 0.5 * (measure(preparation(p)) - measure(antipode(p)));
    }
    const Eigen::Vector3d v = rotation_vector(kabsch_rotation(img[1], img[2], img[0]));
    const double phi = block_phase(target_block(u, k));
    if (k == 0) {
      g.v0 = v;
      g.phi0 = phi;
    } else {
      g.v1 = v;
      g.phi1 = phi;
    }
  }
  return g;
}

Matrix4c effective_ecr(const EffectiveHamiltonian& plus, const EffectiveHamiltonian& minus, double segment_duration) {
  return expm_hermitian4(minus.matrix(), segment_duration) * pauli_word(1, 0) *
         expm_hermitian4(plus.matrix(), segment_duration);
}

double term_epg(const EffectiveHamiltonian& plus, const EffectiveHamiltonian& minus, Term term,
                double segment_duration) {
  if (plus[term] == 0.0 && minus[term] == 0.0) return 0.0;
  EffectiveHamiltonian p0 = plus, m0 = minus;
  p0[term] = 0.0;
  m0[term] = 0.0;
  const Matrix4c full = effective_ecr(plus, minus, segment_duration);
  const Matrix4c without = effective_ecr(p0, m0, segment_duration);
  return std::max(0.0, 1.0 - average_gate_fidelity(without, full));
}

double term_epg(const EffectiveHamiltonian& h, Term term, double segment_duration) {
  return term_epg(h, echo_partner(h), term, segment_duration);
}

}  // namespace ecr
