#include "ecr/benchmarking.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <boost/container_hash/hash.hpp>

#include "ecr/fitting.hpp"

namespace ecr {

namespace {

constexpr double kPi = std::numbers::pi;

template <int N>
using CMat = Eigen::Matrix<cplx, N, N>;

template <int N>
CMat<N> canonical(const CMat<N>& u) {
  for (int k = 0; k < N * N; ++k) {
    const cplx z = u(k % N, k / N);
    if (std::abs(z) > 1e-3) return u * (std::conj(z) / std::abs(z));
  }
  return u;
}

using Key = std::vector<std::int64_t>;

struct KeyHash {
  std::size_t operator()(const Key& k) const { return boost::hash_range(k.begin(), k.end()); }
};

template <int N>
Key key_of(const CMat<N>& u) {
  const CMat<N> c = canonical<N>(u);
  Key k(2 * N * N);
  for (int i = 0; i < N * N; ++i) {
    k[2 * i] = std::llround(c(i % N, i / N).real() * 1e6);
    k[2 * i + 1] = std::llround(c(i % N, i / N).imag() * 1e6);
  }
  return k;
}

Matrix2c h_gate() {
  Matrix2c h;
  h << 1, 1, 1, -1;
  return h / std::sqrt(2.0);
}

Matrix2c rz_gate(double theta) {
  Matrix2c r = Matrix2c::Identity();
  r(1, 1) = std::polar(1.0, theta);
  return r;
}

Matrix4c cnot() {
  Matrix4c m = Matrix4c::Zero();
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
  return m;
}

Matrix4c iswap() {
  Matrix4c m = Matrix4c::Zero();
  m(0, 0) = m(3, 3) = 1;
  m(1, 2) = m(2, 1) = cplx(0, 1);
  return m;
}

Matrix4c swap_gate() {
  Matrix4c m = Matrix4c::Zero();
  m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1;
  return m;
}

struct SingleQubitTables {
  std::vector<Matrix2c> elements;
  std::unordered_map<Key, int, KeyHash> index;
  std::vector<std::vector<int>> product;  // product[b][a] = index of C_b C_a
  std::array<int, 3> s1{};
  std::vector<std::vector<std::pair<NativeOp::Kind, double>>> natives;  // time order
};

const SingleQubitTables& c1() {
  static const SingleQubitTables t = [] {
    SingleQubitTables t;
    std::vector<Matrix2c> frontier{Matrix2c::Identity()};
    t.index.emplace(key_of<2>(Matrix2c::Identity()), 0);
    t.elements.push_back(canonical<2>(Matrix2c(Matrix2c::Identity())));
    const std::array<Matrix2c, 2> gens{h_gate(), rz_gate(0.5 * kPi)};
    while (!frontier.empty()) {
      std::vector<Matrix2c> next;
      for (const auto& u : frontier) {
        for (const auto& g : gens) {
          const Matrix2c v = canonical<2>(g * u);
          if (t.index.emplace(key_of<2>(v), static_cast<int>(t.elements.size())).second) {
            t.elements.push_back(v);
            next.push_back(v);
          }
        }
      }
      frontier = std::move(next);
    }
    const int n = static_cast<int>(t.elements.size());
    t.product.assign(n, std::vector<int>(n));
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a) t.product[b][a] = t.index.at(key_of<2>(t.elements[b] * t.elements[a]));

    const Matrix2c x = pauli::x(), y = pauli::y(), z = pauli::z();
    for (int i = 0; i < n; ++i) {
      const Matrix2c& v = t.elements[i];
      if ((v * x * v.adjoint() - y).norm() < 1e-9 && (v * y * v.adjoint() - z).norm() < 1e-9) {
        t.s1 = {0, i, t.product[i][i]};
      }
    }

    // Shortest RZ / SX words, fewest SX first.
    t.natives.resize(n);
    std::vector<bool> found(n, false);
    const Matrix2c sx = ideal::sx();
    auto record = [&](const std::vector<std::pair<NativeOp::Kind, double>>& word) {
      Matrix2c u = Matrix2c::Identity();
      for (const auto& [kind, angle] : word) u = (kind == NativeOp::Kind::sx ? sx : rz_gate(angle)) * u;
      const int i = t.index.at(key_of<2>(u));
      if (found[i]) return;
      found[i] = true;
      std::vector<std::pair<NativeOp::Kind, double>> trimmed;
      for (const auto& op : word) {
        if (op.first == NativeOp::Kind::rz && op.second == 0.0) continue;
        trimmed.push_back(op);
      }
      t.natives[i] = trimmed;
    };
    const auto q = [](int k) { return 0.5 * kPi * k; };
    for (int a = 0; a < 4; ++a) record({{NativeOp::Kind::rz, q(a)}});
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) record({{NativeOp::Kind::rz, q(a)}, {NativeOp::Kind::sx, 0}, {NativeOp::Kind::rz, q(b)}});
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c)
          record({{NativeOp::Kind::rz, q(a)},
                  {NativeOp::Kind::sx, 0},
                  {NativeOp::Kind::rz, q(b)},
                  {NativeOp::Kind::sx, 0},
                  {NativeOp::Kind::rz, q(c)}});
    return t;
  }();
  return t;
}

Matrix4c local(int c, int t) { return kron2(c1().elements[c], c1().elements[t]); }

// One step of a compiled circuit: an ECR or a layer of single-qubit Cliffords.
struct Layer {
  bool ecr = false;
  int c = 0, t = 0;
};

struct LocalIndex {
  std::unordered_map<Key, std::pair<int, int>, KeyHash> map;
};

const LocalIndex& locals() {
  static const LocalIndex l = [] {
    LocalIndex l;
    for (int a = 0; a < 24; ++a)
      for (int b = 0; b < 24; ++b) l.map.emplace(key_of<4>(local(a, b)), std::make_pair(a, b));
    return l;
  }();
  return l;
}

// Time-ordered layers realizing `target` as local, ECR, local [, ECR, local].
std::vector<Layer> ecr_decomposition(const Matrix4c& target, int n_ecr) {
  const Matrix4c e = ideal::ecr();
  const auto& lm = locals().map;
  if (n_ecr == 1) {
    for (int c = 0; c < 24; ++c)
      for (int d = 0; d < 24; ++d) {
        const Matrix4c m = e * local(c, d);
        const auto it = lm.find(key_of<4>(target * m.adjoint()));
        if (it != lm.end()) return {{false, c, d}, {true}, {false, it->second.first, it->second.second}};
      }
  } else {
    for (int c = 0; c < 24; ++c)
      for (int d = 0; d < 24; ++d) {
        const Matrix4c first = e * local(c, d);
        for (int f = 0; f < 24; ++f)
          for (int g = 0; g < 24; ++g) {
            const Matrix4c m = e * local(f, g) * first;
            const auto it = lm.find(key_of<4>(target * m.adjoint()));
            if (it != lm.end()) {
              return {{false, c, d}, {true}, {false, f, g}, {true}, {false, it->second.first, it->second.second}};
            }
          }
      }
  }
  throw Error("no ECR decomposition found");
}

struct EntanglerCircuits {
  std::vector<Layer> cnot, iswap, swap;
};

const EntanglerCircuits& entanglers() {
  static const EntanglerCircuits e = [] {
    EntanglerCircuits e;
    e.cnot = ecr_decomposition(cnot(), 1);
    e.iswap = ecr_decomposition(iswap(), 2);
    // SWAP = CNOT, reversed CNOT, CNOT with the reversed one as (H x H) CNOT (H x H).
    const int h = c1().index.at(key_of<2>(h_gate()));
    e.swap = e.cnot;
    e.swap.push_back({false, h, h});
    e.swap.insert(e.swap.end(), e.cnot.begin(), e.cnot.end());
    e.swap.push_back({false, h, h});
    e.swap.insert(e.swap.end(), e.cnot.begin(), e.cnot.end());
    return e;
  }();
  return e;
}

Matrix4c entangler(CliffordClass cls) {
  switch (cls) {
    case CliffordClass::single:
      return Matrix4c::Identity();
    case CliffordClass::cnot:
      return cnot();
    case CliffordClass::iswap:
      return iswap();
    case CliffordClass::swap:
      return swap_gate();
  }
  return Matrix4c::Identity();
}

struct Table {
  std::vector<CliffordElement> elements;
  std::unordered_map<Key, int, KeyHash> index;
};

const Table& table() {
  static const Table t = [] {
    Table t;
    t.elements.reserve(kCliffordGroupOrder);
    for (CliffordClass cls : {CliffordClass::single, CliffordClass::cnot, CliffordClass::iswap, CliffordClass::swap}) {
      const int n_right = (cls == CliffordClass::cnot || cls == CliffordClass::iswap) ? 3 : 1;
      for (int a = 0; a < 24; ++a)
        for (int b = 0; b < 24; ++b)
          for (int r0 = 0; r0 < n_right; ++r0)
            for (int r1 = 0; r1 < n_right; ++r1) t.elements.push_back(make_clifford({a, b}, cls, {r0, r1}));
    }
    for (std::size_t i = 0; i < t.elements.size(); ++i) {
      if (!t.index.emplace(key_of<4>(t.elements[i].unitary), static_cast<int>(i)).second) {
        throw Error("Clifford class decomposition is not a partition");
      }
    }
    return t;
  }();
  return t;
}

Matrix2c qubit_gate(const NativeOp& op) {
  return op.kind == NativeOp::Kind::sx ? ideal::sx() : rz_gate(op.angle);
}

// Column-stacked density vector of the two-transmon space.
using DensityVector = Eigen::Matrix<cplx, kDim * kDim, 1>;

void apply_rz(DensityVector& v, Qubit q, double theta) {
  std::array<cplx, kDim> u;
  for (int i = 0; i < kDim; ++i) u[i] = std::polar(1.0, theta * (q == Qubit::control ? i / 3 : i % 3));
  for (int j = 0; j < kDim; ++j)
    for (int i = 0; i < kDim; ++i) v(i + kDim * j) *= u[i] * std::conj(u[j]);
}

void depolarize(DensityVector& v, double lambda) {
  if (lambda == 0) return;
  Eigen::Map<Operator> rho(v.data());
  constexpr std::array<int, 4> comp{0, 1, 3, 4};
  double tr = 0;
  for (int i : comp) tr += rho(i, i).real();
  for (int i : comp)
    for (int j : comp) rho(i, j) = (1 - lambda) * rho(i, j) + (i == j ? lambda * tr / 4 : 0.0);
}

void apply_natives(DensityVector& v, const std::vector<NativeOp>& ops, const NativeGateSet& g) {
  for (const auto& op : ops) {
    switch (op.kind) {
      case NativeOp::Kind::rz:
        apply_rz(v, op.qubit, op.angle);
        break;
      case NativeOp::Kind::sx:
        v = (op.qubit == Qubit::control ? g.sx_control : g.sx_target) * v;
        break;
      case NativeOp::Kind::ecr:
        v = g.ecr * v;
        break;
    }
  }
}

}  // namespace

const char* to_string(CliffordClass c) {
  switch (c) {
    case CliffordClass::single:
      return "single";
    case CliffordClass::cnot:
      return "cnot";
    case CliffordClass::iswap:
      return "iswap";
    case CliffordClass::swap:
      return "swap";
  }
  return "?";
}

const std::vector<Matrix2c>& single_qubit_cliffords() { return c1().elements; }
const std::array<int, 3>& s1_indices() { return c1().s1; }

Matrix4c canonical_phase(const Matrix4c& u) { return canonical<4>(u); }

bool equal_up_to_phase(const Matrix4c& a, const Matrix4c& b, double tol) {
  const cplx overlap = (b.adjoint() * a).trace();
  if (std::abs(overlap) < 1e-12) return false;
  return (a - b * (overlap / std::abs(overlap))).cwiseAbs().maxCoeff() < tol;
}

bool is_clifford(const Matrix4c& u, double tol) {
  if ((u.adjoint() * u - Matrix4c::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  for (int p = 1; p < 16; ++p) {
    const Matrix4c q = u * pauli_word(p / 4, p % 4) * u.adjoint();
    int hits = 0;
    for (int w = 0; w < 16; ++w) {
      const cplx c = (pauli_word(w / 4, w % 4).adjoint() * q).trace() / 4.0;
      if (std::abs(c) < tol) continue;
      if (std::abs(std::abs(c.real()) - 1) > tol || std::abs(c.imag()) > tol) return false;
      ++hits;
    }
    if (hits != 1) return false;
  }
  return true;
}

CliffordElement make_clifford(std::array<int, 2> left, CliffordClass cls, std::array<int, 2> right) {
  const bool has_right = cls == CliffordClass::cnot || cls == CliffordClass::iswap;
  for (int i : left)
    if (i < 0 || i >= 24) throw InvalidArgument("single-qubit Clifford index out of range");
  for (int i : right)
    if (i < 0 || i >= (has_right ? 3 : 1)) throw InvalidArgument("S1 index out of range for this class");
  CliffordElement e;
  e.left = left;
  e.cls = cls;
  e.right = right;
  const auto& s1 = c1().s1;
  e.unitary = local(s1[right[0]], s1[right[1]]) * entangler(cls) * local(left[0], left[1]);
  return e;
}

const std::vector<CliffordElement>& clifford_table() { return table().elements; }

const CliffordElement& find_clifford(const Matrix4c& u) {
  const auto it = table().index.find(key_of<4>(u));
  if (it == table().index.end()) throw InvalidArgument("not a two-qubit Clifford");
  return table().elements[it->second];
}

CliffordElement sample_clifford(std::mt19937_64& rng) {
  std::discrete_distribution<int> cls_dist(kClassWeights.begin(), kClassWeights.end());
  std::uniform_int_distribution<int> c1_dist(0, 23), s1_dist(0, 2);
  const auto cls = static_cast<CliffordClass>(cls_dist(rng));
  const int a = c1_dist(rng), b = c1_dist(rng);
  std::array<int, 2> right{0, 0};
  if (cls == CliffordClass::cnot || cls == CliffordClass::iswap) right = {s1_dist(rng), s1_dist(rng)};
  return make_clifford({a, b}, cls, right);
}

std::size_t closure_size(const std::vector<Matrix4c>& generators) {
  std::unordered_map<Key, int, KeyHash> seen;
  std::vector<Matrix4c> frontier{Matrix4c::Identity()};
  seen.emplace(key_of<4>(Matrix4c::Identity()), 0);
  while (!frontier.empty()) {
    std::vector<Matrix4c> next;
    for (const auto& u : frontier) {
      for (const auto& g : generators) {
        const Matrix4c v = canonical<4>(g * u);
        if (seen.emplace(key_of<4>(v), 0).second) next.push_back(v);
      }
    }
    frontier = std::move(next);
  }
  return seen.size();
}

std::vector<NativeOp> compile_to_natives(const CliffordElement& c) {
  std::vector<Layer> layers{{false, c.left[0], c.left[1]}};
  switch (c.cls) {
    case CliffordClass::single:
      break;
    case CliffordClass::cnot:
      layers.insert(layers.end(), entanglers().cnot.begin(), entanglers().cnot.end());
      break;
    case CliffordClass::iswap:
      layers.insert(layers.end(), entanglers().iswap.begin(), entanglers().iswap.end());
      break;
    case CliffordClass::swap:
      layers.insert(layers.end(), entanglers().swap.begin(), entanglers().swap.end());
      break;
  }
  const auto& s1 = c1().s1;
  layers.push_back({false, s1[c.right[0]], s1[c.right[1]]});

  // Merge neighbouring local layers, then lower them.
  std::vector<Layer> merged;
  for (const Layer& l : layers) {
    if (!l.ecr && !merged.empty() && !merged.back().ecr) {
      merged.back().c = c1().product[l.c][merged.back().c];
      merged.back().t = c1().product[l.t][merged.back().t];
    } else {
      merged.push_back(l);
    }
  }
  std::vector<NativeOp> ops;
  for (const Layer& l : merged) {
    if (l.ecr) {
      ops.push_back({NativeOp::Kind::ecr, Qubit::control, 0});
      continue;
    }
    for (auto [q, idx] : {std::pair{Qubit::control, l.c}, std::pair{Qubit::target, l.t}}) {
      for (const auto& [kind, angle] : c1().natives[idx]) ops.push_back({kind, q, angle});
    }
  }
  return ops;
}

Matrix4c ideal_unitary(const std::vector<NativeOp>& ops) {
  Matrix4c u = Matrix4c::Identity();
  for (const auto& op : ops) {
    if (op.kind == NativeOp::Kind::ecr) {
      u = ideal::ecr() * u;
    } else if (op.qubit == Qubit::control) {
      u = kron2(qubit_gate(op), Matrix2c(Matrix2c::Identity())) * u;
    } else {
      u = kron2(Matrix2c(Matrix2c::Identity()), qubit_gate(op)) * u;
    }
  }
  return u;
}

int ecr_count(const std::vector<NativeOp>& ops) {
  return static_cast<int>(std::ranges::count_if(ops, [](const NativeOp& o) { return o.kind == NativeOp::Kind::ecr; }));
}

NativeGateSet ideal_gate_set() {
  auto channel = [](const Matrix4c& u) { return unitary_superoperator(embed_two_qubit_operator(u, 1.0)); };
  return {channel(kron2(ideal::sx(), Matrix2c(Matrix2c::Identity()))), channel(kron2(Matrix2c(Matrix2c::Identity()), ideal::sx())),
          channel(ideal::ecr())};
}

NativeGateSet simulated_gate_set(const PairSimulator& sim, const SingleQubitGates& sq, const CRPulseConfig& cr,
                                 bool corrected, bool noisy) {
  return {sim.channel(sx_schedule(sq.control, Qubit::control), noisy),
          sim.channel(sx_schedule(sq.target, Qubit::target), noisy),
          sim.channel(assemble_ecr(cr, sq, corrected), noisy)};
}

double survival_probability(const DensityMatrix& rho, const ReadoutModel& r) {
  const std::array<double, 3> reads_zero{1 - r.assignment_error, r.assignment_error, 1 - r.leak_reads_one};
  double s = 0;
  for (int i = 0; i < kDim; ++i) s += rho(i, i).real() * reads_zero[i / 3] * reads_zero[i % 3];
  return s;
}

void RBOptions::validate() const {
  if (lengths.size() < 3) throw InvalidArgument("RB needs at least three lengths");
  for (int m : lengths)
    if (m < 1) throw InvalidArgument("RB lengths must be positive");
  if (n_seeds < 1) throw InvalidArgument("n_seeds must be positive");
  if (!exact && shots < 1) throw InvalidArgument("shots must be positive");
  for (double p : {clifford_depolarizing, interleaved_depolarizing, readout.assignment_error, readout.leak_reads_one}) {
    if (!(p >= 0 && p <= 1)) throw InvalidArgument("probabilities must lie in [0, 1]");
  }
}

DecayFit fit_decay(const std::vector<int>& m, const std::vector<double>& survival) {
  if (m.size() != survival.size() || m.size() < 3) throw InvalidArgument("decay fit needs matching samples");
  std::map<int, std::pair<double, int>> by_length;
  for (std::size_t i = 0; i < m.size(); ++i) {
    by_length[m[i]].first += survival[i];
    by_length[m[i]].second += 1;
  }
  if (by_length.size() < 3) throw InvalidArgument("decay fit needs three distinct lengths");

  // Log-linear start with B = 1/4.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& [len, acc] : by_length) {
    const double y = acc.first / acc.second - 0.25;
    if (y <= 1e-9) continue;
    sx += len;
    sy += std::log(y);
    sxx += double(len) * len;
    sxy += len * std::log(y);
    ++n;
  }
  double alpha0 = 1.0, a0 = 0.75;
  if (n >= 2 && n * sxx - sx * sx > 0) {
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    alpha0 = std::clamp(std::exp(slope), 0.01, 1.0);
    a0 = std::exp((sy - slope * sx) / n);
  }
  // A, alpha and B are probabilities; p = (1 + sin u) / 2 keeps each in [0, 1].
  const int k = static_cast<int>(m.size());
  const auto to_p = [](double u) { return 0.5 * (1 + std::sin(u)); };
  const auto to_u = [](double p) { return std::asin(std::clamp(2 * p - 1, -1.0, 1.0)); };
  auto solve = [&](bool free_b) {
    auto residual = [&](const Eigen::VectorXd& u, Eigen::VectorXd& r) {
      const double a = to_p(u(0)), alpha = to_p(u(1)), b = free_b ? to_p(u(2)) : 0.25;
      for (int i = 0; i < k; ++i) r(i) = a * std::pow(alpha, m[i]) + b - survival[i];
    };
    Eigen::VectorXd u0(free_b ? 3 : 2);
    u0.head(2) << to_u(std::min(a0, 1.0)), to_u(alpha0);
    if (free_b) u0(2) = to_u(0.25);
    const LeastSquaresResult fit = least_squares(residual, u0, k);
    DecayFit f;
    f.a = to_p(fit.x(0));
    f.alpha = to_p(fit.x(1));
    f.b = free_b ? to_p(fit.x(2)) : 0.25;
    const int n_par = free_b ? 3 : 2;
    Eigen::MatrixXd jac(k, n_par);
    for (int i = 0; i < k; ++i) {
      jac(i, 0) = std::pow(f.alpha, m[i]);
      jac(i, 1) = f.a * m[i] * std::pow(f.alpha, m[i] - 1);
      if (free_b) jac(i, 2) = 1;
    }
    const double s2 = k > n_par ? fit.rss / (k - n_par) : 0.0;
    const Eigen::MatrixXd cov = s2 * (jac.transpose() * jac).completeOrthogonalDecomposition().pseudoInverse();
    f.alpha_err = std::sqrt(std::max(0.0, cov(1, 1)));
    return std::make_pair(f, s2);
  };

  auto [out, s2] = solve(true);
  // A decay indistinguishable from noise leaves A, alpha and B degenerate. The fully
  // mixed survival is 1/4 for any symmetric assignment error, so pin B there.
  const double per_length = static_cast<double>(k) / by_length.size();
  const double drop = out.a * (std::pow(out.alpha, by_length.begin()->first) - std::pow(out.alpha, by_length.rbegin()->first));
  if (drop < 5 * std::sqrt(s2 / per_length)) out = solve(false).first;
  double ss = 0;
  for (const auto& [len, acc] : by_length) {
    const double d = acc.first / acc.second - (out.a * std::pow(out.alpha, len) + out.b);
    ss += d * d;
  }
  out.residual_rms = std::sqrt(ss / static_cast<double>(by_length.size()));
  return out;
}

RBCurve run_rb(const NativeGateSet& gates, const RBOptions& opt, bool interleave) {
  opt.validate();
  const int n_len = static_cast<int>(opt.lengths.size());
  RBCurve curve;
  curve.lengths = opt.lengths;
  curve.samples.assign(n_len, std::vector<double>(opt.n_seeds));

  const std::vector<NativeOp> ecr_ops{{NativeOp::Kind::ecr, Qubit::control, 0}};
  auto run_one = [&](int li, int seed) {
    std::seed_seq seq_seed{opt.seed, std::uint64_t(seed), std::uint64_t(li), std::uint64_t(0)};
    std::mt19937_64 rng(seq_seed);
    DensityVector v = DensityVector::Zero();
    v(0) = 1.0;
    Matrix4c total = Matrix4c::Identity();
    for (int k = 0; k < opt.lengths[li]; ++k) {
      const CliffordElement c = sample_clifford(rng);
      apply_natives(v, compile_to_natives(c), gates);
      depolarize(v, opt.clifford_depolarizing);
      total = c.unitary * total;
      if (interleave) {
        apply_natives(v, ecr_ops, gates);
        depolarize(v, opt.interleaved_depolarizing);
        total = ideal::ecr() * total;
      }
    }
    const CliffordElement& inverse = find_clifford(total.adjoint());
    apply_natives(v, compile_to_natives(inverse), gates);
    depolarize(v, opt.clifford_depolarizing);

    const double p = std::clamp(survival_probability(Eigen::Map<const Operator>(v.data()), opt.readout), 0.0, 1.0);
    if (opt.exact) return p;
    std::seed_seq shot_seed{opt.seed, std::uint64_t(seed), std::uint64_t(li), std::uint64_t(interleave ? 2 : 1)};
    std::mt19937_64 shot_rng(shot_seed);
    std::binomial_distribution<int> shots(opt.shots, p);
    return static_cast<double>(shots(shot_rng)) / opt.shots;
  };

  const int n_tasks = n_len * opt.n_seeds;
  const int n_threads = std::max(1, std::min(n_tasks, opt.threads > 0 ? opt.threads
                                                                       : static_cast<int>(std::thread::hardware_concurrency())));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int task = next++; task < n_tasks; task = next++) {
      try {
        curve.samples[task / opt.n_seeds][task % opt.n_seeds] = run_one(task / opt.n_seeds, task % opt.n_seeds);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (failure) std::rethrow_exception(failure);

  std::vector<int> ms;
  std::vector<double> ys;
  for (int li = 0; li < n_len; ++li) {
    const auto& s = curve.samples[li];
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
    double var = 0;
    for (double x : s) var += (x - mean) * (x - mean);
    curve.mean.push_back(mean);
    curve.stddev.push_back(s.size() > 1 ? std::sqrt(var / (s.size() - 1)) : 0.0);
    for (double x : s) {
      ms.push_back(opt.lengths[li]);
      ys.push_back(x);
    }
  }
  curve.fit = fit_decay(ms, ys);
  return curve;
}

double irb_epg(double alpha_ref, double alpha_int) {
  if (!(alpha_ref > 0)) throw InvalidArgument("reference decay must be positive");
  return 0.75 * (1 - alpha_int / alpha_ref);
}

IRBResult fit_epg(IRBResult r) {
  const DecayFit& ref = r.reference.fit;
  const DecayFit& in = r.interleaved.fit;
  r.alpha_ref = ref.alpha;
  r.alpha_int = in.alpha;
  r.epg = irb_epg(ref.alpha, in.alpha);
  const double rel = std::hypot(in.alpha > 0 ? in.alpha_err / in.alpha : 0.0, ref.alpha_err / ref.alpha);
  r.epg_err = 0.75 * (in.alpha / ref.alpha) * rel;
  r.negative_warning = in.alpha - ref.alpha > std::hypot(in.alpha_err, ref.alpha_err);
  return r;
}

IRBResult run_irb(const NativeGateSet& gates, const RBOptions& options) {
  IRBResult r;
  r.reference = run_rb(gates, options, false);
  r.interleaved = run_rb(gates, options, true);
  r.n_seeds = options.n_seeds;
  r.shots = options.exact ? 0 : options.shots;
  return fit_epg(std::move(r));
}

}  // namespace ecr
