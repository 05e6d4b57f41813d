#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "ecr/benchmarking.hpp"

using namespace ecr;

namespace {

Matrix2c h_gate() {
  Matrix2c h;
  h << 1, 1, 1, -1;
  return h / std::sqrt(2.0);
}

Matrix2c s_gate() {
  Matrix2c s = Matrix2c::Identity();
  s(1, 1) = cplx(0, 1);
  return s;
}

const Matrix2c kI = Matrix2c::Identity();

Matrix4c cnot() {
  Matrix4c m = Matrix4c::Zero();
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
  return m;
}

RBOptions quick(int seeds = 10) {
  RBOptions o;
  o.n_seeds = seeds;
  o.exact = true;
  o.lengths = {1, 4, 8, 16, 32};
  o.readout = {0, 0.9};
  o.seed = 7;
  return o;
}

}  // namespace

TEST(Clifford, SingleQubitGroupHas24Elements) {
  const auto& c = single_qubit_cliffords();
  ASSERT_EQ(c.size(), 24u);
  EXPECT_LT((c[0] - kI).cwiseAbs().maxCoeff(), 1e-12);
  const auto& s1 = s1_indices();
  EXPECT_EQ(s1[0], 0);
  const Matrix2c v = c[s1[1]];
  EXPECT_LT((v * pauli::x() * v.adjoint() - pauli::y()).norm(), 1e-12);
  EXPECT_LT((v * pauli::z() * v.adjoint() - pauli::x()).norm(), 1e-12);
}

TEST(Clifford, GroupOrderFromGenerators) {
  const std::vector<Matrix4c> gens{kron2(h_gate(), kI), kron2(kI, h_gate()), kron2(s_gate(), kI), kron2(kI, s_gate()),
                                   cnot()};
  EXPECT_EQ(closure_size(gens), static_cast<std::size_t>(kCliffordGroupOrder));
}

TEST(Clifford, TableIsTheWholeGroup) {
  const auto& t = clifford_table();
  ASSERT_EQ(t.size(), static_cast<std::size_t>(kCliffordGroupOrder));
  std::map<CliffordClass, int> sizes;
  for (const auto& e : t) ++sizes[e.cls];
  EXPECT_EQ(sizes[CliffordClass::single], 576);
  EXPECT_EQ(sizes[CliffordClass::cnot], 5184);
  EXPECT_EQ(sizes[CliffordClass::iswap], 5184);
  EXPECT_EQ(sizes[CliffordClass::swap], 576);
  for (std::size_t i = 0; i < t.size(); i += 37) EXPECT_TRUE(is_clifford(t[i].unitary));
  // Closure under composition: every product is found.
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, t.size() - 1);
  for (int k = 0; k < 500; ++k) {
    const Matrix4c p = t[pick(rng)].unitary * t[pick(rng)].unitary;
    EXPECT_TRUE(equal_up_to_phase(find_clifford(p).unitary, p));
  }
}

TEST(Clifford, IdentityMapsPaulisToThemselves) {
  const CliffordElement& e = find_clifford(cplx(0, 1) * Matrix4c::Identity());
  EXPECT_EQ(e.cls, CliffordClass::single);
  for (int p = 0; p < 16; ++p) {
    const Matrix4c w = pauli_word(p / 4, p % 4);
    EXPECT_LT((e.unitary * w * e.unitary.adjoint() - w).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_TRUE(compile_to_natives(e).empty());
}

TEST(Clifford, NonCliffordIsRejected) {
  const Matrix4c t = kron2(Matrix2c(Eigen::Vector2cd(1, std::polar(1.0, std::numbers::pi / 4)).asDiagonal()), kI);
  EXPECT_FALSE(is_clifford(t));
  EXPECT_THROW(find_clifford(t), InvalidArgument);
  EXPECT_THROW(make_clifford({0, 24}, CliffordClass::single), InvalidArgument);
  EXPECT_THROW(make_clifford({0, 0}, CliffordClass::swap, {1, 0}), InvalidArgument);
}

TEST(Clifford, SamplingFollowsClassWeights) {
  std::mt19937_64 rng(11);
  constexpr int n = 50000;
  std::array<int, 4> counts{};
  for (int i = 0; i < n; ++i) ++counts[static_cast<int>(sample_clifford(rng).cls)];
  for (int c = 0; c < 4; ++c) {
    const double p = kClassWeights[c];
    EXPECT_NEAR(counts[c], n * p, 3 * std::sqrt(n * p * (1 - p))) << to_string(static_cast<CliffordClass>(c));
  }
}

TEST(Compile, EveryElementMatchesItsUnitary) {
  const std::map<CliffordClass, int> expected{
      {CliffordClass::single, 0}, {CliffordClass::cnot, 1}, {CliffordClass::iswap, 2}, {CliffordClass::swap, 3}};
  for (const auto& e : clifford_table()) {
    const auto ops = compile_to_natives(e);
    ASSERT_TRUE(equal_up_to_phase(ideal_unitary(ops), e.unitary));
    ASSERT_EQ(ecr_count(ops), expected.at(e.cls));
  }
}

TEST(Compile, SingleQubitWordsUseAtMostTwoSx) {
  for (int a = 0; a < 24; ++a) {
    const auto ops = compile_to_natives(make_clifford({a, a}, CliffordClass::single));
    int sx_count = 0;
    for (const auto& op : ops) sx_count += op.kind == NativeOp::Kind::sx && op.qubit == Qubit::control;
    EXPECT_LE(sx_count, 2);
  }
}

TEST(RB, NoiselessSurvivalIsOne) {
  const auto curve = run_rb(ideal_gate_set(), quick(4), false);
  for (const auto& row : curve.samples)
    for (double s : row) EXPECT_NEAR(s, 1.0, 1e-9);
  EXPECT_NEAR(curve.fit.alpha, 1.0, 1e-6);
}

TEST(RB, DepolarizingRateIsRecovered) {
  RBOptions o = quick();
  o.clifford_depolarizing = 0.02;
  const auto curve = run_rb(ideal_gate_set(), o, false);
  EXPECT_NEAR(curve.fit.alpha, 0.98, 0.005);
}

TEST(RB, InterleavedDepolarizingGivesExpectedEpg) {
  RBOptions o;
  o.n_seeds = 30;
  o.shots = 1024;
  o.seed = 5;
  o.interleaved_depolarizing = 0.02;
  const IRBResult r = run_irb(ideal_gate_set(), o);
  EXPECT_NEAR(r.epg, 0.75 * 0.02, 0.15 * 0.75 * 0.02);
  EXPECT_GT(r.epg_err, 0);
  EXPECT_FALSE(r.negative_warning);
}

TEST(RB, EpgFormula) {
  EXPECT_NEAR(irb_epg(0.98, 0.94), 0.75 * (1 - 0.94 / 0.98), 1e-15);
  EXPECT_NEAR(irb_epg(0.98, 0.94), 0.0306, 1e-4);
  EXPECT_EQ(irb_epg(0.9, 0.9), 0.0);
  IRBResult r;
  r.reference.fit.alpha = 0.97;
  r.reference.fit.alpha_err = 1e-3;
  r.interleaved.fit.alpha = 0.99;
  r.interleaved.fit.alpha_err = 1e-3;
  r = fit_epg(r);
  EXPECT_LT(r.epg, 0);
  EXPECT_TRUE(r.negative_warning);
  EXPECT_THROW(irb_epg(0.0, 0.9), InvalidArgument);
}

TEST(RB, DeterministicAcrossThreadCounts) {
  RBOptions o = quick(6);
  o.exact = false;
  o.shots = 200;
  o.clifford_depolarizing = 0.03;
  o.threads = 1;
  const auto a = run_rb(ideal_gate_set(), o, true);
  o.threads = 4;
  const auto b = run_rb(ideal_gate_set(), o, true);
  EXPECT_EQ(a.samples, b.samples);
}

TEST(RB, ReadoutErrorLowersTheFloorNotTheDecay) {
  RBOptions o = quick();
  o.clifford_depolarizing = 0.02;
  const double clean = run_rb(ideal_gate_set(), o, false).fit.alpha;
  o.readout.assignment_error = 0.04;
  const auto noisy = run_rb(ideal_gate_set(), o, false);
  EXPECT_NEAR(noisy.fit.alpha, clean, 1e-3);
  EXPECT_LT(noisy.mean.front(), 0.93);
}

TEST(RB, OptionsAreValidated) {
  RBOptions o;
  o.lengths = {1, 2};
  EXPECT_THROW(o.validate(), InvalidArgument);
  o = RBOptions{};
  o.clifford_depolarizing = 1.5;
  EXPECT_THROW(o.validate(), InvalidArgument);
  o = RBOptions{};
  o.n_seeds = 0;
  EXPECT_THROW(o.validate(), InvalidArgument);
}

TEST(RB, FlatReferenceFitsToUnitDecay) {
  std::vector<int> m;
  std::vector<double> y;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0, 0.003);
  for (int len : {2, 4, 8, 16, 32, 64})
    for (int s = 0; s < 30; ++s) {
      m.push_back(len);
      y.push_back(0.92 + noise(rng));
    }
  EXPECT_GT(fit_decay(m, y).alpha, 0.999);
}

TEST(RB, SequencesInvertToIdentity) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<NativeOp> ops;
    Matrix4c total = Matrix4c::Identity();
    for (int k = 0; k < 12; ++k) {
      const CliffordElement c = sample_clifford(rng);
      const auto part = compile_to_natives(c);
      ops.insert(ops.end(), part.begin(), part.end());
      total = c.unitary * total;
    }
    const auto inv = compile_to_natives(find_clifford(total.adjoint()));
    ops.insert(ops.end(), inv.begin(), inv.end());
    EXPECT_TRUE(equal_up_to_phase(ideal_unitary(ops), Matrix4c::Identity()));
  }
}

TEST(RB, FitRecoversSyntheticDecay) {
  std::vector<int> m;
  std::vector<double> y;
  for (int len : {1, 2, 4, 8, 16, 32, 64}) {
    m.push_back(len);
    y.push_back(0.7 * std::pow(0.95, len) + 0.27);
  }
  const DecayFit f = fit_decay(m, y);
  EXPECT_NEAR(f.alpha, 0.95, 1e-8);
  EXPECT_NEAR(f.a, 0.7, 1e-6);
  EXPECT_NEAR(f.b, 0.27, 1e-6);
  EXPECT_LT(f.residual_rms, 1e-8);
}
