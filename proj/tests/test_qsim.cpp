#include "qfactory/circuits.hpp"
#include "qfactory/qsim.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace qf;

namespace {

Qubit qubit_of(const State& sv, int q) { return extract_qubit(sv, q); }

// (|x>|hx> + |x'>|hx'>)/sqrt 2 on N + 1 qubits, x-measurement post-selected on b.
std::optional<Qubit> reference_stage2(const TwoBranchState& st, const Bits& b, double theta) {
  const int N = static_cast<int>(st.x.size());
  State::Amplitudes a = State::Amplitudes::Zero(Eigen::Index{1} << (N + 1));
  a(static_cast<Eigen::Index>(pack_bits(st.x) | (u64(st.hx) << N))) += 1 / std::sqrt(2.0);
  a(static_cast<Eigen::Index>(pack_bits(st.x_prime) | (u64(st.hx_prime) << N))) += 1 / std::sqrt(2.0);
  State sv = State::from_amplitudes(a);
  std::vector<int> xs(static_cast<std::size_t>(N));
  std::iota(xs.begin(), xs.end(), 0);
  if (project(sv, xs, MeasBasis::xy(theta), b) < 1e-14) return std::nullopt;
  return extract_qubit(sv, N);
}

}  // namespace

TEST(Gates, HadamardAndPhase) {
  State sv(1);
  apply_h(sv, 0);
  EXPECT_NEAR(fidelity(qubit_of(sv, 0), plus_state(0)), 1.0, kTol);
  apply_phase(sv, 0, kPi);
  EXPECT_NEAR(fidelity(qubit_of(sv, 0), plus_state(kPi)), 1.0, kTol);
  apply_gate(sv, Gate::Z, {0});
  EXPECT_NEAR(fidelity(qubit_of(sv, 0), plus_state(0)), 1.0, kTol);
  apply_gate(sv, Gate::H, {0});
  apply_gate(sv, Gate::X, {0});
  EXPECT_NEAR(fidelity(qubit_of(sv, 0), ket1()), 1.0, kTol);
  EXPECT_THROW(apply_gate(sv, Gate::CZ, {0}), std::invalid_argument);
  EXPECT_THROW(apply_h(sv, 1), std::out_of_range);
}

// CZ |+>|+>, X-measure the first qubit with outcome 0: the second qubit becomes H|+> = |0>.
TEST(Gates, CzThenXMeasurementTeleportsHadamard) {
  State sv = product_state<double>({plus_state(0), plus_state(0)});
  apply_cz(sv, 0, 1);
  const double p = project(sv, {0}, MeasBasis::xy(0), Bits{0});
  EXPECT_NEAR(p, 0.5, kTol);
  EXPECT_NEAR(fidelity(qubit_of(sv, 1), ket0()), 1.0, kTol);
}

TEST(Gates, NormPreservedOnRandomCircuits) {
  Rng rng = make_rng(1, "circuits");
  State sv(6);
  for (int step = 0; step < 200; ++step) {
    const int q = static_cast<int>(uniform_below(rng, 6));
    switch (uniform_below(rng, 4)) {
      case 0: apply_h(sv, q); break;
      case 1: apply_phase(sv, q, uniform01(rng) * 2 * kPi); break;
      case 2: apply_x(sv, q); break;
      default: apply_cz(sv, q, (q + 1) % 6); break;
    }
    ASSERT_NEAR(sv.norm_squared(), 1.0, 1e-9);
  }
}

TEST(StateVector, CapEnforced) {
  EXPECT_THROW(State(17), std::length_error);
  EXPECT_NO_THROW(State(3, 3));
  EXPECT_THROW(State(4, 3), std::length_error);
}

TEST(StateVector, DebugDumpOrder) {
  State sv(2);
  apply_x(sv, 0);
  EXPECT_EQ(dump_json(sv), "[[0,0],[1,0],[0,0],[0,0]]");
}

TEST(FunctionUnitary, IdentityBitIsCnotAndConstantIsIdentity) {
  for (int in = 0; in < 4; ++in) {
    State sv(2);
    if (in & 1) apply_x(sv, 0);
    if (in & 2) apply_x(sv, 1);
    State c = sv;
    apply_function_unitary(sv, [](u64 x) { return x; }, {0}, {1});
    const int expect = (in & 1) | (((in >> 1) ^ (in & 1)) << 1);
    EXPECT_NEAR(std::norm(sv.amplitudes()(expect)), 1.0, kTol);
    apply_function_unitary(c, [](u64) { return u64{0}; }, {0}, {1});
    EXPECT_NEAR(std::norm(c.amplitudes()(in)), 1.0, kTol);
  }
}

TEST(FunctionUnitary, ToyFunctionMatchesTruthTableAndIsInvolution) {
  const ParamSet p = default_toy();
  const KeyPair kp = gen(p, 4);
  const ServerCircuit circ(p);
  const State sv = circ.stage1_state(kp.pk);
  const double amp = std::ldexp(1.0, -p.total_bits());
  for (u64 x = 0; x < (u64{1} << p.total_bits()); ++x) {
    const u64 y = pack_bits(encode_image(p, f(kp.pk, *decode(p, unpack_bits(x, p.total_bits())))));
    ASSERT_NEAR(std::norm(sv.amplitudes()(static_cast<Eigen::Index>(x | (y << p.total_bits())))), amp, 1e-12);
  }
  State twice = sv;
  apply_function_unitary(twice, [&kp](u64 x) { return f_packed(kp.pk, x); }, circ.domain, circ.image);
  State fresh(circ.num_qubits());
  for (int q : circ.domain) apply_h(fresh, q);
  EXPECT_NEAR((twice.amplitudes() - fresh.amplitudes()).norm(), 0.0, 1e-12);
}

TEST(Measure, BasicProbabilities) {
  State sv(1);
  apply_h(sv, 0);
  State c = sv;
  EXPECT_NEAR(outcome_probabilities(sv, {0})(0), 0.5, kTol);
  Rng rng = make_rng(3, "m");
  const MeasureResult r = measure(c, {0}, MeasBasis::xy(0), rng);
  EXPECT_EQ(r.outcome, Bits{0});
  EXPECT_NEAR(r.probability, 1.0, kTol);
  State d(2);
  EXPECT_THROW(measure(d, {0, 0}, MeasBasis::computational(), rng), std::invalid_argument);
}

TEST(Measure, DeterministicPerSeed) {
  auto run = [] {
    State sv(4);
    for (int q = 0; q < 4; ++q) apply_h(sv, q);
    Rng rng = make_rng(11, "det");
    return measure(sv, {0, 1, 2, 3}, MeasBasis::computational(), rng).outcome;
  };
  EXPECT_EQ(run(), run());
}

TEST(Measure, ImageDistributionFollowsMultiplicities) {
  const ParamSet p = default_toy();
  const KeyPair kp = gen(p, 5);
  const ServerCircuit circ(p);
  const State sv = circ.stage1_state(kp.pk);
  const Eigen::VectorXd probs = outcome_probabilities(sv, circ.image);
  std::map<u64, int> mult;
  for (const auto& x : enumerate_domain(p)) ++mult[pack_bits(encode_image(p, f(kp.pk, x)))];
  const int M = p.image_bits();
  for (const auto& [y, k] : mult) {
    // outcome_probabilities orders the first listed qubit as most significant.
    u64 idx = 0;
    for (int j = 0; j < M; ++j) idx = (idx << 1) | ((y >> j) & 1);
    EXPECT_NEAR(probs(static_cast<Eigen::Index>(idx)), k * std::ldexp(1.0, -p.total_bits()), 1e-12);
    EXPECT_EQ(k, 2);
  }
  EXPECT_NEAR(probs.sum(), 1.0, 1e-9);
}

TEST(Fidelity, Examples) {
  EXPECT_NEAR(fidelity(plus_state(0.3), plus_state(0.3)), 1.0, kTol);
  EXPECT_NEAR(fidelity(ket0(), ket1()), 0.0, kTol);
  EXPECT_NEAR(fidelity(plus_state(0), plus_state(kPi / 4)), 0.8535533905932737, 1e-9);
  EXPECT_NEAR(fidelity(QubitDescription::bb84(1, 1), QubitDescription::raw(plus_state(kPi))), 1.0, kTol);
}

TEST(Fidelity, FamilyIdentification) {
  for (int L = 0; L < 8; ++L) EXPECT_EQ(as_eight(std::polar(1.0, 0.7) * plus_state(L * kPi / 4)), L);
  EXPECT_EQ(as_bb84(ket1()), std::make_pair(0, 1));
  EXPECT_EQ(as_rotated(plus_state(3 * kPi / 2)), std::make_pair(1, 1));
  EXPECT_FALSE(as_bb84(plus_state(kPi / 4)));
}

TEST(AnalyticStage2, BasisOneAllZeroOutcomeIsPlus) {
  TwoBranchState st{Bits{0, 1, 0}, Bits{1, 1, 1}, 0, 1};
  auto q = analytic_stage2(st, Bits{0, 0, 0}, 0.0);
  ASSERT_TRUE(q);
  EXPECT_NEAR(fidelity(q->vector(), plus_state(0)), 1.0, kTol);
  EXPECT_THROW(analytic_stage2({Bits{0, 1}, Bits{0, 1}, 0, 1}, Bits{0, 0}, 0.0), std::invalid_argument);
}

TEST(AnalyticStage2, AgreesWithStatevector) {
  Rng rng = make_rng(6, "stage2");
  int compared = 0;
  for (int i = 0; i < 100; ++i) {
    const int N = 2 + static_cast<int>(uniform_below(rng, 6));
    Bits x = random_bits(rng, N), xp = random_bits(rng, N);
    x.back() = 0;
    xp.back() = 1;
    const TwoBranchState st{x, xp, coin(rng), coin(rng)};
    const Bits b = random_bits(rng, N);
    for (double theta : {0.0, kPi / 2}) {
      const auto ref = reference_stage2(st, b, theta);
      const auto got = analytic_stage2(st, b, theta);
      ASSERT_EQ(ref.has_value(), got.has_value());
      if (!ref) continue;
      EXPECT_NEAR(fidelity(*ref, got->vector()), 1.0, 1e-9);
      ++compared;
    }
  }
  EXPECT_GT(compared, 100);
}
