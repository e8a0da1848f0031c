#include "qfactory/qfactory8.hpp"

#include <gtest/gtest.h>

using namespace qf;

TEST(ComputeL, AllZeroAndCarryExample) {
  EXPECT_EQ(compute_L(0, 0, 0, 0, 0, 0).L, 0);
  // (B1, B2, B1', B2', s1, s2) = (1, 0, 1, 1, 0, 1): the two quarter-turn terms carry into L1.
  const EightIndex e = compute_L(1, 0, 1, 1, 0, 1);
  EXPECT_EQ(e.L, 5);
  EXPECT_EQ(e.L1(), 1);
  EXPECT_EQ(e.L2(), 0);
  EXPECT_EQ(e.L3(), 1);
}

// All 16 index pairs x 4 branches against the post-selected 3-qubit circuit.
TEST(Merge, ExhaustiveBranchesMatchComputeL) {
  int branches = 0;
  for (int B1 = 0; B1 < 2; ++B1)
    for (int B2 = 0; B2 < 2; ++B2)
      for (int B1p = 0; B1p < 2; ++B1p)
        for (int B2p = 0; B2p < 2; ++B2p) {
          const Qubit in1 = QubitDescription::bb84(B1, B2).vector();
          const Qubit in2 = QubitDescription::rotated(B1p, B2p).vector();
          double total = 0;
          for (int s1 = 0; s1 < 2; ++s1)
            for (int s2 = 0; s2 < 2; ++s2) {
              const MergeBranch br = merge_branch(in1, in2, s1, s2);
              total += br.probability;
              ASSERT_TRUE(br.out);
              const EightIndex L = compute_L(B1, B2, B1p, B2p, s1, s2);
              EXPECT_NEAR(fidelity(*br.out, plus_state(L.theta())), 1.0, kTol);
              EXPECT_EQ(L.L3(), B1);
              EXPECT_GT(br.probability, 0.0);
              ++branches;
            }
          EXPECT_NEAR(total, 1.0, kTol);
        }
  EXPECT_EQ(branches, 64);
}

TEST(Merge, SampledGadgetIsEightState) {
  Rng rng = make_rng(1, "merge");
  for (int i = 0; i < 50; ++i) {
    const int B1 = coin(rng), B2 = coin(rng), B1p = coin(rng), B2p = coin(rng);
    const MergeResult r = merge_gadget(QubitDescription::bb84(B1, B2).vector(), QubitDescription::rotated(B1p, B2p).vector(), rng);
    EXPECT_EQ(as_eight(r.out.vector()), compute_L(B1, B2, B1p, B2p, r.s1, r.s2).L);
  }
}

TEST(Protocol8, HonestEndToEnd) {
  for (Backend backend : {Backend::statevector, Backend::two_branch})
    for (u64 seed = 0; seed < 10; ++seed) {
      const Result8 r = run_protocol8(default_toy(), seed, seed + 50, backend);
      ASSERT_TRUE(r.qubit);
      EXPECT_NEAR(fidelity(r.qubit->vector(), plus_state(r.index.theta())), 1.0, kTol);
      EXPECT_EQ(r.index.L3(), r.first.out.B1);
      EXPECT_EQ(r.first.out.B1, r.first.client.td.d0);
      EXPECT_EQ(r.second.out.B1, r.second.client.td.d0);
    }
}

TEST(Protocol8, Deterministic) {
  const Result8 a = run_protocol8(default_toy(), 3, 4, Backend::two_branch);
  const Result8 b = run_protocol8(default_toy(), 3, 4, Backend::two_branch);
  EXPECT_EQ(a.index.L, b.index.L);
  EXPECT_EQ(a.merge.s1, b.merge.s1);
  EXPECT_EQ(a.first.transcript.b, b.first.transcript.b);
}

TEST(Protocol8, FlippedMergeBitsShiftL) {
  for (u64 seed = 0; seed < 10; ++seed) {
    const Result8 honest = run_protocol8(default_toy(), seed, seed, honest_strategy8(Backend::two_branch));
    for (int f1 = 0; f1 < 2; ++f1)
      for (int f2 = 0; f2 < 2; ++f2) {
        const Result8 r = run_protocol8(default_toy(), seed, seed, flipping_strategy8(Backend::two_branch, f1, f2));
        const auto& a = honest.first.out;
        const auto& b = honest.second.out;
        EXPECT_EQ(r.index.L, compute_L(a.B1, a.B2, b.B1, b.B2, honest.merge.s1 ^ f1, honest.merge.s2 ^ f2).L);
      }
  }
}

TEST(Protocol8, RejectsNonBitMergeMessage) {
  EXPECT_THROW(client_finalize8({}, {}, {2, 0}), std::invalid_argument);
}

TEST(GuessStats, PerfectAndIdentity) {
  std::vector<GuessRecord> recs;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) recs.push_back({a, b, a, b});
  const GuessStats s = guess_stats(recs);
  EXPECT_DOUBLE_EQ(s.P_a, 1);
  EXPECT_DOUBLE_EQ(s.P_b, 1);
  EXPECT_DOUBLE_EQ(s.P_xor, 1);
  EXPECT_DOUBLE_EQ(s.P_joint, 1);
  EXPECT_DOUBLE_EQ(s.e1 + s.e2 + s.e3 + s.e4, 1);
  EXPECT_TRUE(s.bound_holds);
  EXPECT_THROW(guess_stats({}), std::invalid_argument);
}

TEST(GuessStats, UniformGuesser) {
  Rng rng = make_rng(2, "guess");
  std::vector<GuessRecord> recs;
  for (int i = 0; i < 20000; ++i) recs.push_back({coin(rng), coin(rng), coin(rng), coin(rng)});
  const GuessStats s = guess_stats(recs);
  const double sigma = std::sqrt(0.25 / 20000);
  EXPECT_NEAR(s.P_a, 0.5, 3 * sigma);
  EXPECT_NEAR(s.P_b, 0.5, 3 * sigma);
  EXPECT_NEAR(s.P_xor, 0.5, 3 * sigma);
  EXPECT_NEAR(s.P_joint, 0.25, 3 * std::sqrt(0.25 * 0.75 / 20000));
  EXPECT_DOUBLE_EQ(s.P_xor, s.e1 + s.e4);
}

// Knows only a xor b: guesses a at random and sets b to match the xor.
TEST(GuessStats, XorOnlyGuesser) {
  Rng rng = make_rng(3, "guess");
  std::vector<GuessRecord> recs;
  for (int i = 0; i < 20000; ++i) {
    const int a = coin(rng), b = coin(rng), ga = coin(rng);
    recs.push_back({ga, ga ^ a ^ b, a, b});
  }
  const GuessStats s = guess_stats(recs);
  const double sigma = std::sqrt(0.25 / 20000);
  EXPECT_DOUBLE_EQ(s.P_xor, 1.0);
  EXPECT_NEAR(s.P_a, 0.5, 3 * sigma);
  EXPECT_NEAR(s.P_b, 0.5, 3 * sigma);
  EXPECT_NEAR(s.P_joint, 0.5, 3 * sigma);
  EXPECT_GE(s.max_single, 0.5 + s.eps_prime - 1e-12);
  EXPECT_TRUE(s.bound_holds);
}
