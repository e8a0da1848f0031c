#include "qfactory/abort.hpp"

#include <gtest/gtest.h>

using namespace qf;

namespace {

std::vector<std::pair<int, int>> indices_of(u64 code, int t) {
  std::vector<std::pair<int, int>> v;
  for (int i = 0; i < t; ++i) v.emplace_back((code >> (2 * i)) & 1, (code >> (2 * i + 1)) & 1);
  return v;
}

SBits sbits_of(u64 code, int t) {
  SBits s;
  for (int i = 0; i < t; ++i) s.emplace_back((code >> (2 * i)) & 1, (code >> (2 * i + 1)) & 1);
  return s;
}

KeyPair key_with_d0(const ParamSet& p, int d0, u64& seed) {
  for (;; ++seed) {
    KeyPair kp = gen(p, seed);
    if (kp.td.d0 == d0) {
      ++seed;
      return kp;
    }
  }
}

}  // namespace

// Every BB84 input tuple and every s-outcome for t <= 4, against the full register.
TEST(XorGadget, ExhaustiveAgainstFullRegister) {
  for (int t = 1; t <= 4; ++t)
    for (u64 in = 0; in < (u64{1} << (2 * t)); ++in) {
      const auto idx = indices_of(in, t);
      std::vector<Qubit> inputs;
      int basis = 0;
      for (auto [b1, b2] : idx) {
        inputs.push_back(QubitDescription::bb84(b1, b2).vector());
        basis ^= b1;
      }
      double total = 0;
      for (u64 sc = 0; sc < (u64{1} << (2 * t)); ++sc) {
        const SBits s = sbits_of(sc, t);
        const XorBranch full = gad_xor_branch_full(inputs, s);
        const XorBranch seq = gad_xor_branch(inputs, s);
        ASSERT_NEAR(full.probability, seq.probability, 1e-12);
        total += full.probability;
        if (!full.out) continue;
        ASSERT_NEAR(fidelity(*full.out, *seq.out), 1.0, 1e-9);
        const auto [B1, B2] = xor_indices(idx, s);
        ASSERT_EQ(B1, basis);
        ASSERT_NEAR(fidelity(*full.out, QubitDescription::rotated(B1, B2).vector()), 1.0, 1e-9)
            << "t " << t << " in " << in << " s " << sc;
      }
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
}

TEST(XorGadget, SampledOutputMatchesIndices) {
  Rng rng = make_rng(1, "xor");
  for (int i = 0; i < 100; ++i) {
    const int t = 1 + static_cast<int>(uniform_below(rng, 6));
    std::vector<std::pair<int, int>> idx;
    std::vector<Qubit> inputs;
    for (int j = 0; j < t; ++j) {
      idx.emplace_back(coin(rng), coin(rng));
      inputs.push_back(QubitDescription::bb84(idx.back().first, idx.back().second).vector());
    }
    const XorResult r = gad_xor(inputs, rng);
    const auto [B1, B2] = xor_indices(idx, r.s);
    EXPECT_NEAR(fidelity(r.out, QubitDescription::rotated(B1, B2)), 1.0, 1e-9);
  }
}

TEST(XorGadget, StrictModeRejectsOtherStates) {
  Rng rng = make_rng(2, "xor");
  const std::vector<Qubit> bad{plus_state(kPi / 4)};
  EXPECT_THROW(gad_xor(bad, rng), std::invalid_argument);
  EXPECT_NO_THROW(gad_xor(bad, rng, false));
  EXPECT_THROW(gad_xor({}, rng), std::invalid_argument);
  EXPECT_THROW(xor_indices({{0, 0}}, {}), std::invalid_argument);
}

TEST(Combine, AcceptsAndXorsWhenEveryChunkPasses) {
  ChunkConfig cfg;
  cfg.t_c = 4;
  cfg.n_c = 2;
  cfg.p_a = {1, 1};
  cfg.p_c = {3, 4};
  std::vector<RunRecord> recs(8, RunRecord{1, 0, 0, std::nullopt});
  recs[1] = {1, 1, 0, std::nullopt};
  recs[2] = {0, 0, 1, std::nullopt};  // 3 of 4 in chunk 0 still meets 3/4
  const SBits s(8, {0, 0});
  Rng rng = make_rng(3, "combine");
  const CombineResult r = client_combine(recs, cfg, s, rng);
  EXPECT_TRUE(r.accepted);
  EXPECT_EQ(r.chunk_accepts, (std::vector<i64>{3, 4}));
  std::vector<std::pair<int, int>> idx;
  for (const auto& rec : recs) idx.emplace_back(rec.B1, rec.B2);
  EXPECT_EQ(std::make_pair(r.B1, r.B2), xor_indices(idx, s));
}

TEST(Combine, RejectsWhenOneChunkFallsShort) {
  ChunkConfig cfg;
  cfg.t_c = 4;
  cfg.n_c = 2;
  cfg.p_a = {1, 1};
  cfg.p_c = {3, 4};
  std::vector<RunRecord> recs(8, RunRecord{1, 1, 1, std::nullopt});
  recs[5].a = 0;
  recs[6].a = 0;
  Rng rng = make_rng(4, "combine");
  const CombineResult r = client_combine(recs, cfg, SBits(8, {0, 0}), rng);
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.chunk_accepts, (std::vector<i64>{4, 2}));
  EXPECT_THROW(client_combine(std::vector<RunRecord>(7), cfg, SBits(7), rng), std::invalid_argument);
}

TEST(Threshold, ExactRationalComparison) {
  EXPECT_TRUE(chunk_passes(13, 20, {13, 20}));
  EXPECT_FALSE(chunk_passes(12, 20, {13, 20}));
  EXPECT_TRUE(chunk_passes(66, 100, {13, 20}));
  EXPECT_FALSE(chunk_passes(64, 100, {13, 20}));
}

TEST(Beta, XorOfPlantedBitsWhenAllAccepted) {
  const ParamSet p = default_toy();
  u64 seed = 0;
  std::vector<KeyPair> keys;
  for (int d0 : {1, 0, 1}) keys.push_back(key_with_d0(p, d0, seed));
  Rng rng = make_rng(5, "beta");
  std::vector<KeyedImage> runs;
  for (const auto& kp : keys) runs.push_back({&kp.pk, &kp.td, f(kp.pk, random_element(p, rng, true))});
  EXPECT_EQ(beta(runs, {2, 3}, rng), 0);
  keys.push_back(key_with_d0(p, 1, seed));
  runs.push_back({&keys.back().pk, &keys.back().td, f(keys.back().pk, random_element(p, rng, true))});
  for (std::size_t i = 0; i < runs.size(); ++i) runs[i] = {&keys[i].pk, &keys[i].td, runs[i].y};
  EXPECT_EQ(beta(runs, {2, 3}, rng), 1);
  EXPECT_THROW(beta({}, {2, 3}, rng), std::invalid_argument);
}

TEST(Bounds, ChernoffAndEta) {
  EXPECT_NEAR(chernoff_success_bound(0.8, 0.6, 100), 1 - std::exp(-8.0), 1e-12);
  EXPECT_NEAR(chernoff_success_bound(0.8, 0.6, 100), 0.999665, 1e-6);
  EXPECT_DOUBLE_EQ(chernoff_success_bound(0.8, 0.6, 0), 0.0);
  EXPECT_NEAR(eta_bound(0.6), 11.0 / 12.0, 1e-12);
  EXPECT_NEAR(eta_bound(1.0), 0.75, 1e-12);
  EXPECT_THROW(eta_bound(0.5), std::invalid_argument);
}

TEST(Params, ChooseParamsMidpointAndSize) {
  const ChunkConfig cfg = choose_params({4, 5}, 8, 1e-6);
  EXPECT_EQ(cfg.p_c.num, 13);
  EXPECT_EQ(cfg.p_c.den, 20);
  EXPECT_EQ(cfg.n_c, 8);
  const double need = std::log(8 / 1e-6) / (2 * 0.15 * 0.15);
  EXPECT_EQ(cfg.t_c, static_cast<int>(std::ceil(need)));
  EXPECT_LE(cfg.n_c * std::exp(-2 * 0.0225 * cfg.t_c), 1e-6);
  EXPECT_GT(cfg.n_c * std::exp(-2 * 0.0225 * (cfg.t_c - 1)), 1e-6);
  EXPECT_THROW(choose_params({1, 2}, 8, 1e-6), std::invalid_argument);
}

TEST(Params, RationalParsing) {
  const Rational a = Rational::parse("0.65");
  EXPECT_EQ(a.num, 13);
  EXPECT_EQ(a.den, 20);
  EXPECT_EQ(Rational::parse("27/50").str(), "27/50");
  EXPECT_EQ(Rational::parse("6/8").str(), "3/4");
  EXPECT_EQ(Rational::parse("1").str(), "1");
  EXPECT_THROW(Rational::parse("x"), std::invalid_argument);
  EXPECT_THROW(Rational::parse("1/2z"), std::invalid_argument);
  ChunkConfig bad;
  bad.p_c = {1, 2};
  EXPECT_THROW(validate(bad), std::invalid_argument);
}

TEST(RunAbort, HonestRunIsAcceptedAndDescribed) {
  const ChunkConfig cfg{3, 2, {1, 1}, {2, 3}};
  for (u64 seed = 0; seed < 5; ++seed) {
    const AbortResult r = run_abort(default_toy(), cfg, seed, seed + 9, Backend::two_branch);
    ASSERT_EQ(r.records.size(), 6u);
    ASSERT_TRUE(r.combined.accepted);
    int basis = 0;
    for (const auto& rec : r.records) basis ^= rec.B1;
    EXPECT_EQ(r.combined.B1, basis);
    ASSERT_TRUE(r.out);
    EXPECT_NEAR(fidelity(*r.out, QubitDescription::rotated(r.combined.B1, r.combined.B2)), 1.0, 1e-9);
  }
}

TEST(Simulation, ChunkAcceptanceIsDeterministic) {
  const ChunkSimulation a = simulate_chunks(default_toy(), 10, {3, 5}, 20, 1, 1);
  const ChunkSimulation b = simulate_chunks(default_toy(), 10, {3, 5}, 20, 1, 2);
  EXPECT_EQ(a.accept_rate.successes, b.accept_rate.successes);
  EXPECT_EQ(a.accept_rate.value, 1.0);
  EXPECT_EQ(a.run_rate.value, 1.0);
}
