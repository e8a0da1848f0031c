#include "qfactory/estimators.hpp"
#include "qfactory/experiments.hpp"
#include "qfactory/qfactory4.hpp"
#include "qfactory/serialize.hpp"

#include <gtest/gtest.h>

using namespace qf;

namespace {

DomainElement element(const ParamSet& p, int d, int c) {
  return {ZqVector::Zero(p.n), NoiseVector::Zero(p.m), d, c};
}

}  // namespace

TEST(Indices, FormulaExamples) {
  const ParamSet p = default_toy();
  const Bits zero(static_cast<std::size_t>(p.total_bits()), 0);
  EXPECT_EQ(bb84_indices(p, element(p, 0, 0), element(p, 1, 1), zero), std::make_pair(1, 0));
  Rng rng = make_rng(1, "b");
  for (int i = 0; i < 20; ++i) {
    const Bits b = random_bits(rng, p.total_bits());
    EXPECT_EQ(bb84_indices(p, element(p, 1, 0), element(p, 1, 1), b), std::make_pair(0, 1));
    EXPECT_EQ(bb84_indices(p, element(p, 0, 0), element(p, 0, 1), b), std::make_pair(0, 0));
  }
  // With different predicates, B2 is the parity of b over the bits where the preimages differ.
  Bits b = zero;
  b.back() = 1;
  EXPECT_EQ(bb84_indices(p, element(p, 0, 0), element(p, 1, 1), b), std::make_pair(1, 1));
}

TEST(ClientInit, DeterministicAndSerializable) {
  const ParamSet p = default_toy();
  auto [c1, k1] = client_init(p, Variant::plain, 5);
  auto [c2, k2] = client_init(p, Variant::plain, 5);
  auto [c3, k3] = client_init(p, Variant::plain, 6);
  EXPECT_EQ(k1.pk.K, k2.pk.K);
  EXPECT_EQ(k1.pk.y0, k2.pk.y0);
  EXPECT_TRUE(k1.pk.K != k3.pk.K || k1.pk.y0 != k3.pk.y0);
  const PublicKey back = public_key_from_json(json::parse(public_key_to_json(k1.pk).dump()));
  EXPECT_EQ(back.K, k1.pk.K);
  EXPECT_EQ(back.y0, k1.pk.y0);
  EXPECT_EQ(back.params, p);
}

// Exhaustive over every (y, b) branch of the statevector circuit.
TEST(Correctness, ClientDescriptionMatchesHeldQubit) {
  const ParamSet p = default_toy();
  for (u64 seed = 0; seed < 5; ++seed) {
    const KeyPair kp = gen(p, seed);
    for (Variant v : {Variant::plain, Variant::rotated}) {
      const CorrectnessReport r = check_correctness({kp.pk, kp.td, v, 0}, statevector_branches(kp.pk, v));
      EXPECT_EQ(r.mismatches, 0);
      EXPECT_GE(r.min_fidelity, 1 - kTol);
      EXPECT_EQ(r.branches, r.two_preimage);
    }
  }
}

TEST(Correctness, RotatedOutputsInRotatedSet) {
  const KeyPair kp = gen(default_toy(), 9);
  for (const auto& [key, br] : statevector_branches(kp.pk, Variant::rotated)) ASSERT_TRUE(as_rotated(br.out)) << key.first;
}

TEST(Correctness, EndToEndBothBackends) {
  for (Backend backend : {Backend::statevector, Backend::two_branch})
    for (Variant v : {Variant::plain, Variant::rotated})
      for (u64 seed = 0; seed < 10; ++seed) {
        const Result4 r = run_protocol4(default_toy(), v, seed, seed + 100, backend);
        ASSERT_EQ(r.out.accepted, Acceptance::two_preimages);
        EXPECT_NEAR(fidelity(described_state(v, r.out), *r.qubit), 1.0, kTol);
      }
}

// Fixed key, every (y, b) with two preimages: B1 never depends on the server's message.
TEST(BasisFixation, B1IsPlantedBit) {
  const ParamSet p = default_toy();
  for (u64 seed = 0; seed < 5; ++seed) {
    auto [c, k] = client_init(p, Variant::plain, seed);
    Rng rng = make_rng(seed, "b");
    for (u64 y = 0; y < (u64{1} << p.image_bits()); ++y) {
      const ZqVector yv = decode_image(p, unpack_bits(y, p.image_bits()));
      for (int i = 0; i < 16; ++i) {
        const OutputIndex4 out = client_finalize(c, yv, random_bits(rng, p.total_bits()));
        if (out.accepted == Acceptance::two_preimages) ASSERT_EQ(out.B1, c.td.d0);
      }
    }
  }
}

TEST(BasisFixation, AdversarialFixedMessage) {
  const ParamSet p = default_toy();
  ServerStrategy fixed = [&p](const KeyMessage&, Rng&) {
    ServerOutput o;
    o.msg.y = ZqVector::Zero(p.m);
    o.msg.b = Bits(static_cast<std::size_t>(p.total_bits()), 1);
    return o;
  };
  for (u64 seed = 0; seed < 20; ++seed) {
    const Result4 r = run_protocol4(p, Variant::plain, seed, 0, fixed);
    if (r.out.accepted == Acceptance::two_preimages) EXPECT_EQ(r.out.B1, r.client.td.d0);
  }
}

// Wide-box family: some images have a single preimage; those runs hold |B2> with B1 = 0.
TEST(AbortedRuns, SinglePreimageHoldsComputationalState) {
  const ParamSet p = toy_params(1, 4, 3, 2, 1);
  int singles = 0, accepted = 0;
  const int runs = 400;
  for (u64 seed = 0; seed < runs; ++seed) {
    const Result4 r = run_protocol4(p, Variant::plain, seed, seed + 1000, Backend::two_branch);
    ASSERT_NE(r.out.accepted, Acceptance::no_preimage);
    EXPECT_NEAR(fidelity(described_state(Variant::plain, r.out), *r.qubit), 1.0, kTol);
    if (r.out.accepted == Acceptance::single_preimage) {
      ++singles;
      EXPECT_EQ(r.out.B1, 0);
    } else {
      ++accepted;
    }
  }
  EXPECT_GT(singles, 0);
  const Estimate delta = regularity_estimate(p, 4000, 17);
  const Estimate rate = wilson(accepted, runs);
  EXPECT_NEAR(rate.value, delta.value, 3 * std::hypot(rate.sigma, delta.sigma));
}

TEST(Finalize, RejectsMalformedMessages) {
  auto [c, k] = client_init(default_toy(), Variant::plain, 1);
  const Bits b(static_cast<std::size_t>(c.pk.params.total_bits()), 0);
  EXPECT_THROW(client_finalize(c, ZqVector::Zero(3), b), std::invalid_argument);
  EXPECT_THROW(client_finalize(c, ZqVector::Zero(2), Bits(3, 0)), std::invalid_argument);
  ZqVector big = ZqVector::Zero(2);
  big(0) = 8;
  EXPECT_THROW(client_finalize(c, big, b), std::invalid_argument);
  Bits bad = b;
  bad[0] = 2;
  EXPECT_THROW(client_finalize(c, ZqVector::Zero(2), bad), std::invalid_argument);
}

TEST(Finalize, AlwaysOutputModeFillsNoPreimage) {
  const ParamSet p = toy_params(1, 4, 3, 2, 1);  // image space larger than the domain
  auto [c, k] = client_init(p, Variant::plain, 3);
  const Bits b(static_cast<std::size_t>(p.total_bits()), 0);
  int found = 0, ones = 0;
  Rng rng = make_rng(3, "fill");
  for (u64 y = 0; y < (u64{1} << p.image_bits()); ++y) {
    const ZqVector yv = decode_image(p, unpack_bits(y, p.image_bits()));
    if (finalize(c, yv, b).accepted != Acceptance::no_preimage) continue;
    ++found;
    for (int i = 0; i < 50; ++i) ones += finalize_always(c, yv, b, rng).B1;
  }
  ASSERT_GT(found, 0);
  EXPECT_GT(ones, 0);
  EXPECT_LT(ones, 50 * found);
}

TEST(Replay, SameSeedsSameTranscript) {
  const Result4 a = run_protocol4(default_toy(), Variant::rotated, 4, 8, Backend::statevector);
  const Result4 b = run_protocol4(default_toy(), Variant::rotated, 4, 8, Backend::statevector);
  EXPECT_EQ(a.transcript.y, b.transcript.y);
  EXPECT_EQ(a.transcript.b, b.transcript.b);
  EXPECT_EQ(a.out.B2, b.out.B2);
}
