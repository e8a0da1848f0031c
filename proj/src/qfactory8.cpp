#include "qfactory/qfactory8.hpp"

#include <stdexcept>

namespace qf {

EightIndex compute_L(int B1, int B2, int B1p, int B2p, int s1, int s2) {
  B1 &= 1, B2 &= 1, B1p &= 1, B2p &= 1, s1 &= 1, s2 &= 1;
  const int high = B2p ^ B2 ^ (B1 & (s1 ^ s2));
  return {(4 * high + 2 * B1p + 2 * (B1 & (B2 ^ s2)) + B1) % 8};
}

namespace {

State merge_circuit(const Qubit& in1, const Qubit& in2) {
  State sv = product_state<double>({plus_state(kPi / 4), in1.normalized(), in2.normalized()});
  apply_cz(sv, 0, 1);
  apply_cz(sv, 1, 2);
  return sv;
}

}  // namespace

MergeBranch merge_branch(const Qubit& in1, const Qubit& in2, int s1, int s2) {
  State sv = merge_circuit(in1, in2);
  MergeBranch br;
  br.probability = project(sv, {0, 1}, MeasBasis::xy(0.0), Bits{static_cast<std::uint8_t>(s1 & 1), static_cast<std::uint8_t>(s2 & 1)});
  if (br.probability > 1e-12) br.out = extract_qubit(sv, 2);
  return br;
}

MergeResult merge_gadget(const Qubit& in1, const Qubit& in2, Rng& rng) {
  State sv = merge_circuit(in1, in2);
  auto m = measure(sv, {0, 1}, MeasBasis::xy(0.0), rng);
  return {m.outcome[0], m.outcome[1], QubitDescription::raw(extract_qubit(sv, 2))};
}

Server8Output server8_honest(const KeyMessage& first, const KeyMessage& second, Backend backend, Rng& rng,
                             const PreimageOracle& oracle1, const PreimageOracle& oracle2) {
  if (first.variant != Variant::plain || second.variant != Variant::rotated)
    throw std::invalid_argument("server8_honest: expects a plain then a rotated key");
  Server8Output out;
  out.first = server_honest(first, backend, rng, oracle1);
  out.second = server_honest(second, backend, rng, oracle2);
  MergeResult m = merge_gadget(out.first.qubit->vector(), out.second.qubit->vector(), rng);
  out.merge = {m.s1, m.s2};
  out.qubit = m.out;
  return out;
}

Server8Strategy honest_strategy8(Backend backend, PreimageOracle oracle1, PreimageOracle oracle2) {
  return [=](const KeyMessage& k1, const KeyMessage& k2, Rng& rng) {
    return server8_honest(k1, k2, backend, rng, oracle1, oracle2);
  };
}

Server8Strategy flipping_strategy8(Backend backend, int flip1, int flip2) {
  return [=](const KeyMessage& k1, const KeyMessage& k2, Rng& rng) {
    Server8Output out = server8_honest(k1, k2, backend, rng);
    out.merge.s1 ^= flip1 & 1;
    out.merge.s2 ^= flip2 & 1;
    return out;
  };
}

EightIndex client_finalize8(const OutputIndex4& first, const OutputIndex4& second, const MergeMessage& merge) {
  if ((merge.s1 & ~1) || (merge.s2 & ~1)) throw std::invalid_argument("client_finalize8: s-bits must be 0 or 1");
  return compute_L(first.B1, first.B2, second.B1, second.B2, merge.s1, merge.s2);
}

namespace {

Result8 finish8(ClientState4 c1, KeyMessage k1, ClientState4 c2, KeyMessage k2, Server8Output so, u64 client_seed) {
  Rng fill = make_rng(client_seed, "client-fill");
  Result8 r;
  r.first.out = finalize_always(c1, so.first.msg.y, so.first.msg.b, fill);
  r.second.out = finalize_always(c2, so.second.msg.y, so.second.msg.b, fill);
  r.merge = so.merge;
  r.index = client_finalize8(r.first.out, r.second.out, so.merge);
  r.first.client = std::move(c1);
  r.first.key = std::move(k1);
  r.first.transcript = std::move(so.first.msg);
  r.first.qubit = std::move(so.first.qubit);
  r.second.client = std::move(c2);
  r.second.key = std::move(k2);
  r.second.transcript = std::move(so.second.msg);
  r.second.qubit = std::move(so.second.qubit);
  r.qubit = std::move(so.qubit);
  return r;
}

}  // namespace

Result8 run_protocol8(const ParamSet& p, u64 client_seed, u64 server_seed, const Server8Strategy& strategy) {
  auto [c1, k1] = client_init(p, Variant::plain, derive_seed(client_seed, "first"));
  auto [c2, k2] = client_init(p, Variant::rotated, derive_seed(client_seed, "second"));
  Rng srng = make_rng(server_seed, "server");
  Server8Output so = strategy(k1, k2, srng);
  return finish8(std::move(c1), std::move(k1), std::move(c2), std::move(k2), std::move(so), client_seed);
}

Result8 run_protocol8(const ParamSet& p, u64 client_seed, u64 server_seed, Backend backend) {
  auto [c1, k1] = client_init(p, Variant::plain, derive_seed(client_seed, "first"));
  auto [c2, k2] = client_init(p, Variant::rotated, derive_seed(client_seed, "second"));
  PreimageOracle o1 = [td = c1.td, pk = c1.pk](const ZqVector& y) { return invert(td, pk, y); };
  PreimageOracle o2 = [td = c2.td, pk = c2.pk](const ZqVector& y) { return invert(td, pk, y); };
  Rng srng = make_rng(server_seed, "server");
  Server8Output so = server8_honest(k1, k2, backend, srng, o1, o2);
  return finish8(std::move(c1), std::move(k1), std::move(c2), std::move(k2), std::move(so), client_seed);
}

GuessStats guess_stats(const std::vector<GuessRecord>& records) {
  if (records.empty()) throw std::invalid_argument("guess_stats: no records");
  i64 c[4] = {0, 0, 0, 0};
  for (const auto& r : records) {
    const int ra = (r.guess_a & 1) == (r.a & 1), rb = (r.guess_b & 1) == (r.b & 1);
    ++c[ra + 2 * rb];
  }
  GuessStats s;
  s.count = static_cast<i64>(records.size());
  const double n = static_cast<double>(s.count);
  s.e1 = c[0] / n;
  s.e2 = c[1] / n;
  s.e3 = c[2] / n;
  s.e4 = c[3] / n;
  s.P_a = s.e2 + s.e4;
  s.P_b = s.e3 + s.e4;
  s.P_xor = s.e1 + s.e4;
  s.P_joint = s.e4;
  s.max_single = std::max({s.P_a, s.P_b, s.P_xor});
  // P_a + P_b + P_xor = 1 + 2 e4, so the largest of the three is at least (1 + 2 e4) / 3.
  s.eps_prime = 2.0 * (s.P_joint - 0.25) / 3.0;
  s.bound_holds = s.max_single >= 0.5 + s.eps_prime - 1e-12;
  return s;
}

}  // namespace qf
