#include "qfactory/qfactory4.hpp"

#include "qfactory/circuits.hpp"

#include <stdexcept>

namespace qf {

std::string to_string(Variant v) { return v == Variant::plain ? "plain" : "rotated"; }
std::string to_string(Backend b) { return b == Backend::statevector ? "sv" : "twobranch"; }
std::string to_string(Acceptance a) {
  switch (a) {
    case Acceptance::two_preimages: return "two_preimages";
    case Acceptance::single_preimage: return "single_preimage";
    default: return "no_preimage";
  }
}

Variant variant_from_string(const std::string& s) {
  if (s == "plain") return Variant::plain;
  if (s == "rotated") return Variant::rotated;
  throw std::invalid_argument("unknown variant: " + s);
}

Backend backend_from_string(const std::string& s) {
  if (s == "sv" || s == "statevector") return Backend::statevector;
  if (s == "twobranch" || s == "two_branch") return Backend::two_branch;
  throw std::invalid_argument("unknown backend: " + s);
}

std::pair<ClientState4, KeyMessage> client_init(const ParamSet& p, Variant variant, u64 seed) {
  KeyPair kp = gen(p, derive_seed(seed, "client-key"));
  ClientState4 c{kp.pk, kp.td, variant, seed};
  KeyMessage m{kp.pk, variant, "d-bit"};
  return {std::move(c), std::move(m)};
}

Qubit apply_rotation_clifford(const Qubit& v) {
  const double r = 1.0 / std::sqrt(2.0);
  const cplx a = v(0), b = cplx(0, 1) * v(1);
  return Qubit(r * (a + b), r * (a - b));
}

namespace {

ServerOutput server_statevector(const KeyMessage& key, Rng& rng) {
  const ParamSet& p = key.pk.params;
  ServerCircuit circ(p);
  State sv = circ.stage1_state(key.pk);
  auto ym = measure(sv, circ.image, MeasBasis::computational(), rng);
  circ.apply_predicate(sv);
  auto bm = measure(sv, circ.domain, MeasBasis::xy(0.0), rng);
  if (key.variant == Variant::rotated) {
    apply_phase(sv, circ.target, kPi / 2);
    apply_h(sv, circ.target);
  }
  ServerOutput out;
  out.msg.y = decode_image(p, ym.outcome);
  out.msg.b = bm.outcome;
  out.qubit = QubitDescription::raw(extract_qubit(sv, circ.target));
  return out;
}

ServerOutput server_two_branch(const KeyMessage& key, Rng& rng, const PreimageOracle& oracle) {
  const ParamSet& p = key.pk.params;
  const int N = p.total_bits();
  std::optional<DomainElement> x;
  do {
    x = decode(p, random_bits(rng, N));
  } while (!x);
  ServerOutput out;
  out.msg.y = f(key.pk, *x);
  auto pre = oracle ? oracle(out.msg.y) : brute_force_preimages(key.pk, out.msg.y);
  out.msg.b = random_bits(rng, N);
  Qubit v;
  if (pre.size() == 2) {
    const DomainElement& x0 = pre[0].c == 0 ? pre[0] : pre[1];
    const DomainElement& x1 = pre[0].c == 0 ? pre[1] : pre[0];
    TwoBranchState st{encode(p, x0), encode(p, x1), h(x0), h(x1)};
    if (st.hx == st.hx_prime) {
      int par = 0;
      for (int i = 0; i < N; ++i) par ^= out.msg.b[static_cast<std::size_t>(i)] & (st.x[static_cast<std::size_t>(i)] ^ st.x_prime[static_cast<std::size_t>(i)]);
      if (par) out.msg.b[static_cast<std::size_t>(N - 1)] ^= 1;
    }
    auto q = analytic_stage2(st, out.msg.b, 0.0);
    if (!q) throw std::logic_error("server_two_branch: sampled a zero-amplitude outcome");
    v = q->vector();
  } else if (pre.size() == 1) {
    v = h(pre[0]) ? ket1() : ket0();
  } else {
    throw std::logic_error("server_two_branch: image of a domain point must have one or two preimages");
  }
  if (key.variant == Variant::rotated) v = apply_rotation_clifford(v);
  out.qubit = QubitDescription::raw(v);
  return out;
}

}  // namespace

ServerOutput server_honest(const KeyMessage& key, Backend backend, Rng& rng, const PreimageOracle& oracle) {
  if (backend == Backend::statevector) return server_statevector(key, rng);
  return server_two_branch(key, rng, oracle);
}

ServerStrategy honest_strategy(Backend backend, PreimageOracle oracle) {
  return [backend, oracle = std::move(oracle)](const KeyMessage& key, Rng& rng) {
    return server_honest(key, backend, rng, oracle);
  };
}

std::pair<int, int> bb84_indices(const ParamSet& p, const DomainElement& x, const DomainElement& xp, const Bits& b) {
  const Bits ex = encode(p, x), exp = encode(p, xp);
  if (b.size() != ex.size()) throw std::invalid_argument("bb84_indices: b length mismatch");
  const int hz = h(x), hzp = h(xp);
  const int B1 = hz ^ hzp;
  int par = 0;
  for (std::size_t i = 0; i < b.size(); ++i) par ^= b[i] & (ex[i] ^ exp[i]);
  const int B2 = (par & B1) ^ (hz & (1 ^ B1));
  return {B1, B2};
}

namespace {

void check_message(const ClientState4& c, const ZqVector& y, const Bits& b) {
  const ParamSet& p = c.pk.params;
  if (y.size() != p.m) throw std::invalid_argument("client_finalize: y has wrong length");
  if (static_cast<int>(b.size()) != p.total_bits()) throw std::invalid_argument("client_finalize: b has wrong length");
  if ((y.array() >= p.q).any()) throw std::invalid_argument("client_finalize: y not reduced mod q");
  for (auto v : b)
    if (v > 1) throw std::invalid_argument("client_finalize: b is not a bit-string");
}

}  // namespace

OutputIndex4 client_finalize(const ClientState4& c, const ZqVector& y, const Bits& b) {
  check_message(c, y, b);
  auto pre = invert(c.td, c.pk, y);
  OutputIndex4 out;
  if (pre.size() == 2) {
    const DomainElement& x0 = pre[0].c == 0 ? pre[0] : pre[1];
    const DomainElement& x1 = pre[0].c == 0 ? pre[1] : pre[0];
    auto [B1, B2] = bb84_indices(c.pk.params, x0, x1, b);
    out = {B1, B2, Acceptance::two_preimages};
  } else if (pre.size() == 1) {
    out = {0, h(pre[0]), Acceptance::single_preimage};
  } else if (pre.empty()) {
    out = {0, 0, Acceptance::no_preimage};
  } else {
    throw std::logic_error("client_finalize: more than two preimages (key is not injective)");
  }
  return out;
}

OutputIndex4 client_finalize_rotated(const ClientState4& c, const ZqVector& y, const Bits& b) {
  OutputIndex4 out = client_finalize(c, y, b);
  out.B2 ^= out.B1;
  return out;
}

OutputIndex4 finalize(const ClientState4& c, const ZqVector& y, const Bits& b) {
  return c.variant == Variant::plain ? client_finalize(c, y, b) : client_finalize_rotated(c, y, b);
}

OutputIndex4 finalize_always(const ClientState4& c, const ZqVector& y, const Bits& b, Rng& rng) {
  OutputIndex4 out = finalize(c, y, b);
  if (out.accepted == Acceptance::no_preimage) {
    out.B1 = coin(rng);
    out.B2 = coin(rng);
  }
  return out;
}

QubitDescription described_state(Variant v, const OutputIndex4& out) {
  return v == Variant::plain ? QubitDescription::bb84(out.B1, out.B2) : QubitDescription::rotated(out.B1, out.B2);
}

Result4 run_protocol4(const ParamSet& p, Variant variant, u64 client_seed, u64 server_seed, const ServerStrategy& strategy) {
  auto [client, key] = client_init(p, variant, client_seed);
  Rng srng = make_rng(server_seed, "server");
  ServerOutput so = strategy(key, srng);
  Result4 r;
  r.out = finalize(client, so.msg.y, so.msg.b);
  r.client = std::move(client);
  r.key = std::move(key);
  r.transcript = std::move(so.msg);
  r.qubit = std::move(so.qubit);
  return r;
}

Result4 run_protocol4(const ParamSet& p, Variant variant, u64 client_seed, u64 server_seed, Backend backend) {
  auto [client, key] = client_init(p, variant, client_seed);
  PreimageOracle oracle = [td = client.td, pk = client.pk](const ZqVector& y) { return invert(td, pk, y); };
  Rng srng = make_rng(server_seed, "server");
  ServerOutput so = server_honest(key, backend, srng, oracle);
  Result4 r;
  r.out = finalize(client, so.msg.y, so.msg.b);
  r.client = std::move(client);
  r.key = std::move(key);
  r.transcript = std::move(so.msg);
  r.qubit = std::move(so.qubit);
  return r;
}

}  // namespace qf
