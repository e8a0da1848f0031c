#pragma once

#include "qfactory/core.hpp"
#include "qfactory/params.hpp"
#include "qfactory/rng.hpp"

#include <optional>
#include <vector>

namespace qf {

// (s, e, d, c); c is 0 for elements of g's domain.
struct DomainElement {
  ZqVector s;
  NoiseVector e;
  int d = 0;
  int c = 0;

  bool operator==(const DomainElement& o) const {
    return s == o.s && e == o.e && d == o.d && c == o.c;
  }
};

struct PublicKey {
  ZqMatrix K;  // m x n
  ZqVector y0; // g(s0, e0, d0)
  ParamSet params;
};

// K = [A ; G U - R A] with A the top block. G has `shifts.size()` rows per secret
// coordinate with multipliers 2^shift; decoding tolerates noise in [-N, N-1].
struct GadgetTrapdoor {
  int top_rows = 0;
  std::vector<int> shifts;
  i64 noise_bound = 0;
  ZqMatrix R;  // (n * rows_per_coord) x top_rows, entries in {0, 1, q-1}
  ZqMatrix U;
  ZqMatrix U_inv;

  int rows_per_coord() const { return static_cast<int>(shifts.size()); }
};

struct Trapdoor {
  GadgetTrapdoor gadget;
  DomainElement z0;  // c omitted (always 0)
  int d0 = 0;
};

struct KeyPair {
  PublicKey pk;
  Trapdoor td;
};

// Layout chosen by gen for the given params (rows per coordinate, top rows, R weight, shifts).
struct GadgetLayout {
  int rows_per_coord = 0;
  int top_rows = 0;
  int r_weight = 0;
  i64 noise_bound = 0;
  std::vector<int> shifts;
};
GadgetLayout plan_gadget(const ParamSet& p);

KeyPair gen(const ParamSet& p, u64 seed);

ZqVector g_bar(const ZqMatrix& K, const ZqVector& s, const NoiseVector& e, u64 q);
ZqVector g(const ZqMatrix& K, const ZqVector& s, const NoiseVector& e, int d, u64 q);
ZqVector f(const PublicKey& pk, const DomainElement& x);
inline int h(const DomainElement& x) { return x.d; }

// All preimages of y, sorted by encoded bit-string.
std::vector<DomainElement> invert(const Trapdoor& td, const PublicKey& pk, const ZqVector& y);

// Gadget decoding of y = K s + e; nullopt if no in-box solution.
std::optional<ZqVector> gadget_decode(const GadgetTrapdoor& gt, const PublicKey& pk, const ZqVector& y);

bool in_box(const ParamSet& p, const NoiseVector& e);
// Uniform over the valid domain; c = 0 unless with_c.
DomainElement random_element(const ParamSet& p, Rng& rng, bool with_c = true);
bool valid_element(const ParamSet& p, const DomainElement& x);

Bits encode(const ParamSet& p, const DomainElement& x);
// nullopt is the invalid element (noise outside the box).
std::optional<DomainElement> decode(const ParamSet& p, const Bits& bits);

Bits encode_image(const ParamSet& p, const ZqVector& y);
ZqVector decode_image(const ParamSet& p, const Bits& bits);

// Toy-scale helpers working on packed integers (bit i = qubit i).
u64 f_packed(const PublicKey& pk, u64 x);
std::vector<DomainElement> enumerate_domain(const ParamSet& p);
std::vector<DomainElement> brute_force_preimages(const PublicKey& pk, const ZqVector& y);
// True if g (c=0 sector, all d) has no collision on the box; exhaustive.
bool g_injective_on_box(const PublicKey& pk);

// z + z' with s mod q, e integer add, d xor, c kept from the left operand.
DomainElement domain_add(const ParamSet& p, const DomainElement& a, const DomainElement& b);

ZqMatrix inverse_mod(const ZqMatrix& A, u64 q);
i64 centered(u64 v, u64 q);

}  // namespace qf
