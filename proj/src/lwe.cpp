#include "qfactory/lwe.hpp"

#include "qfactory/rng.hpp"

#include <algorithm>
#include <stdexcept>

namespace qf {

namespace {

int ceil_log2(u64 x) {
  int k = 0;
  while ((u64{1} << k) < x) ++k;
  return k;
}

ZqVector reduce(ZqVector v, u64 q) {
  const u64 mask = q - 1;
  for (auto& x : v) x &= mask;
  return v;
}

ZqMatrix reduce(ZqMatrix A, u64 q) {
  const u64 mask = q - 1;
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] &= mask;
  return A;
}

u64 odd_inverse(u64 a) {
  u64 x = a;
  for (int i = 0; i < 6; ++i) x *= 2 - a * x;
  return x;
}

// Rows needed per coordinate so that every row sees noise below half its multiplier.
int rows_needed(int k, int b) {
  int t = 0, rows = 0;
  while (t < k) {
    const int p = std::max(0, b + 1 - t);
    if (k - p <= t) return -1;
    t = k - p;
    ++rows;
  }
  return rows;
}

std::vector<int> shift_schedule(int k, int b, int rows) {
  std::vector<int> shifts;
  int t = 0;
  while (t < k) {
    const int p = std::max(0, b + 1 - t);
    shifts.push_back(p);
    t = k - p;
  }
  while (static_cast<int>(shifts.size()) < rows) shifts.push_back(0);
  return shifts;
}

bool bits_less(const Bits& a, const Bits& b) { return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end()); }

}  // namespace

i64 centered(u64 v, u64 q) {
  v &= q - 1;
  return v >= q / 2 ? static_cast<i64>(v) - static_cast<i64>(q) : static_cast<i64>(v);
}

ZqMatrix inverse_mod(const ZqMatrix& A, u64 q) {
  if (A.rows() != A.cols()) throw std::invalid_argument("inverse_mod: matrix not square");
  const Eigen::Index n = A.rows();
  ZqMatrix M = A;
  ZqMatrix inv = ZqMatrix::Identity(n, n);
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index piv = col;
    while (piv < n && (M(piv, col) & 1u) == 0) ++piv;
    if (piv == n) throw std::invalid_argument("inverse_mod: matrix singular mod 2");
    M.row(col).swap(M.row(piv));
    inv.row(col).swap(inv.row(piv));
    const u64 s = odd_inverse(M(col, col));
    M.row(col) *= s;
    inv.row(col) *= s;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == col || M(r, col) == 0) continue;
      const u64 factor = M(r, col);
      M.row(r) -= factor * M.row(col);
      inv.row(r) -= factor * inv.row(col);
    }
  }
  return reduce(inv, q);
}

GadgetLayout plan_gadget(const ParamSet& p) {
  const int k = p.ell_q;
  const int a = p.box_exponent();
  for (int r = 1; p.n * r <= p.m; ++r) {
    const int top = p.m - p.n * r;
    for (int w = top; w >= 0; --w) {
      const i64 N = static_cast<i64>(w + 1) << a;
      const int b = ceil_log2(static_cast<u64>(N));
      if (b + 1 >= k) continue;
      const int need = rows_needed(k, b);
      if (need < 0 || need > r) continue;
      GadgetLayout L;
      L.rows_per_coord = r;
      L.top_rows = top;
      L.r_weight = w;
      L.noise_bound = N;
      L.shifts = shift_schedule(k, b, r);
      return L;
    }
  }
  throw std::invalid_argument("plan_gadget: m too small for a gadget trapdoor at this q and noise box");
}

ZqVector g_bar(const ZqMatrix& K, const ZqVector& s, const NoiseVector& e, u64 q) {
  if (K.cols() != s.size() || K.rows() != e.size()) throw std::invalid_argument("g_bar: dimension mismatch");
  ZqVector y = K * s;
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += static_cast<u64>(e(i));
  return reduce(y, q);
}

ZqVector g(const ZqMatrix& K, const ZqVector& s, const NoiseVector& e, int d, u64 q) {
  ZqVector y = g_bar(K, s, e, q);
  if (d) y(0) = (y(0) + q / 2) & (q - 1);
  return y;
}

ZqVector f(const PublicKey& pk, const DomainElement& x) {
  ZqVector y = g(pk.K, x.s, x.e, x.d, pk.params.q);
  if (x.c) y = reduce(ZqVector(y + pk.y0), pk.params.q);
  return y;
}

bool in_box(const ParamSet& p, const NoiseVector& e) {
  const i64 lo = p.noise_lo(), hi = p.noise_hi();
  return e.size() == p.m && (e.array() >= lo).all() && (e.array() <= hi).all();
}

DomainElement random_element(const ParamSet& p, Rng& rng, bool with_c) {
  DomainElement x;
  x.s = ZqVector(p.n);
  for (auto& v : x.s) v = uniform_below(rng, p.q);
  x.e = NoiseVector(p.m);
  for (auto& v : x.e) v = uniform_in(rng, p.noise_lo(), p.noise_hi());
  x.d = coin(rng);
  x.c = with_c ? coin(rng) : 0;
  return x;
}

bool valid_element(const ParamSet& p, const DomainElement& x) {
  return x.s.size() == p.n && (x.s.array() < p.q).all() && in_box(p, x.e) && (x.d == 0 || x.d == 1) &&
         (x.c == 0 || x.c == 1);
}

KeyPair gen(const ParamSet& p, u64 seed) {
  validate(p);
  const GadgetLayout L = plan_gadget(p);
  const u64 q = p.q;
  const int r = L.rows_per_coord, top = L.top_rows;
  for (u64 attempt = 0; attempt < 1000; ++attempt) {
    Rng rng = make_rng(seed, "gen", attempt);

    ZqMatrix U;
    if (p.n == 1) {
      U = ZqMatrix::Constant(1, 1, uniform_below(rng, q) | 1u);
    } else {
      ZqMatrix lower = ZqMatrix::Identity(p.n, p.n), upper = ZqMatrix::Zero(p.n, p.n);
      for (int i = 0; i < p.n; ++i)
        for (int j = 0; j < p.n; ++j) {
          if (j < i) lower(i, j) = uniform_below(rng, q);
          if (j > i) upper(i, j) = uniform_below(rng, q);
          if (j == i) upper(i, j) = uniform_below(rng, q) | 1u;
        }
      U = reduce(ZqMatrix(lower * upper), q);
    }

    ZqMatrix A(top, p.n);
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = uniform_below(rng, q);

    ZqMatrix R = ZqMatrix::Zero(p.n * r, top);
    for (int i = 0; i < p.n * r; ++i) {
      std::vector<int> cols(static_cast<std::size_t>(top));
      for (int c = 0; c < top; ++c) cols[static_cast<std::size_t>(c)] = c;
      for (int c = 0; c < L.r_weight; ++c) {
        const auto pick = c + static_cast<int>(uniform_below(rng, static_cast<u64>(top - c)));
        std::swap(cols[static_cast<std::size_t>(c)], cols[static_cast<std::size_t>(pick)]);
        R(i, cols[static_cast<std::size_t>(c)]) = coin(rng) ? 1u : q - 1;
      }
    }

    ZqMatrix G = ZqMatrix::Zero(p.n * r, p.n);
    for (int j = 0; j < p.n; ++j)
      for (int rho = 0; rho < r; ++rho) G(j * r + rho, j) = u64{1} << L.shifts[static_cast<std::size_t>(rho)];

    ZqMatrix K(p.m, p.n);
    K.topRows(top) = A;
    K.bottomRows(p.n * r) = reduce(ZqMatrix(G * U - R * A), q);

    KeyPair kp;
    kp.pk.K = reduce(K, q);
    kp.pk.params = p;
    kp.td.gadget.top_rows = top;
    kp.td.gadget.shifts = L.shifts;
    kp.td.gadget.noise_bound = L.noise_bound;
    kp.td.gadget.R = R;
    kp.td.gadget.U = U;
    kp.td.gadget.U_inv = inverse_mod(U, q);

    DomainElement z0;
    z0.s = ZqVector(p.n);
    for (auto& v : z0.s) v = uniform_below(rng, q);
    z0.e = NoiseVector(p.m);
    for (auto& v : z0.e) v = uniform_in(rng, -p.mu_prime, p.mu_prime);
    z0.d = coin(rng);
    z0.c = 0;
    kp.td.z0 = z0;
    kp.td.d0 = z0.d;
    kp.pk.y0 = g(kp.pk.K, z0.s, z0.e, z0.d, q);

    if (p.profile == Profile::toy && !g_injective_on_box(kp.pk)) continue;
    return kp;
  }
  throw std::runtime_error("gen: no injective key found");
}

std::optional<ZqVector> gadget_decode(const GadgetTrapdoor& gt, const PublicKey& pk, const ZqVector& y) {
  const ParamSet& p = pk.params;
  const u64 q = p.q, mask = q - 1;
  const int k = p.ell_q, r = gt.rows_per_coord(), top = gt.top_rows;
  ZqVector z = reduce(ZqVector(y.tail(p.n * r) + gt.R * y.head(top)), q);
  ZqVector sp(p.n);
  for (int j = 0; j < p.n; ++j) {
    u64 x = 0;
    int t = 0;
    for (int rho = 0; rho < r && t < k; ++rho) {
      const int sh = gt.shifts[static_cast<std::size_t>(rho)];
      if (k - sh <= t) continue;
      const u64 val = (z(j * r + rho) - (x << sh) + static_cast<u64>(gt.noise_bound)) & mask;
      const u64 reveal = (val >> (sh + t)) & ((u64{1} << (k - sh - t)) - 1);
      x |= reveal << t;
      t = k - sh;
    }
    if (t < k) return std::nullopt;
    sp(j) = x;
  }
  ZqVector s = reduce(ZqVector(gt.U_inv * sp), q);
  NoiseVector e(p.m);
  ZqVector Ks = reduce(ZqVector(pk.K * s), q);
  for (int i = 0; i < p.m; ++i) e(i) = centered(y(i) - Ks(i), q);
  if (!in_box(p, e)) return std::nullopt;
  return s;
}

std::vector<DomainElement> invert(const Trapdoor& td, const PublicKey& pk, const ZqVector& y) {
  const ParamSet& p = pk.params;
  if (y.size() != p.m) throw std::invalid_argument("invert: image length mismatch");
  const u64 q = p.q;
  std::vector<DomainElement> out;
  for (int c = 0; c < 2; ++c)
    for (int d = 0; d < 2; ++d) {
      ZqVector yp = reduce(y, q);
      if (c) yp = reduce(ZqVector(yp - pk.y0), q);
      if (d) yp(0) = (yp(0) - q / 2) & (q - 1);
      auto s = gadget_decode(td.gadget, pk, yp);
      if (!s) continue;
      DomainElement x;
      x.s = *s;
      x.e = NoiseVector(p.m);
      ZqVector Ks = reduce(ZqVector(pk.K * x.s), q);
      for (int i = 0; i < p.m; ++i) x.e(i) = centered(yp(i) - Ks(i), q);
      x.d = d;
      x.c = c;
      if (f(pk, x) == reduce(y, q)) out.push_back(std::move(x));
    }
  std::sort(out.begin(), out.end(),
            [&](const DomainElement& a, const DomainElement& b) { return bits_less(encode(p, a), encode(p, b)); });
  return out;
}

Bits encode(const ParamSet& p, const DomainElement& x) {
  if (x.s.size() != p.n || x.e.size() != p.m) throw std::invalid_argument("encode: dimension mismatch");
  Bits b(static_cast<std::size_t>(p.total_bits()));
  std::size_t pos = 0;
  for (int j = 0; j < p.n; ++j)
    for (int i = 0; i < p.ell_q; ++i) b[pos++] = static_cast<std::uint8_t>((x.s(j) >> i) & 1u);
  const i64 bias = i64{1} << (p.ell_e - 1);
  for (int j = 0; j < p.m; ++j) {
    const i64 stored = x.e(j) + bias;
    if (stored < 0 || stored >= (i64{1} << p.ell_e)) throw std::invalid_argument("encode: noise outside encodable range");
    for (int i = 0; i < p.ell_e; ++i) b[pos++] = static_cast<std::uint8_t>((stored >> i) & 1);
  }
  b[pos++] = static_cast<std::uint8_t>(x.d & 1);
  b[pos] = static_cast<std::uint8_t>(x.c & 1);
  return b;
}

std::optional<DomainElement> decode(const ParamSet& p, const Bits& bits) {
  if (static_cast<int>(bits.size()) != p.total_bits()) throw std::invalid_argument("decode: bit-string length mismatch");
  DomainElement x;
  x.s = ZqVector::Zero(p.n);
  x.e = NoiseVector::Zero(p.m);
  std::size_t pos = 0;
  for (int j = 0; j < p.n; ++j)
    for (int i = 0; i < p.ell_q; ++i) x.s(j) |= static_cast<u64>(bits[pos++] & 1u) << i;
  const i64 bias = i64{1} << (p.ell_e - 1);
  for (int j = 0; j < p.m; ++j) {
    i64 stored = 0;
    for (int i = 0; i < p.ell_e; ++i) stored |= static_cast<i64>(bits[pos++] & 1u) << i;
    x.e(j) = stored - bias;
  }
  x.d = bits[pos++] & 1;
  x.c = bits[pos] & 1;
  if (!in_box(p, x.e)) return std::nullopt;
  return x;
}

Bits encode_image(const ParamSet& p, const ZqVector& y) {
  Bits b(static_cast<std::size_t>(p.image_bits()));
  std::size_t pos = 0;
  for (int j = 0; j < p.m; ++j)
    for (int i = 0; i < p.ell_q; ++i) b[pos++] = static_cast<std::uint8_t>((y(j) >> i) & 1u);
  return b;
}

ZqVector decode_image(const ParamSet& p, const Bits& bits) {
  if (static_cast<int>(bits.size()) != p.image_bits()) throw std::invalid_argument("decode_image: length mismatch");
  ZqVector y = ZqVector::Zero(p.m);
  std::size_t pos = 0;
  for (int j = 0; j < p.m; ++j)
    for (int i = 0; i < p.ell_q; ++i) y(j) |= static_cast<u64>(bits[pos++] & 1u) << i;
  return y;
}

u64 f_packed(const PublicKey& pk, u64 x) {
  const ParamSet& p = pk.params;
  auto el = decode(p, unpack_bits(x, p.total_bits()));
  if (!el) return 0;
  return pack_bits(encode_image(p, f(pk, *el)));
}

std::vector<DomainElement> enumerate_domain(const ParamSet& p) {
  if (p.total_bits() > 24) throw std::invalid_argument("enumerate_domain: domain too large");
  std::vector<DomainElement> out;
  const u64 size = u64{1} << p.total_bits();
  for (u64 x = 0; x < size; ++x) {
    auto el = decode(p, unpack_bits(x, p.total_bits()));
    if (el) out.push_back(std::move(*el));
  }
  std::sort(out.begin(), out.end(),
            [&](const DomainElement& a, const DomainElement& b) { return bits_less(encode(p, a), encode(p, b)); });
  return out;
}

std::vector<DomainElement> brute_force_preimages(const PublicKey& pk, const ZqVector& y) {
  std::vector<DomainElement> out;
  for (auto& x : enumerate_domain(pk.params))
    if (f(pk, x) == y) out.push_back(x);
  return out;
}

bool g_injective_on_box(const PublicKey& pk) {
  const ParamSet& p = pk.params;
  if (p.n * p.ell_q > 24) throw std::invalid_argument("g_injective_on_box: toy scale only");
  // A collision exists iff K ds + de + dd v = 0 for some nonzero difference; every de with
  // |de_i| <= hi - lo is the difference of two box points.
  const u64 q = p.q, mask = p.mask();
  const u64 width = static_cast<u64>(p.noise_hi() - p.noise_lo());
  const u64 count = u64{1} << (p.n * p.ell_q);
  ZqVector ds(p.n);
  for (u64 idx = 0; idx < count; ++idx) {
    for (int j = 0; j < p.n; ++j) ds(j) = (idx >> (j * p.ell_q)) & mask;
    const ZqVector base = ZqVector(pk.K * ds);
    for (int dd = 0; dd < 2; ++dd) {
      if (idx == 0 && dd == 0) continue;
      bool hit = true;
      for (int i = 0; i < p.m && hit; ++i) {
        const u64 w = (base(i) + (i == 0 && dd ? p.half() : 0)) & mask;
        hit = w <= width || q - w <= width;
      }
      if (hit) return false;
    }
  }
  return true;
}

DomainElement domain_add(const ParamSet& p, const DomainElement& a, const DomainElement& b) {
  DomainElement r;
  r.s = reduce(ZqVector(a.s + b.s), p.q);
  r.e = a.e + b.e;
  r.d = a.d ^ b.d;
  r.c = a.c;
  return r;
}

}  // namespace qf
