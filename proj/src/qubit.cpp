#include "qfactory/qsim.hpp"

namespace qf {

Qubit ket0() { return Qubit(1, 0); }
Qubit ket1() { return Qubit(0, 1); }

Qubit plus_state(double theta) {
  const double r = 1.0 / std::sqrt(2.0);
  return Qubit(r, r * std::polar(1.0, theta));
}

QubitDescription QubitDescription::bb84(int B1, int B2) {
  QubitDescription d;
  d.kind_ = Kind::bb84;
  d.b1_ = B1 & 1;
  d.b2_ = B2 & 1;
  if (d.b1_ == 0)
    d.v_ = d.b2_ ? ket1() : ket0();
  else
    d.v_ = plus_state(d.b2_ ? kPi : 0.0);
  return d;
}

QubitDescription QubitDescription::rotated(int B1, int B2) {
  QubitDescription d;
  d.kind_ = Kind::rotated;
  d.b1_ = B1 & 1;
  d.b2_ = B2 & 1;
  d.v_ = plus_state(d.b1_ * kPi / 2 + d.b2_ * kPi);
  return d;
}

QubitDescription QubitDescription::eight(int L) {
  QubitDescription d;
  d.kind_ = Kind::eight;
  d.idx_ = ((L % 8) + 8) % 8;
  d.v_ = plus_state(d.idx_ * kPi / 4);
  return d;
}

QubitDescription QubitDescription::raw(const Qubit& v) {
  if (v.norm() < 1e-12) throw std::invalid_argument("QubitDescription: zero vector");
  QubitDescription d;
  d.kind_ = Kind::raw;
  d.v_ = v.normalized();
  return d;
}

double fidelity(const Qubit& a, const Qubit& b) {
  const double na = a.squaredNorm(), nb = b.squaredNorm();
  if (na <= 0 || nb <= 0) throw std::invalid_argument("fidelity: zero vector");
  return std::norm(a.dot(b)) / (na * nb);
}

double fidelity(const QubitDescription& a, const QubitDescription& b) { return fidelity(a.vector(), b.vector()); }

std::optional<std::pair<int, int>> as_bb84(const Qubit& v, double tol) {
  for (int B1 = 0; B1 < 2; ++B1)
    for (int B2 = 0; B2 < 2; ++B2)
      if (fidelity(v, QubitDescription::bb84(B1, B2).vector()) >= 1 - tol) return std::make_pair(B1, B2);
  return std::nullopt;
}

std::optional<std::pair<int, int>> as_rotated(const Qubit& v, double tol) {
  for (int B1 = 0; B1 < 2; ++B1)
    for (int B2 = 0; B2 < 2; ++B2)
      if (fidelity(v, QubitDescription::rotated(B1, B2).vector()) >= 1 - tol) return std::make_pair(B1, B2);
  return std::nullopt;
}

std::optional<int> as_eight(const Qubit& v, double tol) {
  for (int L = 0; L < 8; ++L)
    if (fidelity(v, plus_state(L * kPi / 4)) >= 1 - tol) return L;
  return std::nullopt;
}

std::optional<QubitDescription> analytic_stage2(const TwoBranchState& st, const Bits& b, double theta) {
  if (st.x.empty() || st.x.size() != st.x_prime.size() || st.x.size() != b.size())
    throw std::invalid_argument("analytic_stage2: length mismatch");
  if (st.x == st.x_prime) throw std::invalid_argument("analytic_stage2: branches must differ");
  if (st.x.back() == st.x_prime.back()) throw std::invalid_argument("analytic_stage2: last bits must differ");
  if (std::abs(theta) > 1e-12 && std::abs(theta - kPi / 2) > 1e-12)
    throw std::invalid_argument("analytic_stage2: only theta in {0, pi/2} supported");
  // <b_theta|x> is proportional to (-1)^{b.x} e^{-i theta |x|}.
  auto amplitude = [&](const Bits& x) {
    int sign = 0, weight = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sign ^= (x[i] & b[i]) & 1;
      weight += x[i] & 1;
    }
    return (sign ? -1.0 : 1.0) * std::polar(1.0, -theta * weight);
  };
  Qubit out = Qubit::Zero();
  out(st.hx & 1) += amplitude(st.x);
  out(st.hx_prime & 1) += amplitude(st.x_prime);
  if (out.norm() < 1e-9) return std::nullopt;
  return QubitDescription::raw(out);
}

}  // namespace qf
