#include "qfactory/params.hpp"

#include <cmath>
#include <stdexcept>

namespace qf {

namespace {
int ceil_log2(u64 x) {
  int k = 0;
  while ((u64{1} << k) < x) ++k;
  return k;
}
}  // namespace

int ParamSet::box_exponent() const { return ceil_log2(static_cast<u64>(mu < 1 ? 1 : mu)); }

void validate(const ParamSet& p) {
  auto fail = [](const char* what) { throw std::invalid_argument(std::string("invalid params: ") + what); };
  if (p.n < 1 || p.m < 1) fail("n and m must be positive");
  if (p.q < 4 || (p.q & (p.q - 1)) != 0) fail("q must be a power of two >= 4");
  if (p.ell_q < 2 || p.ell_q > 62 || (u64{1} << p.ell_q) != p.q) fail("ell_q must equal log2 q (at most 62)");
  if (p.mu < 1) fail("mu must be >= 1");
  if (p.mu_prime < 0) fail("mu' must be >= 0");
  if (!(2 * p.mu < static_cast<i64>(p.q / 2))) fail("need 2 mu < q/2");
  if (p.ell_e < p.box_exponent() + 1 || p.ell_e > 62) fail("ell_e too small for the noise box");
  if (p.profile == Profile::paper) {
    if (p.mu_prime > p.mu / p.m) fail("paper profile needs mu' <= mu/m");
  } else {
    if (!(p.mu_prime < p.mu)) fail("toy profile needs mu' < mu");
  }
}

ParamSet paper_params(int n) {
  if (n < 1) throw std::invalid_argument("paper_params: n >= 1");
  const int lg = ceil_log2(static_cast<u64>(n));
  ParamSet p;
  p.profile = Profile::paper;
  p.n = n;
  p.ell_q = 5 * lg + 21;
  if (p.ell_q > 62) throw std::invalid_argument("paper_params: q exceeds 2^62");
  p.q = u64{1} << p.ell_q;
  p.m = 23 * n + 5 * n * lg;
  const long double mu =
      2.0L * p.m * n * std::sqrt(23.0L + 5.0L * std::log2(static_cast<long double>(n)));
  p.mu = static_cast<i64>(std::ceil(mu));
  p.mu_prime = p.mu / p.m;
  p.ell_e = p.box_exponent() + 1;
  validate(p);
  return p;
}

ParamSet toy_params(int n, int log_q, int m, i64 mu, i64 mu_prime, int ell_e) {
  ParamSet p;
  p.profile = Profile::toy;
  p.n = n;
  p.ell_q = log_q;
  p.q = u64{1} << log_q;
  p.m = m;
  p.mu = mu;
  p.mu_prime = mu_prime;
  p.ell_e = ell_e > 0 ? ell_e : p.box_exponent() + 1;
  validate(p);
  return p;
}

ParamSet default_toy() { return toy_params(1, 3, 2, 1, 0); }

std::string to_string(Profile p) { return p == Profile::paper ? "paper" : "toy"; }

Profile profile_from_string(const std::string& s) {
  if (s == "paper") return Profile::paper;
  if (s == "toy") return Profile::toy;
  throw std::invalid_argument("unknown profile: " + s);
}

}  // namespace qf
