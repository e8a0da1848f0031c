#include "qfactory/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace qf {

Estimate regularity_estimate(const ParamSet& p, i64 trials, u64 seed, int trials_per_key) {
  if (trials < 1) throw std::invalid_argument("regularity_estimate: trials >= 1");
  i64 hits = 0;
  KeyPair kp;
  for (i64 i = 0; i < trials; ++i) {
    if (i % trials_per_key == 0) kp = gen(p, derive_seed(seed, "regularity-key", static_cast<u64>(i / trials_per_key)));
    Rng rng = make_rng(seed, "regularity-x", static_cast<u64>(i));
    DomainElement x = random_element(p, rng, true);
    if (invert(kp.td, kp.pk, f(kp.pk, x)).size() == 2) ++hits;
  }
  return wilson(hits, trials);
}

Estimate homomorphy_estimate(const ParamSet& p, i64 trials, u64 seed, int trials_per_key) {
  if (trials < 1) throw std::invalid_argument("homomorphy_estimate: trials >= 1");
  i64 hits = 0;
  KeyPair kp;
  for (i64 i = 0; i < trials; ++i) {
    if (i % trials_per_key == 0) kp = gen(p, derive_seed(seed, "homomorphy-key", static_cast<u64>(i / trials_per_key)));
    Rng rng = make_rng(seed, "homomorphy-z", static_cast<u64>(i));
    DomainElement z = random_element(p, rng, false);
    const DomainElement& z0 = kp.td.z0;
    DomainElement sum = domain_add(p, z, z0);
    if (!in_box(p, sum.e)) continue;
    ZqVector lhs = g(kp.pk.K, z.s, z.e, z.d, p.q) + g(kp.pk.K, z0.s, z0.e, z0.d, p.q);
    for (auto& v : lhs) v &= p.mask();
    if (lhs == g(kp.pk.K, sum.s, sum.e, sum.d, p.q)) ++hits;
  }
  return wilson(hits, trials);
}

double homomorphy_analytic(const ParamSet& p) {
  const double w = std::ldexp(1.0, p.box_exponent() + 1);
  double per = 0.0;
  for (i64 e = -p.mu_prime; e <= p.mu_prime; ++e) per += std::max(0.0, w - static_cast<double>(std::llabs(e))) / w;
  per /= static_cast<double>(2 * p.mu_prime + 1);
  return std::pow(per, p.m);
}

Adversary random_adversary() {
  return {"random", false, [](const PublicKey&, const Trapdoor*, Rng& rng) { return coin(rng); }};
}

Adversary trapdoor_adversary() {
  return {"trapdoor", true, [](const PublicKey& pk, const Trapdoor* td, Rng&) {
            auto pre = invert(*td, pk, pk.y0);
            for (auto& x : pre)
              if (x.c == 0) return x.d;
            return 0;
          }};
}

Adversary brute_force_adversary() {
  return {"brute-force", false, [](const PublicKey& pk, const Trapdoor*, Rng&) {
            for (auto& x : enumerate_domain(pk.params))
              if (x.c == 0 && f(pk, x) == pk.y0) return x.d;
            return 0;
          }};
}

GameResult hardcore_game(const Adversary& adv, const ParamSet& p, i64 trials, u64 seed) {
  if (trials < 1) throw std::invalid_argument("hardcore_game: trials >= 1");
  i64 correct = 0;
  for (i64 i = 0; i < trials; ++i) {
    KeyPair kp = gen(p, derive_seed(seed, "hardcore-key", static_cast<u64>(i)));
    Rng rng = make_rng(seed, "hardcore-adversary", static_cast<u64>(i));
    const int guess = adv.guess(kp.pk, adv.uses_trapdoor ? &kp.td : nullptr, rng);
    if (guess == kp.td.d0) ++correct;
  }
  GameResult r;
  r.correct = wilson(correct, trials);
  r.advantage = r.correct.value - 0.5;
  return r;
}

}  // namespace qf
