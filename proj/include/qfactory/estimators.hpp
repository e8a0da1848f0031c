#pragma once

#include "qfactory/lwe.hpp"
#include "qfactory/rng.hpp"
#include "qfactory/stats.hpp"

#include <functional>
#include <string>

namespace qf {

// Fraction of uniformly sampled f-domain points whose image has exactly two preimages.
Estimate regularity_estimate(const ParamSet& p, i64 trials, u64 seed, int trials_per_key = 16);

// Fraction of (k, z0, z) with z*z0 in the box and g(z)+g(z0) = g(z*z0).
Estimate homomorphy_estimate(const ParamSet& p, i64 trials, u64 seed, int trials_per_key = 16);

// Closed form of the above: product over coordinates of the expected box overlap.
double homomorphy_analytic(const ParamSet& p);

struct Adversary {
  std::string name;
  bool uses_trapdoor = false;
  std::function<int(const PublicKey&, const Trapdoor*, Rng&)> guess;
};

Adversary random_adversary();
Adversary trapdoor_adversary();
// Enumerates g's domain to find the planted element; toy scale only.
Adversary brute_force_adversary();

struct GameResult {
  Estimate correct;
  double advantage = 0.0;  // Pr[correct] - 1/2
};

GameResult hardcore_game(const Adversary& adv, const ParamSet& p, i64 trials, u64 seed);

}  // namespace qf
