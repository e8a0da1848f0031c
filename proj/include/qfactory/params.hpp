#pragma once

#include "qfactory/core.hpp"

#include <string>

namespace qf {

enum class Profile { paper, toy };

struct ParamSet {
  int n = 1;        // secret coordinates
  u64 q = 8;        // modulus, power of two
  int m = 2;        // image coordinates
  i64 mu = 1;       // noise bound for e
  i64 mu_prime = 0; // noise bound for e0
  int ell_q = 3;    // log2 q
  int ell_e = 1;    // bits per noise coordinate
  Profile profile = Profile::toy;

  u64 mask() const { return q - 1; }
  u64 half() const { return q >> 1; }
  // Noise box [-2^a, 2^a - 1] with 2^a the smallest power of two >= mu.
  int box_exponent() const;
  i64 noise_lo() const { return -(i64{1} << box_exponent()); }
  i64 noise_hi() const { return (i64{1} << box_exponent()) - 1; }
  int total_bits() const { return n * ell_q + m * ell_e + 2; }
  int image_bits() const { return m * ell_q; }

  bool operator==(const ParamSet&) const = default;
};

// Throws std::invalid_argument when an invariant fails.
void validate(const ParamSet& p);

ParamSet paper_params(int n);
// ell_e defaults to the box width; pass a larger value to allow out-of-box encodings.
ParamSet toy_params(int n, int log_q, int m, i64 mu, i64 mu_prime, int ell_e = 0);
// n=1, q=8, m=2, mu=1, mu'=0: 7 domain bits, 6 image bits.
ParamSet default_toy();

std::string to_string(Profile p);
Profile profile_from_string(const std::string& s);

}  // namespace qf
