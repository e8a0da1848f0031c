#pragma once

#include "qfactory/core.hpp"

#include <array>
#include <random>
#include <string>
#include <string_view>

namespace qf {

using Rng = std::mt19937_64;

// seed' = first 8 bytes (big-endian) of SHA-256(be64(master) || label || 0x00 || be64(index)).
u64 derive_seed(u64 master, std::string_view label, u64 index = 0);

inline Rng make_rng(u64 master, std::string_view label, u64 index = 0) {
  return Rng(derive_seed(master, label, index));
}

std::array<std::uint8_t, 32> sha256(std::string_view data);
std::string sha256_hex(std::string_view data);

// Portable samplers: std distributions are implementation-defined, these are not.
u64 uniform_below(Rng& rng, u64 bound);
i64 uniform_in(Rng& rng, i64 lo, i64 hi);
double uniform01(Rng& rng);
int coin(Rng& rng);
Bits random_bits(Rng& rng, int width);

}  // namespace qf
