#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <vector>

namespace qf {

using u64 = std::uint64_t;
using i64 = std::int64_t;

// Z_q entries for a power-of-two q; arithmetic wraps mod 2^64 and is masked.
using ZqVector = Eigen::Matrix<u64, Eigen::Dynamic, 1>;
using ZqMatrix = Eigen::Matrix<u64, Eigen::Dynamic, Eigen::Dynamic>;
using NoiseVector = Eigen::Matrix<i64, Eigen::Dynamic, 1>;

using Bits = std::vector<std::uint8_t>;

using cplx = std::complex<double>;
using Qubit = Eigen::Vector2cd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTol = 1e-9;

// Bit i of the string becomes bit i of the integer.
inline u64 pack_bits(const Bits& b) {
  u64 v = 0;
  for (std::size_t i = 0; i < b.size(); ++i) v |= static_cast<u64>(b[i] & 1u) << i;
  return v;
}

inline Bits unpack_bits(u64 v, int width) {
  Bits b(static_cast<std::size_t>(width));
  for (int i = 0; i < width; ++i) b[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((v >> i) & 1u);
  return b;
}

inline int parity(const Bits& b) {
  int p = 0;
  for (auto x : b) p ^= (x & 1);
  return p;
}

}  // namespace qf
