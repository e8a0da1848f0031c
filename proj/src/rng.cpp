#include "qfactory/rng.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace qf {

std::array<std::uint8_t, 32> sha256(std::string_view data) {
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != 32)
    throw std::runtime_error("sha256 failed");
  return out;
}

std::string sha256_hex(std::string_view data) {
  static const char* hex = "0123456789abcdef";
  auto d = sha256(data);
  std::string s;
  s.reserve(64);
  for (auto byte : d) {
    s.push_back(hex[byte >> 4]);
    s.push_back(hex[byte & 15]);
  }
  return s;
}

namespace {
void put_be64(std::string& s, u64 v) {
  for (int i = 7; i >= 0; --i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
}  // namespace

u64 derive_seed(u64 master, std::string_view label, u64 index) {
  std::string msg;
  put_be64(msg, master);
  msg.append(label);
  msg.push_back('\0');
  put_be64(msg, index);
  auto d = sha256(msg);
  u64 v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | d[static_cast<std::size_t>(i)];
  return v;
}

u64 uniform_below(Rng& rng, u64 bound) {
  if (bound == 0) throw std::invalid_argument("uniform_below: zero bound");
  if ((bound & (bound - 1)) == 0) return rng() & (bound - 1);
  const u64 limit = ~u64{0} - (~u64{0} % bound);
  u64 x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

i64 uniform_in(Rng& rng, i64 lo, i64 hi) {
  if (hi < lo) throw std::invalid_argument("uniform_in: empty range");
  return lo + static_cast<i64>(uniform_below(rng, static_cast<u64>(hi - lo) + 1));
}

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int coin(Rng& rng) { return static_cast<int>(rng() >> 63); }

Bits random_bits(Rng& rng, int width) {
  Bits b(static_cast<std::size_t>(width));
  for (auto& x : b) x = static_cast<std::uint8_t>(coin(rng));
  return b;
}

}  // namespace qf
