#pragma once

#include "qfactory/lwe.hpp"
#include "qfactory/qsim.hpp"

#include <numeric>
#include <vector>

namespace qf {

// Register layout of the honest server circuit: domain x on qubits [0, N), image on
// [N, N + M), predicate target on N + M.
struct ServerCircuit {
  explicit ServerCircuit(const ParamSet& p) : params(p) {
    const int N = p.total_bits(), M = p.image_bits();
    domain.resize(static_cast<std::size_t>(N));
    std::iota(domain.begin(), domain.end(), 0);
    image.resize(static_cast<std::size_t>(M));
    std::iota(image.begin(), image.end(), N);
    target = N + M;
    zbits.assign(domain.begin(), domain.end() - 1);
  }

  int num_qubits() const { return target + 1; }

  // H on every domain qubit, then U_f into the image register.
  State stage1_state(const PublicKey& pk) const {
    State sv(num_qubits());
    for (int q : domain) apply_h(sv, q);
    apply_function_unitary(sv, [&pk](u64 x) { return f_packed(pk, x); }, domain, image);
    return sv;
  }

  // U_h: target ^= d, read from the z-register (the c bit does not enter h).
  void apply_predicate(State& sv) const {
    const int dbit = static_cast<int>(zbits.size()) - 1;
    apply_function_unitary(sv, [dbit](u64 z) { return (z >> dbit) & 1u; }, zbits, {target});
  }

  ParamSet params;
  std::vector<int> domain;
  std::vector<int> image;
  std::vector<int> zbits;
  int target = 0;
};

}  // namespace qf
