#pragma once

#include "qfactory/qfactory4.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace qf {

// L = 4*L1 + 2*L2 + L3, theta = L*pi/4. The basis bits are (L2, L3).
struct EightIndex {
  int L = 0;

  int L1() const { return (L >> 2) & 1; }
  int L2() const { return (L >> 1) & 1; }
  int L3() const { return L & 1; }
  double theta() const { return L * kPi / 4; }
  bool operator==(const EightIndex&) const = default;
};

// Index of the merge output for in1 = H^{B1} X^{B2}|0>, in2 = R(pi/2)^{B1'} Z^{B2'}|+>.
// The two low terms 2*B1' and 2*B1*(B2 xor s2) add with carry into L1.
EightIndex compute_L(int B1, int B2, int B1p, int B2p, int s1, int s2);

struct MergeResult {
  int s1 = 0;
  int s2 = 0;
  QubitDescription out;
};

struct MergeBranch {
  double probability = 0.0;
  std::optional<Qubit> out;  // empty when the branch has zero weight
};

// Qubit 0 = |+_{pi/4}>, 1 = in1, 2 = in2; CZ(0,1), CZ(1,2); X-measure 0 -> s1 and 1 -> s2.
MergeBranch merge_branch(const Qubit& in1, const Qubit& in2, int s1, int s2);
MergeResult merge_gadget(const Qubit& in1, const Qubit& in2, Rng& rng);

struct MergeMessage {
  int s1 = 0;
  int s2 = 0;
};

struct Server8Output {
  ServerOutput first;   // plain run
  ServerOutput second;  // rotated run
  MergeMessage merge;
  std::optional<QubitDescription> qubit;
};

using Server8Strategy = std::function<Server8Output(const KeyMessage& first, const KeyMessage& second, Rng& rng)>;

Server8Output server8_honest(const KeyMessage& first, const KeyMessage& second, Backend backend, Rng& rng,
                             const PreimageOracle& oracle1 = {}, const PreimageOracle& oracle2 = {});
Server8Strategy honest_strategy8(Backend backend, PreimageOracle oracle1 = {}, PreimageOracle oracle2 = {});
// Honest server that reports s1 xor flip1, s2 xor flip2.
Server8Strategy flipping_strategy8(Backend backend, int flip1, int flip2);

struct Result8 {
  Result4 first;
  Result4 second;
  MergeMessage merge;
  EightIndex index;
  std::optional<QubitDescription> qubit;
};

// Client side: derives both 4-state indices (uniform fill on no_preimage) and L.
EightIndex client_finalize8(const OutputIndex4& first, const OutputIndex4& second, const MergeMessage& merge);

Result8 run_protocol8(const ParamSet& p, u64 client_seed, u64 server_seed, const Server8Strategy& strategy);
// Honest server; two-branch runs use the client's trapdoors as the simulation oracle.
Result8 run_protocol8(const ParamSet& p, u64 client_seed, u64 server_seed, Backend backend);

// One record per round of the two-predicate guessing game.
struct GuessRecord {
  int guess_a = 0;
  int guess_b = 0;
  int a = 0;
  int b = 0;
};

struct GuessStats {
  i64 count = 0;
  // e1: both wrong, e2: only a right, e3: only b right, e4: both right.
  double e1 = 0, e2 = 0, e3 = 0, e4 = 0;
  double P_a = 0, P_b = 0, P_xor = 0, P_joint = 0;
  double max_single = 0;
  // Guaranteed single-predicate advantage implied by P_joint: max_single >= 1/2 + eps_prime.
  double eps_prime = 0;
  bool bound_holds = true;
};

GuessStats guess_stats(const std::vector<GuessRecord>& records);

}  // namespace qf
