#pragma once

#include "qfactory/qfactory4.hpp"
#include "qfactory/stats.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qf {

struct Rational {
  i64 num = 0;
  i64 den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  // Accepts "a/b", integers and decimals ("0.65" -> 13/20).
  static Rational parse(const std::string& s);
  std::string str() const;
};

// A run of t = n_c * t_c parallel 4-state runs; chunk i holds runs [i*t_c, (i+1)*t_c).
struct ChunkConfig {
  int t_c = 1;
  int n_c = 1;
  Rational p_a{4, 5};
  Rational p_c{13, 20};

  int total() const { return t_c * n_c; }
};

// Requires 1/2 < p_c < p_a <= 1 and positive sizes.
void validate(const ChunkConfig& cfg);

// True when `accepted` runs out of t_c reach the threshold p_c * t_c (exact rational compare).
bool chunk_passes(i64 accepted, int t_c, const Rational& p_c);

struct RunRecord {
  int a = 0;  // 1 iff the image had two preimages
  int B1 = 0;
  int B2 = 0;
  std::optional<QubitDescription> qubit;  // server side
};

// XOR gadget: anc_i = |+_{pi/2}>, CZ(anc_i, in_i), CZ(in_i, W) with W a shared |+>, then
// X-measurements anc_i -> s_{i,1}, in_i -> s_{i,2}. W ends as R(pi/2)^{B1} Z^{B2} |+>.
using SBits = std::vector<std::pair<int, int>>;

struct XorResult {
  SBits s;
  QubitDescription out;
  double probability = 1.0;
};

struct XorBranch {
  double probability = 0.0;
  std::optional<Qubit> out;
};

// Simulated one input at a time on three qubits; exact for any t because each input only
// touches W through a CZ. `strict` rejects inputs outside the BB84 set.
XorResult gad_xor(const std::vector<Qubit>& inputs, Rng& rng, bool strict = true);
// Post-selected branch on the sequential simulator.
XorBranch gad_xor_branch(const std::vector<Qubit>& inputs, const SBits& s);
// Same branch on the full (2t + 1)-qubit register (t <= 7).
XorBranch gad_xor_branch_full(const std::vector<Qubit>& inputs, const SBits& s);

// Output index of the gadget for BB84 inputs H^{B1_i} X^{B2_i}|0>.
std::pair<int, int> xor_indices(const std::vector<std::pair<int, int>>& bb84, const SBits& s);

struct CombineResult {
  int B1 = 0;
  int B2 = 0;
  bool accepted = false;
  std::vector<i64> chunk_accepts;
};

CombineResult client_combine(const std::vector<RunRecord>& records, const ChunkConfig& cfg, const SBits& s, Rng& rng);

struct KeyedImage {
  const PublicKey* pk = nullptr;
  const Trapdoor* td = nullptr;
  ZqVector y;
};

// Random bit below the threshold, otherwise xor of a_i * d0_i.
int beta(const std::vector<KeyedImage>& runs, const Rational& p_c, Rng& rng);

double chernoff_success_bound(double p_a, double p_b, int t_c);
double eta_bound(double p_c);

// p_c is the midpoint of (1/2, p_a), n_c = n, and t_c the smallest size with
// n_c * exp(-2 (p_a - p_c)^2 t_c) <= target_fail.
ChunkConfig choose_params(const Rational& p_a, int n, double target_fail);

// Honest chunks on the function layer only: one fresh key and one uniform x per run.
struct ChunkSimulation {
  i64 chunks = 0;
  Estimate accept_rate;
  Estimate run_rate;  // per-run two-preimage fraction
};
ChunkSimulation simulate_chunks(const ParamSet& p, int t_c, const Rational& p_c, i64 chunks, u64 seed, int threads = 0);

struct AbortResult {
  ChunkConfig config;
  std::vector<RunRecord> records;
  SBits s;
  CombineResult combined;
  std::optional<QubitDescription> out;
};

// End-to-end abort-tolerant run: honest 4-state runs and the XOR gadget on the server.
AbortResult run_abort(const ParamSet& p, const ChunkConfig& cfg, u64 client_seed, u64 server_seed, Backend backend);

}  // namespace qf
