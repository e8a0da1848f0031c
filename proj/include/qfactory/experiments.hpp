#pragma once

#include "qfactory/abort.hpp"
#include "qfactory/selftest.hpp"
#include "qfactory/serialize.hpp"

#include <map>
#include <utility>
#include <vector>

namespace qf {

// One (y, b) branch of the honest 4-state server: probability and the normalized target qubit.
struct Branch {
  double probability = 0.0;
  Qubit out;
};

// Keyed by (packed image bits, packed b).
using BranchTable = std::map<std::pair<u64, u64>, Branch>;

// Exact branch table of the full statevector circuit (toy only).
BranchTable statevector_branches(const PublicKey& pk, Variant v);
// Exact branch table of the two-branch model: x uniform over the valid domain, b uniform.
BranchTable two_branch_branches(const PublicKey& pk, Variant v);

// Total variation over (y, b, output); mass on branches whose outputs differ counts in full.
double branch_tv(const BranchTable& a, const BranchTable& b, double tol = kTol);

struct CorrectnessReport {
  i64 branches = 0;
  i64 two_preimage = 0;
  i64 mismatches = 0;  // branches whose client description has fidelity < 1 - tol
  double min_fidelity = 1.0;
};

// Client description against the server's qubit on every branch of the table.
CorrectnessReport check_correctness(const ClientState4& client, const BranchTable& branches, double tol = kTol);

// Sampled distribution of (acceptance, B1, B2) for one key; 12 cells.
Eigen::VectorXd sample_index_histogram(const KeyPair& kp, Variant v, Backend backend, i64 samples, u64 seed);

struct OracleCheck {
  ParamSet params;
  int keys = 0;
  i64 images_checked = 0;
  i64 invert_mismatches = 0;
  double max_exact_tv = 0.0;
  i64 samples_per_key = 0;
  double max_sampled_tv = 0.0;
  i64 formula_cases = 0;
  i64 formula_mismatches = 0;
  i64 corrupted_cases = 0;
  i64 corrupted_mismatches = 0;

  json to_json() const;
};

// invert vs exhaustive enumeration over the image space, exact and sampled backend distances,
// rotated-B2 and XOR-gadget formula regressions, and a corrupted trapdoor that must be caught.
OracleCheck oracle_check(const ParamSet& p, int keys, i64 samples, u64 seed);

struct RobustnessPoint {
  double angle = 0.0;
  Estimate accept;
  double min_fidelity = 0.0;
  double blindness_distance = 0.0;
};

// Measurement-rotation sweep: acceptance over `trials` self-tests and isometry fidelity per angle.
std::vector<RobustnessPoint> robustness_curve(const std::vector<double>& angles, i64 N, double eps2, int trials, u64 seed);

json to_json(const Estimate& e);
json to_json(const CheckResult& c);
json to_json(const IsometryResult& r);

}  // namespace qf
