#pragma once

#include "qfactory/qfactory8.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace qf {

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

// cos^2((L - M) pi / 8): probability of the +1 outcome when |+_{L pi/4}> is measured at angle M pi/4.
double ideal_prob(int L, int M);

struct TestPlan {
  i64 N = 0;
  double f = 0.5;
  std::vector<i64> T;   // sorted run indices
  std::vector<int> M;   // M[k] is the setting for run T[k]
};

// |T| = ceil(f N), uniform subset, uniform settings.
TestPlan plan_tests(i64 N, double f, u64 seed);

struct Cell {
  i64 count = 0;
  i64 successes = 0;
  double p_hat() const { return count ? static_cast<double>(successes) / static_cast<double>(count) : 0.0; }
};

struct StatsTable {
  std::array<Cell, 64> cells{};

  Cell& at(int L, int M) { return cells[static_cast<std::size_t>(8 * L + M)]; }
  const Cell& at(int L, int M) const { return cells[static_cast<std::size_t>(8 * L + M)]; }
  i64 total() const;
};

struct CheckResult {
  bool accepted = true;
  StatsTable table;
  double max_deviation = 0.0;  // over cells with count >= min_count
  int worst_L = -1;
  int worst_M = -1;
  i64 skipped_cells = 0;
};

// outcomes[k] is the result for run T[k]: 0 for the +1 eigenvalue, 1 for -1.
CheckResult collect_and_check(const TestPlan& plan, const std::vector<int>& L_indices, const std::vector<int>& outcomes,
                              double eps2, i64 min_count = 30);

// Union bound on the honest abort probability, sum over checked cells of 2 exp(-2 n eps2^2).
double hoeffding_abort_bound(const StatsTable& table, double eps2, i64 min_count = 30);

// Eight states in C^d and eight binary observables; O'_0 plays X', O'_2 plays Y'.
struct Strategy {
  std::string name;
  int dim = 2;
  std::array<CVector, 8> states;
  std::array<CMatrix, 8> observables;
};

void validate(const Strategy& s);

// Observable cos(a) X + sin(a) Y.
Eigen::Matrix2cd xy_observable(double angle);

Strategy honest_strategy();
// States cos(L pi/8)|a> + e^{i phi} sin(L pi/8)|b> in C^dim with matching observables.
Strategy phi_family_strategy(double phi, int dim = 3);
// Honest qubit tensored with |j> in C^{dim/2}, everything conjugated by a random unitary.
Strategy conjugated_strategy(int dim, u64 seed, int junk_index = 0);
// Honest states, measurements rotated by `angle`.
Strategy shifted_strategy(double angle);
// Honest, except state `L` is replaced by a vector orthogonal to the qubit space (dim 3).
Strategy junk_replaced_strategy(int L = 5);
// |+_{L pi/4}> tensor |L3>: the basis bit leaks into the ancilla.
Strategy leaky_strategy();
// Honest qubit, junk register rotated by an L-dependent angle (dim 4).
Strategy dependent_junk_strategy(double angle = 0.3);

double trace_distance(const CMatrix& rho, const CMatrix& sigma);

// Phi(|+>|Psi>) = |+> (I + X')/2 |Psi> + |-> (-i Y') (I - X')/2 |Psi>, qubit index most significant.
CVector isometry_apply(const Strategy& s, int L);

struct IsometryResult {
  std::array<double, 8> fidelity{};
  std::array<double, 8> norm{};
  std::array<CMatrix, 8> junk;
  double max_junk_distance = 0.0;
  double min_fidelity() const;
};

IsometryResult isometry_result(const Strategy& s);
double junk_independence(const IsometryResult& r);

struct BlindnessResult {
  bool pass = false;
  double max_distance = 0.0;
};
// Trace distance between the normalized mixtures (rho_L + rho_{L xor 4}) / 2 over all L, L'.
BlindnessResult blindness_check(const Strategy& s, double eps1);

// Numerical rank of the Gram matrix of the eight states.
int gram_rank(const Strategy& s, double tol = 1e-9);
// max_L |<Psi(L xor 4)|Psi(L)>|.
double max_antipodal_overlap(const Strategy& s);

struct SelftestResult {
  bool accepted = false;
  CheckResult check;
  BlindnessResult blindness;
  std::optional<IsometryResult> isometry;
};

// Tests every one of the N rounds with a uniform L and the plan's M, outcomes from Born probabilities.
SelftestResult selftest_iid(const Strategy& s, i64 N, double eps1, double eps2, u64 seed, i64 min_count = 30);

// Server behaviour on test qubits: measure at (M + shift) pi/4.
struct VerifiableResult {
  bool accepted = false;
  CheckResult check;
  TestPlan plan;
  std::vector<i64> unmeasured;       // run indices kept by the server
  std::vector<int> unmeasured_L;     // client-private indices
  double min_unmeasured_fidelity = 1.0;
};

// Run i uses client seed derive(client_seed, "client", i) and server seed derive(server_seed, "run", i).
VerifiableResult run_verifiable(const ParamSet& p, i64 N, double f, double eps2, Backend backend, u64 client_seed,
                                u64 server_seed, int measurement_shift = 0, i64 min_count = 30);
// Server side of the test phase: outcome of measuring each tested qubit at (M + shift) pi/4.
std::vector<int> measure_tests(const std::vector<Qubit>& held, const TestPlan& plan, int shift, Rng& rng);

}  // namespace qf
