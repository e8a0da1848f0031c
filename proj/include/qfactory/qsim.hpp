#pragma once

#include "qfactory/core.hpp"
#include "qfactory/rng.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qf {

inline constexpr int kDefaultQubitCap = 16;

// Index bit i of an amplitude is qubit i (qubit 0 varies fastest).
template <typename Real = double>
class StateVector {
 public:
  using Complex = std::complex<Real>;
  using Amplitudes = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

  explicit StateVector(int num_qubits, int cap = kDefaultQubitCap) : n_(num_qubits) {
    if (num_qubits < 1 || num_qubits > cap) throw std::length_error("StateVector: qubit count exceeds cap");
    amp_ = Amplitudes::Zero(Eigen::Index{1} << num_qubits);
    amp_(0) = Complex(1);
  }

  static StateVector from_amplitudes(const Amplitudes& a, int cap = kDefaultQubitCap) {
    int n = 0;
    while ((Eigen::Index{1} << n) < a.size()) ++n;
    if ((Eigen::Index{1} << n) != a.size()) throw std::invalid_argument("StateVector: size not a power of two");
    StateVector sv(n, cap);
    sv.amp_ = a;
    return sv;
  }

  int num_qubits() const { return n_; }
  Eigen::Index dim() const { return amp_.size(); }
  const Amplitudes& amplitudes() const { return amp_; }
  Amplitudes& amplitudes() { return amp_; }
  Real norm_squared() const { return amp_.squaredNorm(); }

  void check_qubit(int q) const {
    if (q < 0 || q >= n_) throw std::out_of_range("StateVector: qubit index out of range");
  }

 private:
  int n_;
  Amplitudes amp_;
};

using State = StateVector<double>;

template <typename Real>
StateVector<Real> tensor(const StateVector<Real>& low, const StateVector<Real>& high, int cap = kDefaultQubitCap) {
  typename StateVector<Real>::Amplitudes a(low.dim() * high.dim());
  for (Eigen::Index j = 0; j < high.dim(); ++j) a.segment(j * low.dim(), low.dim()) = high.amplitudes()(j) * low.amplitudes();
  return StateVector<Real>::from_amplitudes(a, cap);
}

template <typename Real>
StateVector<Real> product_state(const std::vector<Qubit>& qubits, int cap = kDefaultQubitCap) {
  typename StateVector<Real>::Amplitudes a = StateVector<Real>::Amplitudes::Ones(1);
  for (const auto& q : qubits) {
    typename StateVector<Real>::Amplitudes next(a.size() * 2);
    next.head(a.size()) = a * static_cast<typename StateVector<Real>::Complex>(q(0));
    next.tail(a.size()) = a * static_cast<typename StateVector<Real>::Complex>(q(1));
    a = next;
  }
  return StateVector<Real>::from_amplitudes(a, cap);
}

template <typename Real>
void apply_single(StateVector<Real>& sv, int q, const Eigen::Matrix<std::complex<Real>, 2, 2>& U) {
  sv.check_qubit(q);
  auto& a = sv.amplitudes();
  const Eigen::Index bit = Eigen::Index{1} << q;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (i & bit) continue;
    const auto a0 = a(i), a1 = a(i | bit);
    a(i) = U(0, 0) * a0 + U(0, 1) * a1;
    a(i | bit) = U(1, 0) * a0 + U(1, 1) * a1;
  }
}

template <typename Real>
void apply_h(StateVector<Real>& sv, int q) {
  const Real r = Real(1) / std::sqrt(Real(2));
  Eigen::Matrix<std::complex<Real>, 2, 2> H;
  H << r, r, r, -r;
  apply_single(sv, q, H);
}

template <typename Real>
void apply_x(StateVector<Real>& sv, int q) {
  sv.check_qubit(q);
  auto& a = sv.amplitudes();
  const Eigen::Index bit = Eigen::Index{1} << q;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (!(i & bit)) std::swap(a(i), a(i | bit));
}

// R(theta) = diag(1, e^{i theta}); Z = R(pi).
template <typename Real>
void apply_phase(StateVector<Real>& sv, int q, Real theta) {
  sv.check_qubit(q);
  auto& a = sv.amplitudes();
  const Eigen::Index bit = Eigen::Index{1} << q;
  const std::complex<Real> ph = std::polar(Real(1), theta);
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (i & bit) a(i) *= ph;
}

template <typename Real>
void apply_z(StateVector<Real>& sv, int q) {
  sv.check_qubit(q);
  auto& a = sv.amplitudes();
  const Eigen::Index bit = Eigen::Index{1} << q;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (i & bit) a(i) = -a(i);
}

template <typename Real>
void apply_cz(StateVector<Real>& sv, int q1, int q2) {
  sv.check_qubit(q1);
  sv.check_qubit(q2);
  if (q1 == q2) throw std::invalid_argument("apply_cz: identical qubits");
  auto& a = sv.amplitudes();
  const Eigen::Index m = (Eigen::Index{1} << q1) | (Eigen::Index{1} << q2);
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if ((i & m) == m) a(i) = -a(i);
}

enum class Gate { H, X, Z, CZ, R };

template <typename Real>
void apply_gate(StateVector<Real>& sv, Gate gate, const std::vector<int>& qubits, Real theta = Real(0)) {
  const std::size_t want = gate == Gate::CZ ? 2 : 1;
  if (qubits.size() != want) throw std::invalid_argument("apply_gate: wrong qubit count");
  switch (gate) {
    case Gate::H: apply_h(sv, qubits[0]); break;
    case Gate::X: apply_x(sv, qubits[0]); break;
    case Gate::Z: apply_z(sv, qubits[0]); break;
    case Gate::CZ: apply_cz(sv, qubits[0], qubits[1]); break;
    case Gate::R: apply_phase(sv, qubits[0], theta); break;
  }
}

using BitOracle = std::function<u64(u64)>;

// U_f |x>|y> = |x>|y xor f(x)>; bit i of x is the qubit controls[i], likewise for targets.
template <typename Real>
void apply_function_unitary(StateVector<Real>& sv, const BitOracle& oracle, const std::vector<int>& controls,
                            const std::vector<int>& targets) {
  for (int q : controls) sv.check_qubit(q);
  for (int q : targets) sv.check_qubit(q);
  const u64 out_limit = targets.size() >= 64 ? ~u64{0} : (u64{1} << targets.size());
  const auto& a = sv.amplitudes();
  typename StateVector<Real>::Amplitudes out = StateVector<Real>::Amplitudes::Zero(a.size());
  std::vector<u64> cache(std::size_t{1} << controls.size(), ~u64{0});
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    u64 x = 0;
    for (std::size_t k = 0; k < controls.size(); ++k) x |= static_cast<u64>((i >> controls[k]) & 1) << k;
    u64& fx = cache[x];
    if (fx == ~u64{0}) {
      fx = oracle(x);
      if (targets.size() < 64 && fx >= out_limit) throw std::invalid_argument("apply_function_unitary: oracle width mismatch");
    }
    Eigen::Index j = i;
    for (std::size_t k = 0; k < targets.size(); ++k)
      if ((fx >> k) & 1u) j ^= Eigen::Index{1} << targets[k];
    out(j) += a(i);
  }
  sv.amplitudes() = out;
}

struct MeasBasis {
  enum class Kind { computational, xy_plane };
  Kind kind = Kind::computational;
  double theta = 0.0;

  static MeasBasis computational() { return {}; }
  static MeasBasis xy(double theta) {
    double t = std::fmod(theta, 2 * kPi);
    if (t < 0) t += 2 * kPi;
    return {Kind::xy_plane, t};
  }
};

// xy_plane(theta) becomes computational after R(-theta) then H; outcome 0 is |+_theta>.
template <typename Real>
void rotate_to_computational(StateVector<Real>& sv, const std::vector<int>& qubits, const MeasBasis& basis) {
  if (basis.kind == MeasBasis::Kind::computational) return;
  for (int q : qubits) {
    apply_phase(sv, q, static_cast<Real>(-basis.theta));
    apply_h(sv, q);
  }
}

// Outcome index: qubits[0] is the most significant bit (lexicographic order on the outcome tuple).
template <typename Real>
Eigen::VectorXd outcome_probabilities(const StateVector<Real>& sv, const std::vector<int>& qubits) {
  const std::size_t k = qubits.size();
  Eigen::VectorXd p = Eigen::VectorXd::Zero(Eigen::Index{1} << k);
  const auto& a = sv.amplitudes();
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    Eigen::Index o = 0;
    for (std::size_t j = 0; j < k; ++j) o = (o << 1) | ((i >> qubits[j]) & 1);
    p(o) += static_cast<double>(std::norm(a(i)));
  }
  return p;
}

// Post-selects the (already rotated) qubits on `outcome`; returns the branch probability.
template <typename Real>
double collapse(StateVector<Real>& sv, const std::vector<int>& qubits, const Bits& outcome) {
  if (outcome.size() != qubits.size()) throw std::invalid_argument("collapse: outcome width mismatch");
  auto& a = sv.amplitudes();
  Eigen::Index mask = 0, want = 0;
  for (std::size_t j = 0; j < qubits.size(); ++j) {
    sv.check_qubit(qubits[j]);
    mask |= Eigen::Index{1} << qubits[j];
    if (outcome[j]) want |= Eigen::Index{1} << qubits[j];
  }
  double prob = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if ((i & mask) != want)
      a(i) = 0;
    else
      prob += static_cast<double>(std::norm(a(i)));
  }
  if (prob > 0) a /= static_cast<Real>(std::sqrt(prob));
  return prob;
}

template <typename Real>
double project(StateVector<Real>& sv, const std::vector<int>& qubits, const MeasBasis& basis, const Bits& outcome) {
  rotate_to_computational(sv, qubits, basis);
  return collapse(sv, qubits, outcome);
}

struct MeasureResult {
  Bits outcome;
  double probability = 0.0;
};

template <typename Real>
MeasureResult measure(StateVector<Real>& sv, const std::vector<int>& qubits, const MeasBasis& basis, Rng& rng) {
  for (std::size_t i = 0; i < qubits.size(); ++i)
    for (std::size_t j = i + 1; j < qubits.size(); ++j)
      if (qubits[i] == qubits[j]) throw std::invalid_argument("measure: qubits not disjoint");
  rotate_to_computational(sv, qubits, basis);
  const Eigen::VectorXd p = outcome_probabilities(sv, qubits);
  const double u = uniform01(rng) * p.sum();
  Eigen::Index pick = -1;
  double acc = 0.0;
  for (Eigen::Index o = 0; o < p.size(); ++o) {
    if (p(o) <= 0) continue;
    acc += p(o);
    pick = o;
    if (u < acc) break;
  }
  MeasureResult r;
  r.outcome.resize(qubits.size());
  for (std::size_t j = 0; j < qubits.size(); ++j)
    r.outcome[j] = static_cast<std::uint8_t>((pick >> (qubits.size() - 1 - j)) & 1);
  r.probability = p(pick);
  collapse(sv, qubits, r.outcome);
  return r;
}

// State of qubit q when every other qubit sits in a computational basis state.
template <typename Real>
Qubit extract_qubit(const StateVector<Real>& sv, int q) {
  sv.check_qubit(q);
  const auto& a = sv.amplitudes();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < a.size(); ++i)
    if (std::norm(a(i)) > std::norm(a(best))) best = i;
  const Eigen::Index bit = Eigen::Index{1} << q;
  const Eigen::Index base = best & ~bit;
  Qubit v(static_cast<cplx>(a(base)), static_cast<cplx>(a(base | bit)));
  const double total = static_cast<double>(sv.norm_squared());
  if (std::abs(v.squaredNorm() - total) > 1e-9 * std::max(1.0, total))
    throw std::logic_error("extract_qubit: qubit is entangled with the rest of the register");
  return v.normalized();
}

// Debug dump: JSON array of [re, im] pairs, qubit 0 fastest.
template <typename Real>
std::string dump_json(const StateVector<Real>& sv) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (Eigen::Index i = 0; i < sv.dim(); ++i) {
    if (i) os << ',';
    os << '[' << static_cast<double>(sv.amplitudes()(i).real()) << ',' << static_cast<double>(sv.amplitudes()(i).imag()) << ']';
  }
  os << ']';
  return os.str();
}

// Single-qubit pure state kept with an optional index label; global phase is ignored in comparisons.
class QubitDescription {
 public:
  enum class Kind { bb84, rotated, eight, raw };

  // H^{B1} X^{B2} |0>
  static QubitDescription bb84(int B1, int B2);
  // R(pi/2)^{B1} Z^{B2} |+>; also the output frame of the XOR gadget.
  static QubitDescription rotated(int B1, int B2);
  // |+_{L pi/4}>
  static QubitDescription eight(int L);
  static QubitDescription raw(const Qubit& v);

  Kind kind() const { return kind_; }
  int bit1() const { return b1_; }
  int bit2() const { return b2_; }
  int index() const { return idx_; }
  const Qubit& vector() const { return v_; }

 private:
  Kind kind_ = Kind::raw;
  int b1_ = 0, b2_ = 0, idx_ = 0;
  Qubit v_ = Qubit(1, 0);
};

Qubit ket0();
Qubit ket1();
Qubit plus_state(double theta);

double fidelity(const Qubit& a, const Qubit& b);
double fidelity(const QubitDescription& a, const QubitDescription& b);

// Closed-form identification within a state family, up to global phase.
std::optional<std::pair<int, int>> as_bb84(const Qubit& v, double tol = kTol);
std::optional<std::pair<int, int>> as_rotated(const Qubit& v, double tol = kTol);
std::optional<int> as_eight(const Qubit& v, double tol = kTol);

// Honest server's state after the image measurement: (|x>|h(x)> + |x'>|h(x')>)/sqrt 2.
struct TwoBranchState {
  Bits x;
  Bits x_prime;
  int hx = 0;
  int hx_prime = 0;
};

// Target qubit after measuring the x register in the xy-plane basis at angle theta with outcome b.
// Supports theta in {0, pi/2}; nullopt if the outcome has zero amplitude.
std::optional<QubitDescription> analytic_stage2(const TwoBranchState& st, const Bits& b, double theta);

}  // namespace qf
