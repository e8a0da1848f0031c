#include "qfactory/selftest.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qf {

double ideal_prob(int L, int M) {
  const double c = std::cos((L - M) * kPi / 8);
  return c * c;
}

TestPlan plan_tests(i64 N, double f, u64 seed) {
  if (N < 1) throw std::invalid_argument("plan_tests: N >= 1");
  if (!(f > 0 && f < 1)) throw std::invalid_argument("plan_tests: f must lie in (0, 1)");
  const i64 k = std::min<i64>(N, static_cast<i64>(std::ceil(f * static_cast<double>(N) - 1e-9)));
  Rng rng = make_rng(seed, "plan");
  std::vector<i64> idx(static_cast<std::size_t>(N));
  std::iota(idx.begin(), idx.end(), i64{0});
  for (i64 i = 0; i < k; ++i) {
    const i64 j = i + static_cast<i64>(uniform_below(rng, static_cast<u64>(N - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  TestPlan plan;
  plan.N = N;
  plan.f = f;
  plan.T.assign(idx.begin(), idx.begin() + k);
  std::sort(plan.T.begin(), plan.T.end());
  plan.M.resize(plan.T.size());
  for (auto& m : plan.M) m = static_cast<int>(uniform_below(rng, 8));
  return plan;
}

i64 StatsTable::total() const {
  i64 t = 0;
  for (const auto& c : cells) t += c.count;
  return t;
}

CheckResult collect_and_check(const TestPlan& plan, const std::vector<int>& L_indices, const std::vector<int>& outcomes,
                              double eps2, i64 min_count) {
  if (static_cast<i64>(L_indices.size()) != plan.N) throw std::invalid_argument("collect_and_check: need one L per run");
  if (outcomes.size() != plan.T.size() || plan.M.size() != plan.T.size())
    throw std::invalid_argument("collect_and_check: need one outcome per tested run");
  CheckResult r;
  for (std::size_t k = 0; k < plan.T.size(); ++k) {
    const i64 t = plan.T[k];
    if (t < 0 || t >= plan.N) throw std::invalid_argument("collect_and_check: test index out of range");
    const int L = L_indices[static_cast<std::size_t>(t)], M = plan.M[k];
    if (L < 0 || L > 7 || M < 0 || M > 7 || (outcomes[k] & ~1)) throw std::invalid_argument("collect_and_check: value out of range");
    Cell& c = r.table.at(L, M);
    ++c.count;
    c.successes += outcomes[k] == 0;
  }
  for (int L = 0; L < 8; ++L)
    for (int M = 0; M < 8; ++M) {
      const Cell& c = r.table.at(L, M);
      if (c.count < min_count) {
        ++r.skipped_cells;
        continue;
      }
      const double dev = std::abs(c.p_hat() - ideal_prob(L, M));
      if (dev > r.max_deviation || r.worst_L < 0) r.max_deviation = dev, r.worst_L = L, r.worst_M = M;
      if (dev >= eps2) r.accepted = false;
    }
  return r;
}

double hoeffding_abort_bound(const StatsTable& table, double eps2, i64 min_count) {
  double b = 0.0;
  for (const auto& c : table.cells)
    if (c.count >= min_count) b += 2.0 * std::exp(-2.0 * static_cast<double>(c.count) * eps2 * eps2);
  return std::min(1.0, b);
}

void validate(const Strategy& s) {
  if (s.dim < 1) throw std::invalid_argument("Strategy: dim >= 1");
  for (int L = 0; L < 8; ++L) {
    const auto& v = s.states[static_cast<std::size_t>(L)];
    const auto& O = s.observables[static_cast<std::size_t>(L)];
    if (v.size() != s.dim || O.rows() != s.dim || O.cols() != s.dim) throw std::invalid_argument("Strategy: dimension mismatch");
    if (std::abs(v.squaredNorm() - 1.0) > 1e-9) throw std::invalid_argument("Strategy: state not normalized");
    if ((O - O.adjoint()).norm() > 1e-9) throw std::invalid_argument("Strategy: observable not Hermitian");
    if ((O * O - CMatrix::Identity(s.dim, s.dim)).norm() > 1e-9) throw std::invalid_argument("Strategy: observable not involutory");
  }
}

Eigen::Matrix2cd xy_observable(double angle) {
  Eigen::Matrix2cd O;
  O << 0, std::polar(1.0, -angle), std::polar(1.0, angle), 0;
  return O;
}

namespace {

CVector to_cvector(const Qubit& q) { return CVector(q); }

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return r;
}

CVector kron(const CVector& a, const CVector& b) {
  CVector r(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) r.segment(i * b.size(), b.size()) = a(i) * b;
  return r;
}

CVector basis(int dim, int k) {
  CVector v = CVector::Zero(dim);
  v(k) = 1;
  return v;
}

CMatrix random_unitary(int dim, Rng& rng) {
  CMatrix g(dim, dim);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    // Box-Muller on the portable uniform sampler.
    const double u1 = std::max(uniform01(rng), 1e-300), u2 = uniform01(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    g.data()[i] = cplx(r * std::cos(2 * kPi * u2), r * std::sin(2 * kPi * u2));
  }
  Eigen::HouseholderQR<CMatrix> qr(g);
  return qr.householderQ() * CMatrix::Identity(dim, dim);
}

CMatrix outer(const CVector& v) { return v * v.adjoint(); }

}  // namespace

Strategy honest_strategy() {
  Strategy s;
  s.name = "honest";
  s.dim = 2;
  for (int L = 0; L < 8; ++L) {
    s.states[static_cast<std::size_t>(L)] = to_cvector(plus_state(L * kPi / 4));
    s.observables[static_cast<std::size_t>(L)] = xy_observable(L * kPi / 4);
  }
  return s;
}

Strategy phi_family_strategy(double phi, int dim) {
  if (dim < 2) throw std::invalid_argument("phi_family_strategy: dim >= 2");
  // V|+> = |a>, V|-> = i e^{i phi} |b>, with |a>, |b> the first two basis vectors.
  const CVector a = basis(dim, 0), b = basis(dim, 1);
  const cplx w = cplx(0, 1) * std::polar(1.0, phi);
  const double r = 1.0 / std::sqrt(2.0);
  CMatrix V(dim, 2);
  V.col(0) = r * (a + w * b);
  V.col(1) = r * (a - w * b);
  const CMatrix perp = CMatrix::Identity(dim, dim) - V * V.adjoint();
  Strategy s;
  s.name = "phi-family";
  s.dim = dim;
  for (int L = 0; L < 8; ++L) {
    s.states[static_cast<std::size_t>(L)] = std::cos(L * kPi / 8) * a + std::polar(std::sin(L * kPi / 8), phi) * b;
    s.observables[static_cast<std::size_t>(L)] = V * CMatrix(xy_observable(L * kPi / 4)) * V.adjoint() + perp;
  }
  return s;
}

Strategy conjugated_strategy(int dim, u64 seed, int junk_index) {
  if (dim < 2 || dim % 2) throw std::invalid_argument("conjugated_strategy: dim must be even");
  const int jd = dim / 2;
  if (junk_index < 0 || junk_index >= jd) throw std::invalid_argument("conjugated_strategy: junk index out of range");
  Rng rng = make_rng(seed, "conjugate");
  const CMatrix U = random_unitary(dim, rng);
  const CVector j = basis(jd, junk_index);
  Strategy s;
  s.name = "conjugated";
  s.dim = dim;
  for (int L = 0; L < 8; ++L) {
    s.states[static_cast<std::size_t>(L)] = U * kron(to_cvector(plus_state(L * kPi / 4)), j);
    s.observables[static_cast<std::size_t>(L)] = U * kron(CMatrix(xy_observable(L * kPi / 4)), CMatrix::Identity(jd, jd)) * U.adjoint();
  }
  return s;
}

Strategy shifted_strategy(double angle) {
  Strategy s = honest_strategy();
  s.name = "shifted";
  for (int M = 0; M < 8; ++M) s.observables[static_cast<std::size_t>(M)] = xy_observable(M * kPi / 4 + angle);
  return s;
}

Strategy junk_replaced_strategy(int L_replaced) {
  if (L_replaced < 0 || L_replaced > 7) throw std::invalid_argument("junk_replaced_strategy: L in 0..7");
  Strategy s;
  s.name = "junk-replaced";
  s.dim = 3;
  for (int L = 0; L < 8; ++L) {
    CVector v = CVector::Zero(3);
    v.head(2) = to_cvector(plus_state(L * kPi / 4));
    s.states[static_cast<std::size_t>(L)] = L == L_replaced ? basis(3, 2) : v;
    CMatrix O = CMatrix::Zero(3, 3);
    O.topLeftCorner(2, 2) = xy_observable(L * kPi / 4);
    O(2, 2) = 1;
    s.observables[static_cast<std::size_t>(L)] = O;
  }
  return s;
}

Strategy leaky_strategy() {
  Strategy s;
  s.name = "leaky";
  s.dim = 4;
  for (int L = 0; L < 8; ++L) {
    s.states[static_cast<std::size_t>(L)] = kron(to_cvector(plus_state(L * kPi / 4)), basis(2, L & 1));
    s.observables[static_cast<std::size_t>(L)] = kron(CMatrix(xy_observable(L * kPi / 4)), CMatrix::Identity(2, 2));
  }
  return s;
}

Strategy dependent_junk_strategy(double angle) {
  Strategy s;
  s.name = "dependent-junk";
  s.dim = 4;
  for (int L = 0; L < 8; ++L) {
    CVector j(2);
    j << std::cos(angle * L), std::sin(angle * L);
    s.states[static_cast<std::size_t>(L)] = kron(to_cvector(plus_state(L * kPi / 4)), j);
    s.observables[static_cast<std::size_t>(L)] = kron(CMatrix(xy_observable(L * kPi / 4)), CMatrix::Identity(2, 2));
  }
  return s;
}

double trace_distance(const CMatrix& rho, const CMatrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) throw std::invalid_argument("trace_distance: shape mismatch");
  const CMatrix d = rho - sigma;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

CVector isometry_apply(const Strategy& s, int L) {
  validate(s);
  if (L < 0 || L > 7) throw std::invalid_argument("isometry_apply: L in 0..7");
  const CVector& psi = s.states[static_cast<std::size_t>(L)];
  const CMatrix& X = s.observables[0];
  const CMatrix& Y = s.observables[2];
  const CVector top = 0.5 * (psi + X * psi);
  const CVector bot = cplx(0, -1) * (Y * (0.5 * (psi - X * psi)));
  const double r = 1.0 / std::sqrt(2.0);
  CVector out(2 * s.dim);
  out.head(s.dim) = r * (top + bot);
  out.tail(s.dim) = r * (top - bot);
  return out;
}

double IsometryResult::min_fidelity() const { return *std::min_element(fidelity.begin(), fidelity.end()); }

IsometryResult isometry_result(const Strategy& s) {
  validate(s);
  IsometryResult r;
  const CVector& ref = s.states[0];
  for (int L = 0; L < 8; ++L) {
    const auto l = static_cast<std::size_t>(L);
    const CVector out = isometry_apply(s, L);
    const CVector target = kron(to_cvector(plus_state(L * kPi / 4)), ref);
    r.fidelity[l] = std::norm(target.dot(out));
    r.norm[l] = out.norm();
    r.junk[l] = outer(out.head(s.dim)) + outer(out.tail(s.dim));
  }
  r.max_junk_distance = junk_independence(r);
  return r;
}

double junk_independence(const IsometryResult& r) {
  double worst = 0.0;
  for (int a = 0; a < 8; ++a)
    for (int b = a + 1; b < 8; ++b) {
      const CMatrix& x = r.junk[static_cast<std::size_t>(a)];
      const CMatrix& y = r.junk[static_cast<std::size_t>(b)];
      const double tx = x.trace().real(), ty = y.trace().real();
      if (tx < 1e-12 || ty < 1e-12) return 1.0;
      worst = std::max(worst, trace_distance(x / tx, y / ty));
    }
  return worst;
}

BlindnessResult blindness_check(const Strategy& s, double eps1) {
  validate(s);
  std::array<CMatrix, 8> mix;
  for (int L = 0; L < 8; ++L)
    mix[static_cast<std::size_t>(L)] = 0.5 * (outer(s.states[static_cast<std::size_t>(L)]) + outer(s.states[static_cast<std::size_t>(L ^ 4)]));
  BlindnessResult r;
  for (int a = 0; a < 8; ++a)
    for (int b = a + 1; b < 8; ++b) r.max_distance = std::max(r.max_distance, trace_distance(mix[static_cast<std::size_t>(a)], mix[static_cast<std::size_t>(b)]));
  r.pass = r.max_distance <= eps1;
  return r;
}

int gram_rank(const Strategy& s, double tol) {
  validate(s);
  CMatrix G(8, 8);
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) G(a, b) = s.states[static_cast<std::size_t>(a)].dot(s.states[static_cast<std::size_t>(b)]);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(G, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  return static_cast<int>((es.eigenvalues().array().abs() > tol * std::max(1.0, top)).count());
}

double max_antipodal_overlap(const Strategy& s) {
  double worst = 0.0;
  for (int L = 0; L < 8; ++L)
    worst = std::max(worst, std::abs(s.states[static_cast<std::size_t>(L ^ 4)].dot(s.states[static_cast<std::size_t>(L)])));
  return worst;
}

SelftestResult selftest_iid(const Strategy& s, i64 N, double eps1, double eps2, u64 seed, i64 min_count) {
  validate(s);
  if (N < 1) throw std::invalid_argument("selftest_iid: N >= 1");
  std::array<double, 64> plus{};
  for (int L = 0; L < 8; ++L)
    for (int M = 0; M < 8; ++M) {
      const CVector& v = s.states[static_cast<std::size_t>(L)];
      const CMatrix& O = s.observables[static_cast<std::size_t>(M)];
      plus[static_cast<std::size_t>(8 * L + M)] = std::clamp(0.5 * (1.0 + v.dot(O * v).real()), 0.0, 1.0);
    }
  Rng rng = make_rng(seed, "selftest");
  TestPlan plan;
  plan.N = N;
  plan.f = 1.0;
  plan.T.resize(static_cast<std::size_t>(N));
  std::iota(plan.T.begin(), plan.T.end(), i64{0});
  plan.M.resize(static_cast<std::size_t>(N));
  std::vector<int> Ls(static_cast<std::size_t>(N)), outcomes(static_cast<std::size_t>(N));
  for (std::size_t k = 0; k < static_cast<std::size_t>(N); ++k) {
    Ls[k] = static_cast<int>(uniform_below(rng, 8));
    plan.M[k] = static_cast<int>(uniform_below(rng, 8));
    outcomes[k] = uniform01(rng) < plus[static_cast<std::size_t>(8 * Ls[k] + plan.M[k])] ? 0 : 1;
  }
  SelftestResult r;
  r.check = collect_and_check(plan, Ls, outcomes, eps2, min_count);
  r.blindness = blindness_check(s, eps1);
  r.accepted = r.check.accepted && r.blindness.pass;
  if (r.accepted) r.isometry = isometry_result(s);
  return r;
}

std::vector<int> measure_tests(const std::vector<Qubit>& held, const TestPlan& plan, int shift, Rng& rng) {
  std::vector<int> outcomes(plan.T.size());
  for (std::size_t k = 0; k < plan.T.size(); ++k) {
    const auto t = static_cast<std::size_t>(plan.T[k]);
    if (t >= held.size()) throw std::invalid_argument("measure_tests: test index out of range");
    const double prob = fidelity(held[t], plus_state((plan.M[k] + shift) * kPi / 4));
    outcomes[k] = uniform01(rng) < prob ? 0 : 1;
  }
  return outcomes;
}

VerifiableResult run_verifiable(const ParamSet& p, i64 N, double f, double eps2, Backend backend, u64 client_seed,
                                u64 server_seed, int measurement_shift, i64 min_count) {
  if (N < 1) throw std::invalid_argument("run_verifiable: N >= 1");
  VerifiableResult r;
  r.plan = plan_tests(N, f, client_seed);
  std::vector<int> Ls(static_cast<std::size_t>(N));
  std::vector<Qubit> held(static_cast<std::size_t>(N));
  for (i64 i = 0; i < N; ++i) {
    const auto u = static_cast<u64>(i);
    Result8 run = run_protocol8(p, derive_seed(client_seed, "client", u), derive_seed(server_seed, "run", u), backend);
    Ls[static_cast<std::size_t>(i)] = run.index.L;
    held[static_cast<std::size_t>(i)] = run.qubit->vector();
  }
  Rng srng = make_rng(server_seed, "server-test");
  const std::vector<int> outcomes = measure_tests(held, r.plan, measurement_shift, srng);
  r.check = collect_and_check(r.plan, Ls, outcomes, eps2, min_count);
  r.accepted = r.check.accepted;
  std::vector<char> tested(static_cast<std::size_t>(N), 0);
  for (i64 t : r.plan.T) tested[static_cast<std::size_t>(t)] = 1;
  for (i64 i = 0; i < N; ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (tested[u]) continue;
    r.unmeasured.push_back(i);
    r.unmeasured_L.push_back(Ls[u]);
    r.min_unmeasured_fidelity = std::min(r.min_unmeasured_fidelity, fidelity(held[u], plus_state(Ls[u] * kPi / 4)));
  }
  return r;
}

}  // namespace qf
