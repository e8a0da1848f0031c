#include "qfactory/abort.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace qf {

namespace {

Rational reduced(i64 num, i64 den) {
  if (den == 0) throw std::invalid_argument("Rational: zero denominator");
  if (den < 0) num = -num, den = -den;
  const i64 g = std::gcd(num < 0 ? -num : num, den);
  return {num / (g ? g : 1), den / (g ? g : 1)};
}

}  // namespace

Rational Rational::parse(const std::string& s) {
  auto to_i64 = [&](const std::string& t) {
    std::size_t used = 0;
    const long long v = std::stoll(t, &used);
    if (used != t.size()) throw std::invalid_argument("Rational: cannot parse '" + s + "'");
    return static_cast<i64>(v);
  };
  if (s.empty()) throw std::invalid_argument("Rational: empty string");
  if (auto slash = s.find('/'); slash != std::string::npos) return reduced(to_i64(s.substr(0, slash)), to_i64(s.substr(slash + 1)));
  if (auto dot = s.find('.'); dot != std::string::npos) {
    const std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
    if (frac.empty() || frac.size() > 15 || frac.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("Rational: cannot parse '" + s + "'");
    i64 den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const bool neg = !whole.empty() && whole[0] == '-';
    const i64 w = (whole.empty() || whole == "-") ? 0 : to_i64(whole);
    const i64 f = to_i64(frac);
    return reduced(w * den + (neg ? -f : f), den);
  }
  return {to_i64(s), 1};
}

std::string Rational::str() const { return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den); }

void validate(const ChunkConfig& cfg) {
  if (cfg.t_c < 1 || cfg.n_c < 1) throw std::invalid_argument("ChunkConfig: t_c and n_c must be positive");
  if (cfg.p_a.den <= 0 || cfg.p_c.den <= 0) throw std::invalid_argument("ChunkConfig: bad denominator");
  // 1/2 < p_c < p_a <= 1, cross-multiplied.
  if (!(2 * cfg.p_c.num > cfg.p_c.den)) throw std::invalid_argument("ChunkConfig: need p_c > 1/2");
  if (!(cfg.p_c.num * cfg.p_a.den < cfg.p_a.num * cfg.p_c.den)) throw std::invalid_argument("ChunkConfig: need p_c < p_a");
  if (cfg.p_a.num > cfg.p_a.den) throw std::invalid_argument("ChunkConfig: need p_a <= 1");
}

bool chunk_passes(i64 accepted, int t_c, const Rational& p_c) { return accepted * p_c.den >= p_c.num * t_c; }

std::pair<int, int> xor_indices(const std::vector<std::pair<int, int>>& bb84, const SBits& s) {
  if (bb84.size() != s.size()) throw std::invalid_argument("xor_indices: size mismatch");
  int B1 = 0, B2 = 0, count = 0;
  for (std::size_t i = 0; i < bb84.size(); ++i) {
    const int b1 = bb84[i].first & 1, b2 = bb84[i].second & 1;
    B1 ^= b1;
    B2 ^= b2 ^ (b1 & (s[i].first ^ s[i].second));
    count += b1;
  }
  // Each basis-1 input adds a quarter turn; the carries of that sum land in the value bit.
  B2 ^= (count >> 1) & 1;
  return {B1, B2};
}

namespace {

void check_inputs(const std::vector<Qubit>& inputs, bool strict) {
  if (inputs.empty()) throw std::invalid_argument("gad_xor: no inputs");
  if (!strict) return;
  for (const auto& v : inputs)
    if (!as_bb84(v)) throw std::invalid_argument("gad_xor: input outside the BB84 set");
}

State xor_step(const Qubit& in, const Qubit& w) {
  State sv = product_state<double>({plus_state(kPi / 2), in.normalized(), w});
  apply_cz(sv, 0, 1);
  apply_cz(sv, 1, 2);
  return sv;
}

Bits sbits(int a, int b) { return Bits{static_cast<std::uint8_t>(a & 1), static_cast<std::uint8_t>(b & 1)}; }

}  // namespace

XorResult gad_xor(const std::vector<Qubit>& inputs, Rng& rng, bool strict) {
  check_inputs(inputs, strict);
  XorResult r;
  Qubit w = plus_state(0.0);
  for (const auto& in : inputs) {
    State sv = xor_step(in, w);
    auto m = measure(sv, {0, 1}, MeasBasis::xy(0.0), rng);
    r.s.emplace_back(m.outcome[0], m.outcome[1]);
    r.probability *= m.probability;
    w = extract_qubit(sv, 2);
  }
  r.out = QubitDescription::raw(w);
  return r;
}

XorBranch gad_xor_branch(const std::vector<Qubit>& inputs, const SBits& s) {
  if (inputs.size() != s.size()) throw std::invalid_argument("gad_xor_branch: size mismatch");
  check_inputs(inputs, false);
  XorBranch br;
  br.probability = 1.0;
  Qubit w = plus_state(0.0);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    State sv = xor_step(inputs[i], w);
    br.probability *= project(sv, {0, 1}, MeasBasis::xy(0.0), sbits(s[i].first, s[i].second));
    if (br.probability < 1e-14) return {0.0, std::nullopt};
    w = extract_qubit(sv, 2);
  }
  br.out = w;
  return br;
}

XorBranch gad_xor_branch_full(const std::vector<Qubit>& inputs, const SBits& s) {
  if (inputs.size() != s.size()) throw std::invalid_argument("gad_xor_branch_full: size mismatch");
  check_inputs(inputs, false);
  const int t = static_cast<int>(inputs.size());
  if (2 * t + 1 > kDefaultQubitCap) throw std::length_error("gad_xor_branch_full: too many inputs");
  std::vector<Qubit> qubits;
  for (const auto& in : inputs) {
    qubits.push_back(plus_state(kPi / 2));
    qubits.push_back(in.normalized());
  }
  qubits.push_back(plus_state(0.0));
  State sv = product_state<double>(qubits);
  const int w = 2 * t;
  for (int i = 0; i < t; ++i) apply_cz(sv, 2 * i, 2 * i + 1);
  for (int i = 0; i < t; ++i) apply_cz(sv, 2 * i + 1, w);
  std::vector<int> measured;
  Bits outcome;
  for (int i = 0; i < t; ++i) {
    measured.push_back(2 * i);
    measured.push_back(2 * i + 1);
    outcome.push_back(static_cast<std::uint8_t>(s[static_cast<std::size_t>(i)].first & 1));
    outcome.push_back(static_cast<std::uint8_t>(s[static_cast<std::size_t>(i)].second & 1));
  }
  XorBranch br;
  br.probability = project(sv, measured, MeasBasis::xy(0.0), outcome);
  if (br.probability < 1e-14) return {0.0, std::nullopt};
  br.out = extract_qubit(sv, w);
  return br;
}

CombineResult client_combine(const std::vector<RunRecord>& records, const ChunkConfig& cfg, const SBits& s, Rng& rng) {
  validate(cfg);
  if (static_cast<int>(records.size()) != cfg.total()) throw std::invalid_argument("client_combine: record count does not match config");
  if (s.size() != records.size()) throw std::invalid_argument("client_combine: s-bit count does not match records");
  CombineResult r;
  r.accepted = true;
  for (int c = 0; c < cfg.n_c; ++c) {
    i64 acc = 0;
    for (int j = 0; j < cfg.t_c; ++j) acc += records[static_cast<std::size_t>(c * cfg.t_c + j)].a & 1;
    r.chunk_accepts.push_back(acc);
    if (!chunk_passes(acc, cfg.t_c, cfg.p_c)) r.accepted = false;
  }
  if (!r.accepted) {
    r.B1 = coin(rng);
    r.B2 = coin(rng);
    return r;
  }
  std::vector<std::pair<int, int>> idx;
  idx.reserve(records.size());
  for (const auto& rec : records) idx.emplace_back(rec.B1, rec.B2);
  std::tie(r.B1, r.B2) = xor_indices(idx, s);
  return r;
}

int beta(const std::vector<KeyedImage>& runs, const Rational& p_c, Rng& rng) {
  if (runs.empty()) throw std::invalid_argument("beta: no runs");
  i64 accepted = 0;
  int bit = 0;
  for (const auto& run : runs) {
    if (!run.pk || !run.td) throw std::invalid_argument("beta: missing key");
    const int a = invert(*run.td, *run.pk, run.y).size() == 2;
    accepted += a;
    bit ^= a & run.td->d0;
  }
  if (!chunk_passes(accepted, static_cast<int>(runs.size()), p_c)) return coin(rng);
  return bit;
}

double chernoff_success_bound(double p_a, double p_b, int t_c) {
  if (t_c < 0) throw std::invalid_argument("chernoff_success_bound: t_c >= 0");
  const double d = p_a - p_b;
  return std::max(0.0, 1.0 - std::exp(-2.0 * d * d * t_c));
}

double eta_bound(double p_c) {
  if (!(p_c > 0.5 && p_c <= 1.0)) throw std::invalid_argument("eta_bound: need 1/2 < p_c <= 1");
  return 0.5 * (1.0 + 1.0 / (2.0 * p_c));
}

ChunkConfig choose_params(const Rational& p_a, int n, double target_fail) {
  if (!(2 * p_a.num > p_a.den) || p_a.num > p_a.den) throw std::invalid_argument("choose_params: need 1/2 < p_a <= 1");
  if (n < 1) throw std::invalid_argument("choose_params: n >= 1");
  if (!(target_fail > 0 && target_fail < 1)) throw std::invalid_argument("choose_params: target_fail in (0,1)");
  ChunkConfig cfg;
  cfg.p_a = p_a;
  cfg.p_c = reduced(p_a.den + 2 * p_a.num, 4 * p_a.den);
  cfg.n_c = n;
  const double gap = p_a.value() - cfg.p_c.value();
  const double need = std::log(static_cast<double>(cfg.n_c) / target_fail) / (2.0 * gap * gap);
  cfg.t_c = std::max(1, static_cast<int>(std::ceil(need - 1e-9)));
  validate(cfg);
  return cfg;
}

ChunkSimulation simulate_chunks(const ParamSet& p, int t_c, const Rational& p_c, i64 chunks, u64 seed, int threads) {
  if (t_c < 1 || chunks < 1) throw std::invalid_argument("simulate_chunks: sizes must be positive");
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<i64> chunk_ok(static_cast<std::size_t>(chunks)), chunk_runs(static_cast<std::size_t>(chunks));
  auto work = [&](int tid) {
    for (i64 c = tid; c < chunks; c += threads) {
      i64 acc = 0;
      for (int j = 0; j < t_c; ++j) {
        const u64 idx = static_cast<u64>(c) * static_cast<u64>(t_c) + static_cast<u64>(j);
        KeyPair kp = gen(p, derive_seed(seed, "chunk-key", idx));
        Rng rng = make_rng(seed, "chunk-x", idx);
        const DomainElement x = random_element(p, rng, true);
        acc += invert(kp.td, kp.pk, f(kp.pk, x)).size() == 2;
      }
      chunk_runs[static_cast<std::size_t>(c)] = acc;
      chunk_ok[static_cast<std::size_t>(c)] = chunk_passes(acc, t_c, p_c);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(work, t);
  work(0);
  for (auto& th : pool) th.join();
  ChunkSimulation r;
  r.chunks = chunks;
  r.accept_rate = wilson(std::accumulate(chunk_ok.begin(), chunk_ok.end(), i64{0}), chunks);
  r.run_rate = wilson(std::accumulate(chunk_runs.begin(), chunk_runs.end(), i64{0}), chunks * t_c);
  return r;
}

AbortResult run_abort(const ParamSet& p, const ChunkConfig& cfg, u64 client_seed, u64 server_seed, Backend backend) {
  validate(cfg);
  AbortResult r;
  r.config = cfg;
  Rng srng = make_rng(server_seed, "server");
  Rng fill = make_rng(client_seed, "client-fill");
  std::vector<Qubit> held;
  for (int i = 0; i < cfg.total(); ++i) {
    auto [client, key] = client_init(p, Variant::plain, derive_seed(client_seed, "run", static_cast<u64>(i)));
    PreimageOracle oracle = [&client](const ZqVector& y) { return invert(client.td, client.pk, y); };
    ServerOutput so = server_honest(key, backend, srng, oracle);
    OutputIndex4 idx = finalize_always(client, so.msg.y, so.msg.b, fill);
    r.records.push_back({idx.accepted == Acceptance::two_preimages ? 1 : 0, idx.B1, idx.B2, so.qubit});
    held.push_back(so.qubit->vector());
  }
  XorResult x = gad_xor(held, srng);
  r.s = x.s;
  r.out = x.out;
  Rng crng = make_rng(client_seed, "combine");
  r.combined = client_combine(r.records, cfg, r.s, crng);
  return r;
}

}  // namespace qf
