#include "qfactory/experiments.hpp"

#include "qfactory/circuits.hpp"

#include <cmath>
#include <stdexcept>

namespace qf {

BranchTable statevector_branches(const PublicKey& pk, Variant v) {
  const ParamSet& p = pk.params;
  const ServerCircuit circ(p);
  const State stage1 = circ.stage1_state(pk);
  const int N = p.total_bits(), M = p.image_bits();
  const Eigen::Index tbit = Eigen::Index{1} << circ.target;
  BranchTable table;
  for (u64 y = 0; y < (u64{1} << M); ++y) {
    State sv = stage1;
    const double py = collapse(sv, circ.image, unpack_bits(y, M));
    if (py < 1e-14) continue;
    circ.apply_predicate(sv);
    rotate_to_computational(sv, circ.domain, MeasBasis::xy(0.0));
    const auto& a = sv.amplitudes();
    for (u64 b = 0; b < (u64{1} << N); ++b) {
      const auto base = static_cast<Eigen::Index>(b | (y << N));
      const Qubit q(a(base), a(base | tbit));
      const double pb = q.squaredNorm();
      if (pb < 1e-14) continue;
      Qubit out = q / std::sqrt(pb);
      if (v == Variant::rotated) out = apply_rotation_clifford(out);
      table[{y, b}] = {py * pb, out};
    }
  }
  return table;
}

BranchTable two_branch_branches(const PublicKey& pk, Variant v) {
  const ParamSet& p = pk.params;
  const int N = p.total_bits();
  const auto domain = enumerate_domain(p);
  std::map<u64, std::vector<DomainElement>> images;
  for (const auto& x : domain) images[pack_bits(encode_image(p, f(pk, x)))].push_back(x);
  const double valid = static_cast<double>(domain.size());
  const double per_b = std::ldexp(1.0, -N);
  BranchTable table;
  for (const auto& [y, pre] : images) {
    const double py = static_cast<double>(pre.size()) / valid;
    for (u64 bp = 0; bp < (u64{1} << N); ++bp) {
      const Bits b = unpack_bits(bp, N);
      Branch br;
      if (pre.size() == 1) {
        br = {py * per_b, h(pre[0]) ? ket1() : ket0()};
      } else if (pre.size() == 2) {
        const DomainElement& x0 = pre[0].c == 0 ? pre[0] : pre[1];
        const DomainElement& x1 = pre[0].c == 0 ? pre[1] : pre[0];
        const TwoBranchState st{encode(p, x0), encode(p, x1), h(x0), h(x1)};
        if (st.hx == st.hx_prime) {
          int par = 0;
          for (int i = 0; i < N; ++i) par ^= b[static_cast<std::size_t>(i)] & (st.x[static_cast<std::size_t>(i)] ^ st.x_prime[static_cast<std::size_t>(i)]);
          if (par) continue;
          br = {2 * py * per_b, st.hx ? ket1() : ket0()};
        } else {
          auto q = analytic_stage2(st, b, 0.0);
          if (!q) continue;
          br = {py * per_b, q->vector()};
        }
      } else {
        throw std::logic_error("two_branch_branches: image with more than two preimages");
      }
      if (v == Variant::rotated) br.out = apply_rotation_clifford(br.out);
      table[{y, bp}] = br;
    }
  }
  return table;
}

double branch_tv(const BranchTable& a, const BranchTable& b, double tol) {
  double tv = 0.0;
  for (const auto& [k, ba] : a) {
    auto it = b.find(k);
    if (it == b.end())
      tv += ba.probability;
    else if (fidelity(ba.out, it->second.out) < 1.0 - tol)
      tv += ba.probability + it->second.probability;
    else
      tv += std::abs(ba.probability - it->second.probability);
  }
  for (const auto& [k, bb] : b)
    if (!a.count(k)) tv += bb.probability;
  return tv / 2;
}

CorrectnessReport check_correctness(const ClientState4& client, const BranchTable& branches, double tol) {
  const ParamSet& p = client.pk.params;
  CorrectnessReport r;
  for (const auto& [key, br] : branches) {
    ++r.branches;
    OutputIndex4 out;
    try {
      out = finalize(client, decode_image(p, unpack_bits(key.first, p.image_bits())), unpack_bits(key.second, p.total_bits()));
    } catch (const std::logic_error&) {
      ++r.mismatches;
      r.min_fidelity = 0.0;
      continue;
    }
    if (out.accepted == Acceptance::no_preimage) {
      ++r.mismatches;
      r.min_fidelity = 0.0;
      continue;
    }
    if (out.accepted == Acceptance::two_preimages) ++r.two_preimage;
    const double fid = fidelity(described_state(client.variant, out).vector(), br.out);
    r.min_fidelity = std::min(r.min_fidelity, fid);
    if (fid < 1.0 - tol) ++r.mismatches;
  }
  return r;
}

Eigen::VectorXd sample_index_histogram(const KeyPair& kp, Variant v, Backend backend, i64 samples, u64 seed) {
  const KeyMessage key{kp.pk, v, "d-bit"};
  const ClientState4 client{kp.pk, kp.td, v, 0};
  PreimageOracle oracle = [&kp](const ZqVector& y) { return invert(kp.td, kp.pk, y); };
  Rng rng = make_rng(seed, "histogram");
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(12);
  for (i64 i = 0; i < samples; ++i) {
    const ServerOutput so = server_honest(key, backend, rng, oracle);
    const OutputIndex4 out = finalize(client, so.msg.y, so.msg.b);
    counts(4 * static_cast<int>(out.accepted) + 2 * out.B1 + out.B2) += 1;
  }
  return counts;
}

json OracleCheck::to_json() const {
  return {{"params", params_to_json(params)},
          {"keys", keys},
          {"invert", {{"images_checked", images_checked}, {"mismatches", invert_mismatches}}},
          {"backend_tv", {{"exact_max", max_exact_tv}, {"sampled_max", max_sampled_tv}, {"samples_per_key", samples_per_key}}},
          {"formulas", {{"cases", formula_cases}, {"mismatches", formula_mismatches}}},
          {"corrupted_trapdoor", {{"cases", corrupted_cases}, {"mismatches", corrupted_mismatches}}},
          {"ok", invert_mismatches == 0 && formula_mismatches == 0 && corrupted_mismatches > 0}};
}

OracleCheck oracle_check(const ParamSet& p, int keys, i64 samples, u64 seed) {
  validate(p);
  if (p.profile != Profile::toy) throw std::invalid_argument("oracle_check: toy profile required");
  if (keys < 1) throw std::invalid_argument("oracle_check: keys >= 1");
  OracleCheck r;
  r.params = p;
  r.keys = keys;
  r.samples_per_key = samples;
  const int M = p.image_bits();
  for (int k = 0; k < keys; ++k) {
    const KeyPair kp = gen(p, derive_seed(seed, "oracle-key", static_cast<u64>(k)));

    std::map<u64, std::vector<DomainElement>> images;
    for (const auto& x : enumerate_domain(p)) images[pack_bits(encode_image(p, f(kp.pk, x)))].push_back(x);
    for (u64 y = 0; y < (u64{1} << M); ++y) {
      ++r.images_checked;
      auto it = images.find(y);
      const std::vector<DomainElement> expected = it == images.end() ? std::vector<DomainElement>{} : it->second;
      if (invert(kp.td, kp.pk, decode_image(p, unpack_bits(y, M))) != expected) ++r.invert_mismatches;
    }

    for (Variant v : {Variant::plain, Variant::rotated}) {
      const BranchTable sv = statevector_branches(kp.pk, v);
      r.max_exact_tv = std::max(r.max_exact_tv, branch_tv(sv, two_branch_branches(kp.pk, v)));
      const CorrectnessReport c = check_correctness({kp.pk, kp.td, v, 0}, sv);
      r.formula_cases += c.branches;
      r.formula_mismatches += c.mismatches;
      if (v == Variant::plain) {
        Trapdoor bad = kp.td;
        bad.gadget.U_inv(0, 0) = (bad.gadget.U_inv(0, 0) + 1) & p.mask();
        const CorrectnessReport cb = check_correctness({kp.pk, bad, v, 0}, sv);
        r.corrupted_cases += cb.branches;
        r.corrupted_mismatches += cb.mismatches;
      }
    }

    if (samples > 0) {
      const u64 hs = derive_seed(seed, "oracle-samples", static_cast<u64>(k));
      r.max_sampled_tv = std::max(r.max_sampled_tv, tv_distance(sample_index_histogram(kp, Variant::plain, Backend::statevector, samples, hs),
                                                                 sample_index_histogram(kp, Variant::plain, Backend::two_branch, samples, hs + 1)));
    }

    Rng rng = make_rng(seed, "oracle-xor", static_cast<u64>(k));
    for (int t = 1; t <= 4; ++t) {
      for (int rep = 0; rep < 8; ++rep) {
        std::vector<std::pair<int, int>> idx;
        std::vector<Qubit> inputs;
        SBits s;
        for (int i = 0; i < t; ++i) {
          idx.emplace_back(coin(rng), coin(rng));
          inputs.push_back(QubitDescription::bb84(idx.back().first, idx.back().second).vector());
          s.emplace_back(coin(rng), coin(rng));
        }
        const XorBranch br = gad_xor_branch_full(inputs, s);
        if (!br.out) continue;
        ++r.formula_cases;
        auto [B1, B2] = xor_indices(idx, s);
        if (fidelity(*br.out, QubitDescription::rotated(B1, B2).vector()) < 1.0 - kTol) ++r.formula_mismatches;
      }
    }
  }
  return r;
}

std::vector<RobustnessPoint> robustness_curve(const std::vector<double>& angles, i64 N, double eps2, int trials, u64 seed) {
  if (trials < 1) throw std::invalid_argument("robustness_curve: trials >= 1");
  std::vector<RobustnessPoint> out;
  for (double a : angles) {
    const Strategy s = shifted_strategy(a);
    i64 accepts = 0;
    for (int t = 0; t < trials; ++t)
      accepts += selftest_iid(s, N, 1.0, eps2, derive_seed(seed, "robustness", static_cast<u64>(t))).check.accepted;
    RobustnessPoint pt;
    pt.angle = a;
    pt.accept = wilson(accepts, trials);
    pt.min_fidelity = isometry_result(s).min_fidelity();
    pt.blindness_distance = blindness_check(s, 0.0).max_distance;
    out.push_back(pt);
  }
  return out;
}

json to_json(const Estimate& e) {
  return {{"value", e.value}, {"successes", e.successes}, {"n", e.trials}, {"sigma", e.sigma}, {"ci95", {e.lo, e.hi}}};
}

json to_json(const CheckResult& c) {
  json cells = json::array();
  for (int L = 0; L < 8; ++L)
    for (int M = 0; M < 8; ++M) {
      const Cell& cell = c.table.at(L, M);
      if (!cell.count) continue;
      cells.push_back({{"L", L}, {"M", M}, {"count", cell.count}, {"successes", cell.successes}, {"p_hat", cell.p_hat()},
                       {"ideal", ideal_prob(L, M)}});
    }
  return {{"accepted", c.accepted},         {"n", c.table.total()},  {"max_deviation", c.max_deviation},
          {"worst", {c.worst_L, c.worst_M}}, {"skipped_cells", c.skipped_cells}, {"cells", cells}};
}

json to_json(const IsometryResult& r) {
  return {{"fidelity", r.fidelity}, {"norm", r.norm}, {"min_fidelity", r.min_fidelity()}, {"junk_independence", r.max_junk_distance}};
}

}  // namespace qf
