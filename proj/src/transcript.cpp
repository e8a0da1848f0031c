#include "qfactory/transcript.hpp"

#include <istream>
#include <map>
#include <ostream>

namespace qf {

namespace {

json run_fields(const Result4& r) {
  return {{"variant", to_string(r.key.variant)},
          {"key_msg", public_key_to_json(r.key.pk)},
          {"predicate", r.key.predicate},
          {"y", zq_to_json(r.transcript.y)},
          {"b", bits_to_string(r.transcript.b)},
          {"accepted", to_string(r.out.accepted)},
          {"B1", r.out.B1},
          {"B2", r.out.B2}};
}

json seeds(u64 client) { return {{"client", std::to_string(client)}}; }

u64 seed_from(const json& rec) { return std::stoull(rec.at("seeds").at("client").get<std::string>()); }

Acceptance acceptance_from_string(const std::string& s) {
  for (auto a : {Acceptance::two_preimages, Acceptance::single_preimage, Acceptance::no_preimage})
    if (to_string(a) == s) return a;
  throw std::invalid_argument("unknown acceptance: " + s);
}

}  // namespace

json record_p4(const std::string& run_id, const Result4& r) {
  json j = run_fields(r);
  j["kind"] = "p4";
  j["run_id"] = run_id;
  j["seeds"] = seeds(r.client.seed);
  return j;
}

json record_p8(const std::string& run_id, const Result8& r, u64 client_seed) {
  return {{"kind", "p8"},        {"run_id", run_id},        {"runs", json::array({run_fields(r.first), run_fields(r.second)})},
          {"s1", r.merge.s1},    {"s2", r.merge.s2},        {"L", r.index.L},
          {"seeds", seeds(client_seed)}};
}

json record_verifiable(const std::string& run_id, const TestPlan& plan, double eps2, i64 min_count,
                       const std::vector<int>& outcomes, bool accepted, u64 client_seed) {
  return {{"kind", "verifiable"}, {"run_id", run_id},     {"N", plan.N},         {"f", plan.f},
          {"eps2", eps2},         {"min_count", min_count}, {"T", plan.T},       {"M", plan.M},
          {"outcomes", outcomes}, {"accepted", accepted},   {"seeds", seeds(client_seed)}};
}

std::string chain_hash(const std::string& prev, const json& record) {
  json body = record;
  body.erase("prev");
  body.erase("hash");
  return sha256_hex(prev + body.dump());
}

void TranscriptWriter::append(json record) {
  if (finished_) throw std::logic_error("TranscriptWriter: already finished");
  record.erase("prev");
  record.erase("hash");
  const std::string h = chain_hash(prev_, record);
  record["prev"] = prev_;
  record["hash"] = h;
  out_ << record.dump() << '\n';
  prev_ = h;
  ++count_;
}

void TranscriptWriter::finish() {
  if (finished_) return;
  append({{"kind", "end"}, {"count", count_}});
  finished_ = true;
  out_.flush();
}

json ReplayReport::to_json() const {
  json issues_j = json::array();
  for (const auto& i : issues) issues_j.push_back({{"line", i.line}, {"kind", i.kind}, {"message", i.message}});
  return {{"ok", ok}, {"records", records}, {"issues", issues_j}};
}

namespace {

struct ReplayState {
  ReplayReport report;
  // L values of verifiable sub-runs, keyed by the parent run id.
  std::map<std::string, std::map<i64, int>> sub_L;

  void issue(i64 line, const std::string& kind, const std::string& msg) {
    report.ok = false;
    report.issues.push_back({line, kind, msg});
  }
};

// Re-derives one 4-state run; returns the client's indices.
OutputIndex4 replay_run(const json& run, const ClientState4& client, i64 line, ReplayState& st, Rng* fill) {
  const PublicKey pk = public_key_from_json(run.at("key_msg"));
  if (!(pk.K == client.pk.K) || !(pk.y0 == client.pk.y0) || !(pk.params == client.pk.params))
    st.issue(line, "key_mismatch", "recorded key does not match the key regenerated from the seed");
  const ZqVector y = zq_vector_from_json(run.at("y"));
  const Bits b = bits_from_string(run.at("b").get<std::string>());
  OutputIndex4 out = fill ? finalize_always(client, y, b, *fill) : finalize(client, y, b);
  if (out.accepted != acceptance_from_string(run.at("accepted").get<std::string>()) || out.B1 != run.at("B1").get<int>() ||
      out.B2 != run.at("B2").get<int>())
    st.issue(line, "index_mismatch", "recomputed (accepted, B1, B2) = (" + to_string(out.accepted) + ", " + std::to_string(out.B1) + ", " +
                                         std::to_string(out.B2) + ") differs from the record");
  return out;
}

void replay_record(const json& rec, i64 line, ReplayState& st) {
  const std::string kind = rec.at("kind").get<std::string>();
  if (kind == "p4") {
    const PublicKey pk = public_key_from_json(rec.at("key_msg"));
    auto [client, key] = client_init(pk.params, variant_from_string(rec.at("variant").get<std::string>()), seed_from(rec));
    replay_run(rec, client, line, st, nullptr);
  } else if (kind == "p8") {
    const u64 seed = seed_from(rec);
    const json& runs = rec.at("runs");
    if (!runs.is_array() || runs.size() != 2) throw std::invalid_argument("p8 record needs two runs");
    const ParamSet p = params_from_json(runs[0].at("key_msg").at("params"));
    auto [c1, k1] = client_init(p, Variant::plain, derive_seed(seed, "first"));
    auto [c2, k2] = client_init(p, Variant::rotated, derive_seed(seed, "second"));
    Rng fill = make_rng(seed, "client-fill");
    const OutputIndex4 o1 = replay_run(runs[0], c1, line, st, &fill);
    const OutputIndex4 o2 = replay_run(runs[1], c2, line, st, &fill);
    const EightIndex L = client_finalize8(o1, o2, {rec.at("s1").get<int>(), rec.at("s2").get<int>()});
    if (L.L != rec.at("L").get<int>()) st.issue(line, "index_mismatch", "recomputed L = " + std::to_string(L.L) + " differs from the record");
    const std::string id = rec.at("run_id").get<std::string>();
    if (auto slash = id.rfind('/'); slash != std::string::npos) st.sub_L[id.substr(0, slash)][std::stoll(id.substr(slash + 1))] = L.L;
  } else if (kind == "verifiable") {
    const std::string id = rec.at("run_id").get<std::string>();
    const i64 N = rec.at("N").get<i64>();
    const TestPlan plan = plan_tests(N, rec.at("f").get<double>(), seed_from(rec));
    if (plan.T != rec.at("T").get<std::vector<i64>>() || plan.M != rec.at("M").get<std::vector<int>>())
      st.issue(line, "index_mismatch", "test plan does not match the one derived from the seed");
    const auto& subs = st.sub_L[id];
    if (static_cast<i64>(subs.size()) != N) {
      st.issue(line, "truncated", "verifiable run is missing sub-run records");
      return;
    }
    std::vector<int> Ls;
    for (const auto& [i, L] : subs) Ls.push_back(L);
    const CheckResult c = collect_and_check(plan, Ls, rec.at("outcomes").get<std::vector<int>>(), rec.at("eps2").get<double>(),
                                            rec.at("min_count").get<i64>());
    if (c.accepted != rec.at("accepted").get<bool>()) st.issue(line, "index_mismatch", "recomputed accept decision differs from the record");
  } else {
    throw std::invalid_argument("unknown record kind: " + kind);
  }
}

}  // namespace

ReplayReport replay(std::istream& in) {
  ReplayState st;
  std::string prev = kGenesisHash, line;
  i64 lineno = 0;
  bool ended = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (ended) {
      st.issue(lineno, "chain", "data after the end record");
      break;
    }
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      st.issue(lineno, "parse", e.what());
      break;
    }
    if (!rec.is_object() || !rec.contains("prev") || !rec.contains("hash") || !rec.contains("kind")) {
      st.issue(lineno, "schema", "record lacks prev/hash/kind");
      break;
    }
    if (rec["prev"] != prev) st.issue(lineno, "chain", "prev does not match the previous record's hash");
    const std::string h = chain_hash(rec["prev"].get<std::string>(), rec);
    if (rec["hash"] != h) st.issue(lineno, "chain", "record hash does not match its contents");
    prev = rec["hash"].get<std::string>();
    if (rec["kind"] == "end") {
      ended = true;
      if (rec.value("count", i64{-1}) != st.report.records) st.issue(lineno, "truncated", "end record count does not match");
      continue;
    }
    ++st.report.records;
    try {
      replay_record(rec, lineno, st);
    } catch (const std::exception& e) {
      st.issue(lineno, "schema", e.what());
    }
  }
  if (!ended) st.issue(lineno, "truncated", "no end record; the file is truncated");
  return st.report;
}

}  // namespace qf
