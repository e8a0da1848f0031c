#include "qfactory/experiments.hpp"
#include "qfactory/session.hpp"

#include <gtest/gtest.h>

#include <sstream>
#include <thread>

using namespace qf;

namespace {

std::string write_transcript(const std::vector<json>& records) {
  std::ostringstream out;
  TranscriptWriter w(out);
  for (const auto& r : records) w.append(r);
  w.finish();
  return out.str();
}

std::vector<json> lines_of(const std::string& s) {
  std::vector<json> v;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) v.push_back(json::parse(line));
  return v;
}

// Recomputes every link so only the content check can fail.
std::string rechain(std::vector<json> recs) {
  std::string prev = kGenesisHash, out;
  for (auto& r : recs) {
    r["prev"] = prev;
    r["hash"] = chain_hash(prev, r);
    prev = r["hash"].get<std::string>();
    out += r.dump() + "\n";
  }
  return out;
}

ReplayReport replay_string(const std::string& s) {
  std::istringstream in(s);
  return replay(in);
}

bool has_issue(const ReplayReport& r, const std::string& kind) {
  for (const auto& i : r.issues)
    if (i.kind == kind) return true;
  return false;
}

RunConfig config(Protocol p, u64 seed) {
  RunConfig c;
  c.protocol = p;
  c.client_seed = seed;
  c.run_id = to_string(p) + "-" + std::to_string(seed);
  c.N = 12;
  return c;
}

}  // namespace

TEST(Serialize, KeyPairAndStrategyRoundTrip) {
  const KeyPair kp = gen(toy_params(1, 5, 3, 2, 1), 3);
  const KeyPair back = keypair_from_json(json::parse(keypair_to_json(kp).dump()));
  EXPECT_EQ(back.pk.K, kp.pk.K);
  EXPECT_EQ(back.pk.y0, kp.pk.y0);
  EXPECT_EQ(back.td.z0, kp.td.z0);
  EXPECT_EQ(back.td.d0, kp.td.d0);
  const Strategy s = conjugated_strategy(4, 2, 1);
  const Strategy t = strategy_from_json(json::parse(strategy_to_json(s).dump()));
  ASSERT_EQ(t.dim, s.dim);
  for (int L = 0; L < 8; ++L) {
    EXPECT_LT((t.states[L] - s.states[L]).norm(), 1e-12);
    EXPECT_LT((t.observables[L] - s.observables[L]).norm(), 1e-12);
  }
  EXPECT_EQ(bits_from_string(bits_to_string(Bits{1, 0, 1, 1})), (Bits{1, 0, 1, 1}));
  EXPECT_THROW(bits_from_string("10x"), std::invalid_argument);
}

TEST(Wire, PrivacyLintFindsNestedFields) {
  const json clean = {{"ys", json::array({json::array({1, 2})})}};
  EXPECT_TRUE(privacy_lint(clean).empty());
  const json dirty = {{"outer", {{"list", json::array({json::object({{"d0", 1}})})}}}};
  EXPECT_EQ(privacy_lint(dirty), std::vector<std::string>{"/outer/list/0/d0"});
  WireMessage m{kWireVersion, MessageKind::image, "r", {{"ys", json::array()}, {"B1", 0}}};
  EXPECT_THROW(validate_message(to_json(m)), WireError);
}

TEST(Wire, SchemaAndVersion) {
  WireMessage ok{kWireVersion, MessageKind::meas, "r", {{"bs", json::array({"0101"})}}};
  EXPECT_NO_THROW(validate_message(to_json(ok)));
  json j = to_json(ok);
  j["version"] = kWireVersion + 1;
  EXPECT_THROW(validate_message(j), WireError);
  j = to_json(ok);
  j["payload"]["extra"] = 1;
  EXPECT_THROW(validate_message(j), WireError);
  j = to_json(ok);
  j["payload"]["bs"] = json::array({"01a"});
  EXPECT_THROW(validate_message(j), WireError);
  j = to_json(ok);
  j["kind"] = "nonsense";
  EXPECT_ANY_THROW(validate_message(j));
}

TEST(Wire, FrameLimits) {
  EXPECT_EQ(encode_frame("abc").size(), 7u);
  EXPECT_THROW(encode_frame("abcdef", 4), WireError);
  const unsigned char big[4] = {0x7f, 0xff, 0xff, 0xff};
  EXPECT_THROW(decode_frame_length(big), WireError);
  const unsigned char small[4] = {0, 0, 1, 2};
  EXPECT_EQ(decode_frame_length(small), 258u);
}

TEST(Wire, OversizeFrameOnLocalChannel) {
  auto [a, b] = LocalChannel::make_pair(64);
  WireMessage m{kWireVersion, MessageKind::meas, "r", {{"bs", json::array({std::string(200, '0')})}}};
  EXPECT_THROW(a->send(m), WireError);
}

TEST(Wire, EndpointParsing) {
  const Endpoint e = parse_endpoint("example.org:9000");
  EXPECT_EQ(e.host, "example.org");
  EXPECT_EQ(e.port, 9000);
  EXPECT_EQ(parse_endpoint(":81").port, 81);
  EXPECT_THROW(parse_endpoint("host:notaport"), std::invalid_argument);
}

// The channel path must reproduce the in-process computation exactly.
TEST(Loopback, BitIdenticalToLocal) {
  ServerConfig server;
  server.seed = 77;
  for (Protocol p : {Protocol::p4, Protocol::p4_rotated, Protocol::p8, Protocol::verifiable})
    for (u64 seed = 1; seed <= 3; ++seed) {
      const RunConfig cfg = config(p, seed);
      std::vector<std::string> wire;
      const ClientOutcome net = run_loopback(cfg, server, &wire);
      const ClientOutcome local = run_local(cfg, server);
      EXPECT_EQ(json(net.records).dump(), json(local.records).dump()) << to_string(p);
      EXPECT_EQ(net.summary.dump(), local.summary.dump());
      ASSERT_FALSE(wire.empty());
      for (const auto& frame : wire) EXPECT_TRUE(privacy_lint(json::parse(frame)).empty()) << frame;
    }
}

TEST(Session, RejectsOutOfOrderMessages) {
  ServerSession s(ServerConfig{});
  WireMessage plan{kWireVersion, MessageKind::test_plan, "r", {{"T", json::array()}, {"M", json::array()}}};
  EXPECT_ANY_THROW(s.handle(plan));
}

TEST(Tcp, SessionOverSocketMatchesLocal) {
  ServerConfig server;
  server.seed = 5;
  TcpServer tcp(parse_endpoint("127.0.0.1:0"), server);
  std::thread t([&] { tcp.serve(2); });
  for (Protocol p : {Protocol::p8, Protocol::verifiable}) {
    const RunConfig cfg = config(p, 9);
    auto ch = connect_tcp({"127.0.0.1", tcp.port()}, 10000);
    const ClientOutcome net = run_client(*ch, cfg);
    EXPECT_EQ(json(net.records).dump(), json(run_local(cfg, server).records).dump());
  }
  t.join();
  EXPECT_EQ(tcp.failed_sessions(), 0);
}

TEST(Transcript, UntouchedReplaysClean) {
  ServerConfig server;
  std::vector<json> recs;
  for (Protocol p : {Protocol::p4, Protocol::p8, Protocol::verifiable})
    for (const auto& r : run_local(config(p, 4), server).records) recs.push_back(r);
  const ReplayReport r = replay_string(write_transcript(recs));
  EXPECT_TRUE(r.ok) << r.to_json().dump();
  EXPECT_EQ(r.records, static_cast<i64>(recs.size()));
}

TEST(Transcript, FlippedMeasurementBitIsCaught) {
  auto recs = lines_of(write_transcript(run_local(config(Protocol::p4, 6), ServerConfig{}).records));
  std::string b = recs[0]["b"].get<std::string>();
  b.back() = b.back() == '0' ? '1' : '0';  // the two preimages always differ in the last bit
  recs[0]["b"] = b;
  const ReplayReport r = replay_string(rechain(recs));
  EXPECT_FALSE(r.ok);
  EXPECT_TRUE(has_issue(r, "index_mismatch"));
  EXPECT_FALSE(has_issue(r, "chain"));
}

TEST(Transcript, TamperWithoutRechainBreaksChain) {
  auto recs = lines_of(write_transcript(run_local(config(Protocol::p8, 2), ServerConfig{}).records));
  recs[0]["s1"] = 1 - recs[0]["s1"].get<int>();
  std::string s;
  for (const auto& r : recs) s += r.dump() + "\n";
  EXPECT_TRUE(has_issue(replay_string(s), "chain"));
}

TEST(Transcript, TruncationIsCaught) {
  const std::string full = write_transcript(run_local(config(Protocol::p4, 3), ServerConfig{}).records);
  const std::string cut = full.substr(0, full.find('\n') + 1);
  EXPECT_TRUE(has_issue(replay_string(cut), "truncated"));
  auto recs = lines_of(write_transcript(run_local(config(Protocol::verifiable, 3), ServerConfig{}).records));
  recs.erase(recs.begin() + 2);
  recs.back()["count"] = recs.back()["count"].get<i64>() - 1;
  EXPECT_TRUE(has_issue(replay_string(rechain(recs)), "truncated"));
}

TEST(OracleCheck, PassesAndCatchesCorruptedTrapdoor) {
  const OracleCheck c = oracle_check(default_toy(), 1, 300, 4);
  EXPECT_EQ(c.invert_mismatches, 0);
  EXPECT_EQ(c.formula_mismatches, 0);
  EXPECT_GT(c.formula_cases, 0);
  EXPECT_GT(c.corrupted_mismatches, 0);
  EXPECT_LT(c.max_exact_tv, 1e-9);
  EXPECT_EQ(c.images_checked, 1 << default_toy().image_bits());
}
