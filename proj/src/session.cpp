#include "qfactory/session.hpp"

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <iostream>

namespace qf {

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::p4: return "p4";
    case Protocol::p4_rotated: return "p4-rotated";
    case Protocol::p8: return "p8";
    default: return "verifiable";
  }
}

Protocol protocol_from_string(const std::string& s) {
  for (auto p : {Protocol::p4, Protocol::p4_rotated, Protocol::p8, Protocol::verifiable})
    if (to_string(p) == s) return p;
  throw std::invalid_argument("unknown protocol: " + s);
}

u64 session_seed(u64 server_master, const std::string& run_id) { return derive_seed(server_master, "session:" + run_id); }

namespace {

WireMessage message(MessageKind kind, const std::string& run_id, json payload) {
  WireMessage m;
  m.kind = kind;
  m.run_id = run_id;
  m.payload = std::move(payload);
  return m;
}

json image_payload(const std::vector<const Transcript4*>& ts) {
  json ys = json::array();
  for (auto* t : ts) ys.push_back(zq_to_json(t->y));
  return {{"ys", ys}};
}

json meas_payload(const std::vector<const Transcript4*>& ts) {
  json bs = json::array();
  for (auto* t : ts) bs.push_back(bits_to_string(t->b));
  return {{"bs", bs}};
}

WireMessage expect(Channel& ch, MessageKind kind, const std::string& run_id) {
  WireMessage m = ch.recv();
  if (m.kind != kind) throw WireError("expected a " + to_string(kind) + " message, got " + to_string(m.kind));
  if (m.run_id != run_id) throw WireError("run_id mismatch on the wire");
  return m;
}

std::vector<Transcript4> read_transcripts(const WireMessage& image, const WireMessage& meas, std::size_t count) {
  const json& ys = image.payload["ys"];
  const json& bs = meas.payload["bs"];
  if (ys.size() != count || bs.size() != count) throw WireError("server returned the wrong number of images or measurements");
  std::vector<Transcript4> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i].y = zq_vector_from_json(ys[i]);
    out[i].b = bits_from_string(bs[i].get<std::string>());
  }
  return out;
}

Result4 assemble(ClientState4 c, KeyMessage k, Transcript4 t, OutputIndex4 out) {
  Result4 r;
  r.client = std::move(c);
  r.key = std::move(k);
  r.transcript = std::move(t);
  r.out = out;
  return r;
}

json outcome_summary(const RunConfig& cfg, const std::vector<json>& records) {
  json s = {{"protocol", to_string(cfg.protocol)}, {"run_id", cfg.run_id}, {"records", records.size()}};
  const json& last = records.back();
  if (last.contains("accepted")) s["accepted"] = last["accepted"];
  if (last.contains("L")) s["L"] = last["L"];
  if (last.contains("B1")) s["B1"] = last["B1"], s["B2"] = last["B2"];
  return s;
}

}  // namespace

std::vector<WireMessage> ServerSession::handle(const WireMessage& m) {
  std::vector<WireMessage> out;
  if (state_ == State::await_key) {
    if (m.kind != MessageKind::key) throw WireError("session expects a key message first");
    const Protocol proto = protocol_from_string(m.payload["protocol"].get<std::string>());
    if (m.payload["predicate"] != "d-bit") throw WireError("unsupported predicate");
    std::vector<KeyMessage> keys;
    for (std::size_t i = 0; i < m.payload["keys"].size(); ++i)
      keys.push_back({public_key_from_json(m.payload["keys"][i]), variant_from_string(m.payload["variants"][i].get<std::string>()), "d-bit"});
    run_id_ = m.run_id;
    seed_ = session_seed(cfg_.seed, run_id_);
    if (proto == Protocol::p4 || proto == Protocol::p4_rotated) {
      const Variant want = proto == Protocol::p4 ? Variant::plain : Variant::rotated;
      if (keys.size() != 1 || keys[0].variant != want) throw WireError("4-state session needs one key of the matching variant");
      Rng rng = make_rng(seed_, "server");
      const ServerOutput so = server_honest(keys[0], cfg_.backend, rng);
      out.push_back(message(MessageKind::image, run_id_, image_payload({&so.msg})));
      out.push_back(message(MessageKind::meas, run_id_, meas_payload({&so.msg})));
      state_ = State::done;
      return out;
    }
    if (keys.empty() || keys.size() % 2) throw WireError("8-state sessions need plain/rotated key pairs");
    const std::size_t runs = keys.size() / 2;
    if (proto == Protocol::p8 && runs != 1) throw WireError("p8 session needs exactly one key pair");
    std::vector<Server8Output> results;
    for (std::size_t i = 0; i < runs; ++i) {
      Rng rng = proto == Protocol::p8 ? make_rng(seed_, "server") : make_rng(derive_seed(seed_, "run", i), "server");
      results.push_back(server8_honest(keys[2 * i], keys[2 * i + 1], cfg_.backend, rng));
      held_.push_back(results.back().qubit->vector());
    }
    std::vector<const Transcript4*> ts;
    json s = json::array();
    for (const auto& r : results) {
      ts.push_back(&r.first.msg);
      ts.push_back(&r.second.msg);
      s.push_back({r.merge.s1, r.merge.s2});
    }
    out.push_back(message(MessageKind::image, run_id_, image_payload(ts)));
    out.push_back(message(MessageKind::meas, run_id_, meas_payload(ts)));
    out.push_back(message(MessageKind::merge, run_id_, {{"s", s}}));
    state_ = proto == Protocol::verifiable ? State::await_plan : State::done;
    return out;
  }
  if (state_ == State::await_plan) {
    if (m.kind != MessageKind::test_plan || m.run_id != run_id_) throw WireError("session expects the test plan");
    TestPlan plan;
    plan.N = static_cast<i64>(held_.size());
    plan.T = m.payload["T"].get<std::vector<i64>>();
    plan.M = m.payload["M"].get<std::vector<int>>();
    Rng rng = make_rng(seed_, "server-test");
    const std::vector<int> outcomes = measure_tests(held_, plan, cfg_.measurement_shift, rng);
    out.push_back(message(MessageKind::test_results, run_id_, {{"outcomes", outcomes}}));
    state_ = State::done;
    return out;
  }
  throw WireError("session already finished");
}

void serve_channel(Channel& ch, const ServerConfig& cfg) {
  ServerSession s(cfg);
  while (!s.done())
    for (const auto& reply : s.handle(ch.recv())) ch.send(reply);
}

ClientOutcome run_client(Channel& ch, const RunConfig& cfg) {
  validate(cfg.params);
  ClientOutcome res;
  const std::string& id = cfg.run_id;
  if (cfg.protocol == Protocol::p4 || cfg.protocol == Protocol::p4_rotated) {
    const Variant v = cfg.protocol == Protocol::p4 ? Variant::plain : Variant::rotated;
    auto [c, k] = client_init(cfg.params, v, cfg.client_seed);
    ch.send(message(MessageKind::key, id,
                    {{"protocol", to_string(cfg.protocol)}, {"predicate", k.predicate}, {"keys", json::array({public_key_to_json(k.pk)})},
                     {"variants", json::array({to_string(v)})}}));
    const WireMessage image = expect(ch, MessageKind::image, id);
    const WireMessage meas = expect(ch, MessageKind::meas, id);
    Transcript4 t = read_transcripts(image, meas, 1)[0];
    const OutputIndex4 out = finalize(c, t.y, t.b);
    res.records.push_back(record_p4(id, assemble(std::move(c), std::move(k), std::move(t), out)));
    res.summary = outcome_summary(cfg, res.records);
    return res;
  }
  const std::size_t runs = cfg.protocol == Protocol::p8 ? 1 : static_cast<std::size_t>(cfg.N);
  if (runs < 1) throw std::invalid_argument("run_client: N >= 1");
  std::vector<u64> seeds;
  std::vector<std::pair<ClientState4, KeyMessage>> firsts, seconds;
  json keys = json::array(), variants = json::array();
  for (std::size_t i = 0; i < runs; ++i) {
    const u64 s = cfg.protocol == Protocol::p8 ? cfg.client_seed : derive_seed(cfg.client_seed, "client", i);
    seeds.push_back(s);
    firsts.push_back(client_init(cfg.params, Variant::plain, derive_seed(s, "first")));
    seconds.push_back(client_init(cfg.params, Variant::rotated, derive_seed(s, "second")));
    keys.push_back(public_key_to_json(firsts.back().second.pk));
    keys.push_back(public_key_to_json(seconds.back().second.pk));
    variants.push_back("plain");
    variants.push_back("rotated");
  }
  ch.send(message(MessageKind::key, id, {{"protocol", to_string(cfg.protocol)}, {"predicate", "d-bit"}, {"keys", keys}, {"variants", variants}}));
  const WireMessage image = expect(ch, MessageKind::image, id);
  const WireMessage meas = expect(ch, MessageKind::meas, id);
  const WireMessage merge = expect(ch, MessageKind::merge, id);
  std::vector<Transcript4> ts = read_transcripts(image, meas, 2 * runs);
  if (merge.payload["s"].size() != runs) throw WireError("server returned the wrong number of merge outcomes");
  std::vector<int> Ls;
  for (std::size_t i = 0; i < runs; ++i) {
    Rng fill = make_rng(seeds[i], "client-fill");
    Result8 r;
    const OutputIndex4 o1 = finalize_always(firsts[i].first, ts[2 * i].y, ts[2 * i].b, fill);
    const OutputIndex4 o2 = finalize_always(seconds[i].first, ts[2 * i + 1].y, ts[2 * i + 1].b, fill);
    r.merge = {merge.payload["s"][i][0].get<int>(), merge.payload["s"][i][1].get<int>()};
    r.index = client_finalize8(o1, o2, r.merge);
    r.first = assemble(std::move(firsts[i].first), std::move(firsts[i].second), std::move(ts[2 * i]), o1);
    r.second = assemble(std::move(seconds[i].first), std::move(seconds[i].second), std::move(ts[2 * i + 1]), o2);
    Ls.push_back(r.index.L);
    res.records.push_back(record_p8(cfg.protocol == Protocol::p8 ? id : id + "/" + std::to_string(i), r, seeds[i]));
  }
  if (cfg.protocol == Protocol::verifiable) {
    const TestPlan plan = plan_tests(cfg.N, cfg.f, cfg.client_seed);
    ch.send(message(MessageKind::test_plan, id, {{"T", plan.T}, {"M", plan.M}}));
    const WireMessage results = expect(ch, MessageKind::test_results, id);
    const auto outcomes = results.payload["outcomes"].get<std::vector<int>>();
    const CheckResult check = collect_and_check(plan, Ls, outcomes, cfg.eps2, cfg.min_count);
    res.records.push_back(record_verifiable(id, plan, cfg.eps2, cfg.min_count, outcomes, check.accepted, cfg.client_seed));
  }
  res.summary = outcome_summary(cfg, res.records);
  return res;
}

ClientOutcome run_local(const RunConfig& cfg, const ServerConfig& server) {
  validate(cfg.params);
  ClientOutcome res;
  const u64 sseed = session_seed(server.seed, cfg.run_id);
  switch (cfg.protocol) {
    case Protocol::p4:
    case Protocol::p4_rotated: {
      const Variant v = cfg.protocol == Protocol::p4 ? Variant::plain : Variant::rotated;
      res.records.push_back(record_p4(cfg.run_id, run_protocol4(cfg.params, v, cfg.client_seed, sseed, honest_strategy(server.backend))));
      break;
    }
    case Protocol::p8:
      res.records.push_back(record_p8(cfg.run_id, run_protocol8(cfg.params, cfg.client_seed, sseed, honest_strategy8(server.backend)), cfg.client_seed));
      break;
    case Protocol::verifiable: {
      if (cfg.N < 1) throw std::invalid_argument("run_local: N >= 1");
      std::vector<int> Ls;
      std::vector<Qubit> held;
      for (i64 i = 0; i < cfg.N; ++i) {
        const u64 cs = derive_seed(cfg.client_seed, "client", static_cast<u64>(i));
        Result8 r = run_protocol8(cfg.params, cs, derive_seed(sseed, "run", static_cast<u64>(i)), honest_strategy8(server.backend));
        Ls.push_back(r.index.L);
        held.push_back(r.qubit->vector());
        res.records.push_back(record_p8(cfg.run_id + "/" + std::to_string(i), r, cs));
      }
      const TestPlan plan = plan_tests(cfg.N, cfg.f, cfg.client_seed);
      Rng rng = make_rng(sseed, "server-test");
      const std::vector<int> outcomes = measure_tests(held, plan, server.measurement_shift, rng);
      const CheckResult check = collect_and_check(plan, Ls, outcomes, cfg.eps2, cfg.min_count);
      res.records.push_back(record_verifiable(cfg.run_id, plan, cfg.eps2, cfg.min_count, outcomes, check.accepted, cfg.client_seed));
      break;
    }
  }
  res.summary = outcome_summary(cfg, res.records);
  return res;
}

ClientOutcome run_loopback(const RunConfig& cfg, const ServerConfig& server, std::vector<std::string>* wire_log) {
  auto [client_end, server_end] = LocalChannel::make_pair();
  std::exception_ptr server_error;
  std::thread srv([&, ch = server_end.get()] {
    try {
      serve_channel(*ch, server);
    } catch (...) {
      server_error = std::current_exception();
    }
  });
  ClientOutcome out;
  try {
    out = run_client(*client_end, cfg);
  } catch (...) {
    server_end.reset();
    client_end.reset();
    srv.join();
    throw;
  }
  srv.join();
  if (server_error) std::rethrow_exception(server_error);
  if (wire_log) *wire_log = client_end->log();
  return out;
}

TcpServer::TcpServer(const Endpoint& ep, ServerConfig cfg) : cfg_(cfg) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  if (int rc = getaddrinfo(ep.host.empty() ? nullptr : ep.host.c_str(), std::to_string(ep.port).c_str(), &hints, &res); rc != 0)
    throw WireError(std::string("cannot resolve ") + ep.host + ": " + gai_strerror(rc));
  for (addrinfo* a = res; a; a = a->ai_next) {
    fd_ = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd_ < 0) continue;
    int one = 1;
    setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd_, a->ai_addr, a->ai_addrlen) == 0 && ::listen(fd_, 64) == 0) break;
    ::close(fd_);
    fd_ = -1;
  }
  freeaddrinfo(res);
  if (fd_ < 0) throw WireError("cannot listen on " + ep.host + ":" + std::to_string(ep.port));
  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = addr.ss_family == AF_INET6 ? ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port) : ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

TcpServer::~TcpServer() {
  stop();
  std::lock_guard<std::mutex> lock(mu_);
  for (auto& w : workers_)
    if (w.joinable()) w.join();
  if (fd_ >= 0) ::close(fd_);
}

void TcpServer::stop() { stopping_ = true; }

void TcpServer::serve(int max_sessions) {
  int accepted = 0;
  while (!stopping_ && (max_sessions < 0 || accepted < max_sessions)) {
    pollfd p{fd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, 200);
    if (rc <= 0) continue;
    const int cfd = ::accept(fd_, nullptr, nullptr);
    if (cfd < 0) continue;
    ++accepted;
    std::lock_guard<std::mutex> lock(mu_);
    workers_.emplace_back([this, cfd] {
      try {
        SocketChannel ch(cfd);
        serve_channel(ch, cfg_);
      } catch (const std::exception& e) {
        ++failed_;
        std::cerr << "session failed: " << e.what() << '\n';
      }
    });
  }
  std::lock_guard<std::mutex> lock(mu_);
  for (auto& w : workers_)
    if (w.joinable()) w.join();
  workers_.clear();
}

}  // namespace qf
