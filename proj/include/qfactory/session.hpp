#pragma once

#include "qfactory/selftest.hpp"
#include "qfactory/transcript.hpp"
#include "qfactory/wire.hpp"

#include <atomic>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace qf {

enum class Protocol { p4, p4_rotated, p8, verifiable };
std::string to_string(Protocol p);
Protocol protocol_from_string(const std::string& s);

struct RunConfig {
  Protocol protocol = Protocol::p4;
  ParamSet params = default_toy();
  u64 client_seed = 1;
  std::string run_id = "run-0";
  i64 N = 16;       // verifiable only
  double f = 0.5;   // verifiable only
  double eps2 = 0.05;
  i64 min_count = 30;
};

struct ServerConfig {
  Backend backend = Backend::two_branch;
  u64 seed = 0;
  int measurement_shift = 0;  // applied to test-phase measurements
};

// Per-session server seed.
u64 session_seed(u64 server_master, const std::string& run_id);

struct ClientOutcome {
  std::vector<json> records;  // transcript records, without chain fields
  json summary;
};

// Server-side state machine for one logical session.
class ServerSession {
 public:
  explicit ServerSession(ServerConfig cfg) : cfg_(cfg) {}
  std::vector<WireMessage> handle(const WireMessage& m);
  bool done() const { return state_ == State::done; }

 private:
  enum class State { await_key, await_plan, done };
  ServerConfig cfg_;
  State state_ = State::await_key;
  std::string run_id_;
  u64 seed_ = 0;
  std::vector<Qubit> held_;
};

// Drives a ServerSession over the channel until it completes.
void serve_channel(Channel& ch, const ServerConfig& cfg);
ClientOutcome run_client(Channel& ch, const RunConfig& cfg);

// Same computation without a channel.
ClientOutcome run_local(const RunConfig& cfg, const ServerConfig& server);
// Through a LocalChannel pair with the server on its own thread; wire logs are returned too.
ClientOutcome run_loopback(const RunConfig& cfg, const ServerConfig& server, std::vector<std::string>* wire_log = nullptr);

// TCP listener; one thread per accepted connection, each connection one session.
class TcpServer {
 public:
  TcpServer(const Endpoint& ep, ServerConfig cfg);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  int port() const { return port_; }
  // Accepts until `max_sessions` connections were taken (negative: forever) or stop() is called.
  void serve(int max_sessions = -1);
  void stop();
  i64 failed_sessions() const { return failed_.load(); }

 private:
  int fd_ = -1;
  int port_ = 0;
  ServerConfig cfg_;
  std::atomic<bool> stopping_{false};
  std::atomic<i64> failed_{0};
  std::mutex mu_;
  std::vector<std::thread> workers_;
};

}  // namespace qf
