#pragma once

#include "qfactory/serialize.hpp"

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qf {

inline constexpr int kWireVersion = 1;
inline constexpr std::size_t kDefaultMaxFrame = std::size_t{16} << 20;

enum class MessageKind { key, image, meas, merge, test_plan, test_results };
std::string to_string(MessageKind k);
MessageKind message_kind_from_string(const std::string& s);

struct WireMessage {
  int version = kWireVersion;
  MessageKind kind = MessageKind::key;
  std::string run_id;
  json payload = json::object();
};

struct WireError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Field names that belong to the client alone; none may appear anywhere in a message.
const std::vector<std::string>& private_field_names();

// Returns the offending JSON paths (empty when clean).
std::vector<std::string> privacy_lint(const json& j);

// Whitelist schema per kind; throws WireError on unknown or missing fields, wrong types,
// a version mismatch, or a privacy-lint hit.
void validate_message(const json& j);

json to_json(const WireMessage& m);
WireMessage message_from_json(const json& j);

// 4-byte big-endian length, then UTF-8 JSON.
std::string encode_frame(const std::string& body, std::size_t max_frame = kDefaultMaxFrame);
std::uint32_t decode_frame_length(const unsigned char header[4], std::size_t max_frame = kDefaultMaxFrame);

class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send_frame(const std::string& body) = 0;
  virtual std::string recv_frame() = 0;

  void send(const WireMessage& m);
  WireMessage recv();
  // Every validated message that crossed this endpoint, in order.
  const std::vector<std::string>& log() const { return log_; }

 private:
  std::vector<std::string> log_;
};

// In-process pair of endpoints sharing two queues of encoded frames.
class LocalChannel : public Channel {
 public:
  struct Queue {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::string> frames;
    bool closed = false;
  };

  static std::pair<std::unique_ptr<LocalChannel>, std::unique_ptr<LocalChannel>> make_pair(std::size_t max_frame = kDefaultMaxFrame);
  ~LocalChannel() override;

  void send_frame(const std::string& body) override;
  std::string recv_frame() override;

 private:
  LocalChannel(std::shared_ptr<Queue> in, std::shared_ptr<Queue> out, std::size_t max_frame)
      : in_(std::move(in)), out_(std::move(out)), max_frame_(max_frame) {}
  std::shared_ptr<Queue> in_, out_;
  std::size_t max_frame_;
};

// Blocking TCP stream; the timeout applies to each read and write.
class SocketChannel : public Channel {
 public:
  SocketChannel(int fd, int timeout_ms = 30000, std::size_t max_frame = kDefaultMaxFrame);
  ~SocketChannel() override;
  SocketChannel(const SocketChannel&) = delete;
  SocketChannel& operator=(const SocketChannel&) = delete;

  void send_frame(const std::string& body) override;
  std::string recv_frame() override;
  void send_raw(const std::string& bytes);

 private:
  int fd_;
  std::size_t max_frame_;
};

struct Endpoint {
  std::string host = "127.0.0.1";
  int port = 7878;
};

// "host:port" or ":port"; QFACTORY_ENDPOINT overrides the fallback when set.
Endpoint parse_endpoint(const std::string& s);
Endpoint endpoint_from_env(const std::string& fallback);

std::unique_ptr<SocketChannel> connect_tcp(const Endpoint& ep, int timeout_ms = 30000);

}  // namespace qf
