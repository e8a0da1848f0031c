#include "qfactory/wire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <map>
#include <set>

namespace qf {

std::string to_string(MessageKind k) {
  switch (k) {
    case MessageKind::key: return "key";
    case MessageKind::image: return "image";
    case MessageKind::meas: return "meas";
    case MessageKind::merge: return "merge";
    case MessageKind::test_plan: return "test_plan";
    default: return "test_results";
  }
}

MessageKind message_kind_from_string(const std::string& s) {
  for (auto k : {MessageKind::key, MessageKind::image, MessageKind::meas, MessageKind::merge, MessageKind::test_plan, MessageKind::test_results})
    if (to_string(k) == s) return k;
  throw WireError("unknown message kind: " + s);
}

const std::vector<std::string>& private_field_names() {
  static const std::vector<std::string> names = {"a",  "accepted", "abort", "B",  "B1",       "B2",  "L",
                                                 "d0", "trapdoor", "t",     "td", "gadget",   "z0"};
  return names;
}

namespace {

void lint(const json& j, const std::string& path, std::vector<std::string>& hits) {
  static const std::set<std::string> banned(private_field_names().begin(), private_field_names().end());
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string p = path + "/" + it.key();
      if (banned.count(it.key())) hits.push_back(p);
      lint(it.value(), p, hits);
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) lint(j[i], path + "/" + std::to_string(i), hits);
  }
}

enum class Type { string, integer, array, object };

bool has_type(const json& j, Type t) {
  switch (t) {
    case Type::string: return j.is_string();
    case Type::integer: return j.is_number_integer();
    case Type::array: return j.is_array();
    default: return j.is_object();
  }
}

void check_fields(const json& obj, const std::map<std::string, Type>& fields, const std::string& where) {
  if (!obj.is_object()) throw WireError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!fields.count(it.key())) throw WireError(where + ": field not allowed: " + it.key());
  for (const auto& [name, type] : fields) {
    if (!obj.contains(name)) throw WireError(where + ": missing field: " + name);
    if (!has_type(obj[name], type)) throw WireError(where + ": wrong type for field: " + name);
  }
}

void check_each(const json& arr, const std::string& where, bool (*ok)(const json&)) {
  for (const auto& x : arr)
    if (!ok(x)) throw WireError(where + ": bad element");
}

bool is_decimal(const json& x) { return x.is_string() && !x.get<std::string>().empty() && x.get<std::string>().find_first_not_of("0123456789") == std::string::npos; }
bool is_zq_vector(const json& x) {
  if (!x.is_array()) return false;
  for (const auto& v : x)
    if (!is_decimal(v)) return false;
  return true;
}
bool is_bit_string(const json& x) { return x.is_string() && x.get<std::string>().find_first_not_of("01") == std::string::npos; }
bool is_bit(const json& x) { return x.is_number_integer() && (x.get<int>() == 0 || x.get<int>() == 1); }
bool is_bit_pair(const json& x) { return x.is_array() && x.size() == 2 && is_bit(x[0]) && is_bit(x[1]); }
bool is_index(const json& x) { return x.is_number_integer() && x.get<i64>() >= 0; }
bool is_setting(const json& x) { return x.is_number_integer() && x.get<int>() >= 0 && x.get<int>() < 8; }
bool is_variant(const json& x) { return x.is_string() && (x == "plain" || x == "rotated"); }
bool is_public_key(const json& x) {
  if (!x.is_object() || x.size() != 3 || !x.contains("K") || !x.contains("y0") || !x.contains("params")) return false;
  if (!is_zq_vector(x["y0"]) || !x["K"].is_array()) return false;
  for (const auto& r : x["K"])
    if (!is_zq_vector(r)) return false;
  static const std::set<std::string> pf = {"n", "q", "m", "mu", "mu_prime", "ell_q", "ell_e", "profile"};
  if (!x["params"].is_object() || x["params"].size() != pf.size()) return false;
  for (auto it = x["params"].begin(); it != x["params"].end(); ++it)
    if (!pf.count(it.key())) return false;
  return true;
}

}  // namespace

std::vector<std::string> privacy_lint(const json& j) {
  std::vector<std::string> hits;
  lint(j, "", hits);
  return hits;
}

void validate_message(const json& j) {
  check_fields(j, {{"version", Type::integer}, {"kind", Type::string}, {"run_id", Type::string}, {"payload", Type::object}}, "message");
  if (j["version"].get<int>() != kWireVersion) throw WireError("version mismatch: got " + std::to_string(j["version"].get<int>()));
  if (auto hits = privacy_lint(j); !hits.empty()) throw WireError("private field on the wire: " + hits.front());
  const json& p = j["payload"];
  switch (message_kind_from_string(j["kind"].get<std::string>())) {
    case MessageKind::key:
      check_fields(p, {{"protocol", Type::string}, {"predicate", Type::string}, {"keys", Type::array}, {"variants", Type::array}}, "key");
      check_each(p["keys"], "key.keys", is_public_key);
      check_each(p["variants"], "key.variants", is_variant);
      if (p["keys"].size() != p["variants"].size()) throw WireError("key: keys and variants differ in length");
      break;
    case MessageKind::image:
      check_fields(p, {{"ys", Type::array}}, "image");
      check_each(p["ys"], "image.ys", is_zq_vector);
      break;
    case MessageKind::meas:
      check_fields(p, {{"bs", Type::array}}, "meas");
      check_each(p["bs"], "meas.bs", is_bit_string);
      break;
    case MessageKind::merge:
      check_fields(p, {{"s", Type::array}}, "merge");
      check_each(p["s"], "merge.s", is_bit_pair);
      break;
    case MessageKind::test_plan:
      check_fields(p, {{"T", Type::array}, {"M", Type::array}}, "test_plan");
      check_each(p["T"], "test_plan.T", is_index);
      check_each(p["M"], "test_plan.M", is_setting);
      if (p["T"].size() != p["M"].size()) throw WireError("test_plan: T and M differ in length");
      break;
    case MessageKind::test_results:
      check_fields(p, {{"outcomes", Type::array}}, "test_results");
      check_each(p["outcomes"], "test_results.outcomes", is_bit);
      break;
  }
}

json to_json(const WireMessage& m) {
  return {{"version", m.version}, {"kind", to_string(m.kind)}, {"run_id", m.run_id}, {"payload", m.payload}};
}

WireMessage message_from_json(const json& j) {
  validate_message(j);
  WireMessage m;
  m.version = j["version"].get<int>();
  m.kind = message_kind_from_string(j["kind"].get<std::string>());
  m.run_id = j["run_id"].get<std::string>();
  m.payload = j["payload"];
  return m;
}

std::string encode_frame(const std::string& body, std::size_t max_frame) {
  if (body.size() > max_frame) throw WireError("frame exceeds the maximum size");
  const auto n = static_cast<std::uint32_t>(body.size());
  std::string out(4, '\0');
  out[0] = static_cast<char>((n >> 24) & 0xff);
  out[1] = static_cast<char>((n >> 16) & 0xff);
  out[2] = static_cast<char>((n >> 8) & 0xff);
  out[3] = static_cast<char>(n & 0xff);
  return out + body;
}

std::uint32_t decode_frame_length(const unsigned char header[4], std::size_t max_frame) {
  const std::uint32_t n = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) | (std::uint32_t{header[2]} << 8) | header[3];
  if (n > max_frame) throw WireError("frame length " + std::to_string(n) + " exceeds the maximum size");
  return n;
}

void Channel::send(const WireMessage& m) {
  const json j = to_json(m);
  validate_message(j);
  std::string body = j.dump();
  log_.push_back(body);
  send_frame(body);
}

WireMessage Channel::recv() {
  std::string body = recv_frame();
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw WireError(std::string("malformed JSON frame: ") + e.what());
  }
  WireMessage m = message_from_json(j);
  log_.push_back(std::move(body));
  return m;
}

std::pair<std::unique_ptr<LocalChannel>, std::unique_ptr<LocalChannel>> LocalChannel::make_pair(std::size_t max_frame) {
  auto a = std::make_shared<Queue>(), b = std::make_shared<Queue>();
  return {std::unique_ptr<LocalChannel>(new LocalChannel(a, b, max_frame)), std::unique_ptr<LocalChannel>(new LocalChannel(b, a, max_frame))};
}

LocalChannel::~LocalChannel() {
  std::lock_guard<std::mutex> lock(out_->mu);
  out_->closed = true;
  out_->cv.notify_all();
}

void LocalChannel::send_frame(const std::string& body) {
  std::string frame = encode_frame(body, max_frame_);
  std::lock_guard<std::mutex> lock(out_->mu);
  if (out_->closed) throw WireError("channel closed");
  out_->frames.push_back(std::move(frame));
  out_->cv.notify_all();
}

std::string LocalChannel::recv_frame() {
  std::unique_lock<std::mutex> lock(in_->mu);
  in_->cv.wait(lock, [&] { return !in_->frames.empty() || in_->closed; });
  if (in_->frames.empty()) throw WireError("channel closed by peer");
  std::string frame = std::move(in_->frames.front());
  in_->frames.pop_front();
  if (frame.size() < 4) throw WireError("truncated frame");
  const std::uint32_t n = decode_frame_length(reinterpret_cast<const unsigned char*>(frame.data()), max_frame_);
  if (frame.size() != 4 + std::size_t{n}) throw WireError("frame length does not match its body");
  return frame.substr(4);
}

SocketChannel::SocketChannel(int fd, int timeout_ms, std::size_t max_frame) : fd_(fd), max_frame_(max_frame) {
  timeval tv{timeout_ms / 1000, (timeout_ms % 1000) * 1000};
  setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
  int one = 1;
  setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

SocketChannel::~SocketChannel() {
  if (fd_ >= 0) ::close(fd_);
}

void SocketChannel::send_raw(const std::string& bytes) {
  std::size_t off = 0;
  while (off < bytes.size()) {
    const ssize_t k = ::send(fd_, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
    if (k < 0 && errno == EINTR) continue;
    if (k < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) throw WireError("send timed out");
    if (k <= 0) throw WireError(std::string("send failed: ") + std::strerror(errno));
    off += static_cast<std::size_t>(k);
  }
}

void SocketChannel::send_frame(const std::string& body) { send_raw(encode_frame(body, max_frame_)); }

namespace {

void read_exact(int fd, char* buf, std::size_t n) {
  std::size_t off = 0;
  while (off < n) {
    const ssize_t k = ::recv(fd, buf + off, n - off, 0);
    if (k < 0 && errno == EINTR) continue;
    if (k < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) throw WireError("receive timed out");
    if (k < 0) throw WireError(std::string("receive failed: ") + std::strerror(errno));
    if (k == 0) throw WireError(off == 0 ? "connection closed" : "connection closed mid-frame");
    off += static_cast<std::size_t>(k);
  }
}

}  // namespace

std::string SocketChannel::recv_frame() {
  unsigned char header[4];
  read_exact(fd_, reinterpret_cast<char*>(header), 4);
  const std::uint32_t n = decode_frame_length(header, max_frame_);
  std::string body(n, '\0');
  if (n) read_exact(fd_, body.data(), n);
  return body;
}

Endpoint parse_endpoint(const std::string& s) {
  const auto colon = s.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("endpoint must look like host:port");
  Endpoint ep;
  if (colon > 0) ep.host = s.substr(0, colon);
  const std::string port = s.substr(colon + 1);
  if (port.empty() || port.find_first_not_of("0123456789") != std::string::npos) throw std::invalid_argument("bad port in endpoint: " + s);
  ep.port = std::stoi(port);
  if (ep.port < 0 || ep.port > 65535) throw std::invalid_argument("port out of range: " + s);
  return ep;
}

Endpoint endpoint_from_env(const std::string& fallback) {
  const char* env = std::getenv("QFACTORY_ENDPOINT");
  return parse_endpoint(env && *env ? std::string(env) : fallback);
}

std::unique_ptr<SocketChannel> connect_tcp(const Endpoint& ep, int timeout_ms) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = getaddrinfo(ep.host.c_str(), std::to_string(ep.port).c_str(), &hints, &res); rc != 0)
    throw WireError(std::string("cannot resolve ") + ep.host + ": " + gai_strerror(rc));
  int fd = -1;
  for (addrinfo* a = res; a; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  freeaddrinfo(res);
  if (fd < 0) throw WireError("cannot connect to " + ep.host + ":" + std::to_string(ep.port));
  return std::make_unique<SocketChannel>(fd, timeout_ms);
}

}  // namespace qf
