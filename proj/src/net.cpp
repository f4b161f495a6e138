#include "glovearm/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <random>

#include "glovearm/websocket.hpp"

namespace glovearm::net {
namespace {

[[noreturn]] void fail(const std::string& what) { throw NetError(what + ": " + std::strerror(errno)); }

sockaddr_in resolve(const Endpoint& ep) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string host = ep.host.empty() ? "0.0.0.0" : ep.host;
  if (int rc = ::getaddrinfo(host.c_str(), nullptr, &hints, &res); rc != 0) {
    throw NetError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  sockaddr_in addr = *reinterpret_cast<sockaddr_in*>(res->ai_addr);
  ::freeaddrinfo(res);
  addr.sin_port = htons(ep.port);
  return addr;
}

}  // namespace

Endpoint parse_endpoint(std::string_view text) {
  Endpoint ep;
  std::string_view port = text;
  if (const auto colon = text.rfind(':'); colon != std::string_view::npos) {
    if (colon > 0) ep.host = std::string(text.substr(0, colon));
    port = text.substr(colon + 1);
  }
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc{} || ptr != port.data() + port.size() || value > 65535) {
    throw NetError("bad endpoint '" + std::string(text) + "'");
  }
  ep.port = static_cast<std::uint16_t>(value);
  return ep;
}

Socket& Socket::operator=(Socket&& o) noexcept {
  if (this != &o) {
    close();
    fd_ = o.release();
  }
  return *this;
}

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Socket::shutdown() const {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

Socket listen_tcp(const Endpoint& ep, int backlog) {
  Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!s.valid()) fail("socket");
  const int one = 1;
  ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  const sockaddr_in addr = resolve(ep);
  if (::bind(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    fail("bind " + ep.host + ":" + std::to_string(ep.port));
  }
  if (::listen(s.fd(), backlog) != 0) fail("listen");
  return s;
}

std::uint16_t local_port(const Socket& s) {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  if (::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len) != 0) fail("getsockname");
  return ntohs(addr.sin_port);
}

Socket accept_tcp(const Socket& listener) {
  while (true) {
    const int fd = ::accept4(listener.fd(), nullptr, nullptr, SOCK_CLOEXEC);
    if (fd >= 0) return Socket(fd);
    if (errno == EINTR || errno == ECONNABORTED) continue;
    fail("accept");
  }
}

Socket connect_tcp(const Endpoint& ep) {
  Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!s.valid()) fail("socket");
  const sockaddr_in addr = resolve(ep);
  if (::connect(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    fail("connect " + ep.host + ":" + std::to_string(ep.port));
  }
  set_nodelay(s);
  return s;
}

void set_nodelay(const Socket& s) {
  const int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

void send_all(const Socket& s, std::string_view bytes) {
  while (!bytes.empty()) {
    const ssize_t n = ::send(s.fd(), bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("send");
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

std::optional<std::string> recv_some(const Socket& s, std::chrono::milliseconds timeout, std::size_t max) {
  if (timeout.count() >= 0) {
    pollfd pfd{s.fd(), POLLIN, 0};
    int rc = 0;
    do {
      rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
    } while (rc < 0 && errno == EINTR);
    if (rc < 0) fail("poll");
    if (rc == 0) return std::nullopt;
  }
  std::string buf(max, '\0');
  while (true) {
    const ssize_t n = ::recv(s.fd(), buf.data(), max, 0);
    if (n >= 0) {
      buf.resize(static_cast<std::size_t>(n));
      return buf;
    }
    if (errno == EINTR) continue;
    if (errno == ECONNRESET) return std::string();
    fail("recv");
  }
}

std::optional<std::string> LineReader::read_line(std::chrono::milliseconds timeout) {
  timed_out_ = false;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    if (const auto nl = buf_.find('\n'); nl != std::string::npos) {
      std::string line = buf_.substr(0, nl);
      buf_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (buf_.size() > max_line_) throw NetError("line exceeds " + std::to_string(max_line_) + " bytes");
    auto wait = timeout;
    if (timeout.count() >= 0) {
      wait = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (wait.count() < 0) wait = std::chrono::milliseconds(0);
    }
    const auto chunk = recv_some(sock_, wait);
    if (!chunk) {
      timed_out_ = true;
      return std::nullopt;
    }
    if (chunk->empty()) return std::nullopt;
    buf_ += *chunk;
  }
}

LineClient::LineClient(const Endpoint& ep) : sock_(connect_tcp(ep)), reader_(sock_) {}

void LineClient::send_line(std::string_view line) {
  std::string out(line);
  out.push_back('\n');
  send_all(sock_, out);
}

std::optional<std::string> LineClient::read_line(std::chrono::milliseconds timeout) {
  return reader_.read_line(timeout);
}

std::string LineClient::request(std::string_view line, std::chrono::milliseconds timeout) {
  send_line(line);
  auto reply = read_line(timeout);
  if (!reply) throw NetError("no reply to '" + std::string(line) + "'");
  return *reply;
}

WsClient::WsClient(const Endpoint& ep, std::string_view path) : sock_(connect_tcp(ep)) {
  std::random_device rd;
  mask_seed_ = rd();
  std::string nonce(16, '\0');
  for (auto& c : nonce) c = static_cast<char>(rd() & 0xFF);
  const std::string key = ws::base64_encode(nonce);

  const std::string request = "GET " + std::string(path) +
                              " HTTP/1.1\r\n"
                              "Host: " +
                              ep.host + ":" + std::to_string(ep.port) +
                              "\r\n"
                              "Upgrade: websocket\r\n"
                              "Connection: Upgrade\r\n"
                              "Sec-WebSocket-Key: " +
                              key +
                              "\r\n"
                              "Sec-WebSocket-Version: 13\r\n\r\n";
  send_all(sock_, request);

  while (buf_.find("\r\n\r\n") == std::string::npos) {
    const auto chunk = recv_some(sock_, std::chrono::milliseconds(5000));
    if (!chunk || chunk->empty()) throw NetError("websocket handshake: no response");
    buf_ += *chunk;
  }
  const auto end = buf_.find("\r\n\r\n");
  const std::string head = buf_.substr(0, end);
  buf_.erase(0, end + 4);
  if (head.rfind("HTTP/1.1 101", 0) != 0) throw NetError("websocket handshake rejected: " + head);
  const auto accept = ws::header_value(head, "Sec-WebSocket-Accept");
  if (!accept || *accept != ws::accept_key(key)) throw NetError("websocket handshake: bad accept key");
}

void WsClient::send_text(std::string_view text) {
  mask_seed_ = mask_seed_ * 1664525u + 1013904223u;
  const std::array<std::uint8_t, 4> mask{static_cast<std::uint8_t>(mask_seed_), static_cast<std::uint8_t>(mask_seed_ >> 8),
                                         static_cast<std::uint8_t>(mask_seed_ >> 16),
                                         static_cast<std::uint8_t>(mask_seed_ >> 24)};
  send_all(sock_, ws::encode_frame(ws::Opcode::Text, text, mask));
}

std::optional<std::string> WsClient::recv_text(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    while (auto frame = ws::decode_frame(buf_)) {
      if (frame->opcode == ws::Opcode::Text) return frame->payload;
      if (frame->opcode == ws::Opcode::Close) return std::nullopt;
    }
    auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (wait.count() < 0) return std::nullopt;
    const auto chunk = recv_some(sock_, wait);
    if (!chunk || chunk->empty()) return std::nullopt;
    buf_ += *chunk;
  }
}

void WsClient::close() {
  if (!sock_.valid()) return;
  try {
    send_all(sock_, ws::encode_frame(ws::Opcode::Close, "", std::array<std::uint8_t, 4>{1, 2, 3, 4}));
  } catch (const NetError&) {
  }
  sock_.close();
}

}  // namespace glovearm::net
