#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace glovearm::net {

class NetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

/// "host:port" or ":port" / "port" (host defaults to 127.0.0.1).
Endpoint parse_endpoint(std::string_view text);

/// Owning socket descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& o) noexcept : fd_(o.release()) {}
  Socket& operator=(Socket&& o) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release() {
    const int fd = fd_;
    fd_ = -1;
    return fd;
  }
  void close();
  /// Wakes any thread blocked on this socket without closing the descriptor.
  void shutdown() const;

 private:
  int fd_ = -1;
};

Socket listen_tcp(const Endpoint& ep, int backlog = 64);
std::uint16_t local_port(const Socket& s);
Socket accept_tcp(const Socket& listener);
Socket connect_tcp(const Endpoint& ep);
void set_nodelay(const Socket& s);

/// Writes all bytes; throws NetError on failure.
void send_all(const Socket& s, std::string_view bytes);

/// Reads up to `max` bytes, waiting at most `timeout` (negative = forever). Returns
/// nullopt on timeout and an empty string on orderly shutdown.
std::optional<std::string> recv_some(const Socket& s, std::chrono::milliseconds timeout, std::size_t max = 4096);

/// Buffered LF-delimited reader.
class LineReader {
 public:
  explicit LineReader(const Socket& s, std::size_t max_line = 4096) : sock_(s), max_line_(max_line) {}

  /// Next line without its LF; nullopt on EOF or timeout (see `timed_out()`).
  std::optional<std::string> read_line(std::chrono::milliseconds timeout = std::chrono::milliseconds(-1));
  bool timed_out() const { return timed_out_; }

  /// Raw bytes already buffered past the last line.
  std::string& buffer() { return buf_; }

 private:
  const Socket& sock_;
  std::size_t max_line_;
  std::string buf_;
  bool timed_out_ = false;
};

/// Blocking client for the line protocol.
class LineClient {
 public:
  explicit LineClient(const Endpoint& ep);

  void send_line(std::string_view line);
  std::optional<std::string> read_line(std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));
  /// send_line followed by read_line; throws NetError when no reply arrives.
  std::string request(std::string_view line, std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));
  const Socket& socket() const { return sock_; }

 private:
  Socket sock_;
  LineReader reader_;
};

/// Minimal RFC 6455 client, text frames only.
class WsClient {
 public:
  WsClient(const Endpoint& ep, std::string_view path = "/");

  void send_text(std::string_view text);
  /// Next text message; nullopt on timeout or close.
  std::optional<std::string> recv_text(std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));
  void close();

 private:
  Socket sock_;
  std::string buf_;
  std::uint32_t mask_seed_ = 0x9e3779b9u;
};

}  // namespace glovearm::net
