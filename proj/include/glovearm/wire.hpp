#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace glovearm::wire {

// Error codes carried by ERR replies.
inline constexpr int kBadRequest = 400;
inline constexpr int kNoSession = 401;
inline constexpr int kForbidden = 403;
inline constexpr int kStaleSeq = 409;
inline constexpr int kOutOfRange = 422;
inline constexpr int kSessionExpired = 440;

struct Hello {
  std::string client_id;
  bool operator==(const Hello&) const = default;
};
struct Welcome {
  std::string session;
  bool operator==(const Welcome&) const = default;
};
struct Cmd {
  std::uint64_t seq = 0;
  int x = 90, y = 90, z = 90;
  bool operator==(const Cmd&) const = default;
};
struct Ack {
  std::uint64_t seq = 0;
  bool operator==(const Ack&) const = default;
};
struct StateQuery {
  bool operator==(const StateQuery&) const = default;
};
struct State {
  int x = 90, y = 90, z = 90;
  double fk_x = 0.0, fk_y = 0.0, fk_z = 0.0;
  int flags = 0;  // bit 0 shoulder overload, bit 1 elbow overload, bit 2 grip closed
  bool operator==(const State&) const = default;
};
struct Error {
  int code = kBadRequest;
  std::string text;
  bool operator==(const Error&) const = default;
};

using Message = std::variant<Hello, Welcome, Cmd, Ack, StateQuery, State, Error>;

/// Decoding failure; `code` is the ERR code to answer with.
class WireError : public std::runtime_error {
 public:
  WireError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

/// One protocol line, without the trailing LF.
std::string encode(const Message& m);

/// Parses one line (a trailing "\n" or "\r\n" is tolerated). Throws WireError.
Message decode(std::string_view line);

}  // namespace glovearm::wire
