#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace glovearm::ws {

enum class Opcode : std::uint8_t { Continuation = 0x0, Text = 0x1, Binary = 0x2, Close = 0x8, Ping = 0x9, Pong = 0xA };

struct Frame {
  bool fin = true;
  Opcode opcode = Opcode::Text;
  bool masked = false;
  std::string payload;  // unmasked
};

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMaxPayload = 1 << 16;

std::string base64_encode(std::string_view bytes);

/// base64(SHA-1(key + RFC 6455 GUID)).
std::string accept_key(std::string_view client_key);

/// Serializes one final frame. Client-to-server frames must pass a mask.
std::string encode_frame(Opcode op, std::string_view payload,
                         std::optional<std::array<std::uint8_t, 4>> mask = std::nullopt);

/// Removes and returns one complete frame from the front of `buffer`, or nullopt when
/// more bytes are needed. Throws ProtocolError on oversize payloads or reserved bits.
std::optional<Frame> decode_frame(std::string& buffer);

/// Value of an HTTP header (case-insensitive name) in a raw request head.
std::optional<std::string> header_value(std::string_view head, std::string_view name);

/// 101 response for a valid upgrade request, or throws ProtocolError.
std::string handshake_response(std::string_view request_head);

}  // namespace glovearm::ws
