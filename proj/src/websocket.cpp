#include "glovearm/websocket.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <cctype>

namespace glovearm::ws {

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string accept_key(std::string_view client_key) {
  static constexpr std::string_view kGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
  std::string joined(client_key);
  joined += kGuid;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(joined.data()), joined.size(), digest);
  return base64_encode(std::string_view(reinterpret_cast<const char*>(digest), SHA_DIGEST_LENGTH));
}

std::string encode_frame(Opcode op, std::string_view payload, std::optional<std::array<std::uint8_t, 4>> mask) {
  std::string out;
  out.reserve(payload.size() + 14);
  out.push_back(static_cast<char>(0x80 | static_cast<std::uint8_t>(op)));
  const std::uint8_t mask_bit = mask ? 0x80 : 0x00;
  const std::size_t len = payload.size();
  if (len < 126) {
    out.push_back(static_cast<char>(mask_bit | len));
  } else if (len <= 0xFFFF) {
    out.push_back(static_cast<char>(mask_bit | 126));
    out.push_back(static_cast<char>((len >> 8) & 0xFF));
    out.push_back(static_cast<char>(len & 0xFF));
  } else {
    out.push_back(static_cast<char>(mask_bit | 127));
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((len >> shift) & 0xFF));
  }
  if (mask) {
    out.append(reinterpret_cast<const char*>(mask->data()), 4);
    for (std::size_t i = 0; i < len; ++i) out.push_back(static_cast<char>(payload[i] ^ (*mask)[i % 4]));
  } else {
    out.append(payload);
  }
  return out;
}

std::optional<Frame> decode_frame(std::string& buffer) {
  const auto byte = [&](std::size_t i) { return static_cast<std::uint8_t>(buffer[i]); };
  if (buffer.size() < 2) return std::nullopt;
  if (byte(0) & 0x70) throw ProtocolError("websocket: reserved bits set");

  Frame f;
  f.fin = (byte(0) & 0x80) != 0;
  f.opcode = static_cast<Opcode>(byte(0) & 0x0F);
  f.masked = (byte(1) & 0x80) != 0;
  std::uint64_t len = byte(1) & 0x7F;
  std::size_t pos = 2;
  if (len == 126) {
    if (buffer.size() < 4) return std::nullopt;
    len = (std::uint64_t{byte(2)} << 8) | byte(3);
    pos = 4;
  } else if (len == 127) {
    if (buffer.size() < 10) return std::nullopt;
    len = 0;
    for (std::size_t i = 2; i < 10; ++i) len = (len << 8) | byte(i);
    pos = 10;
  }
  if (len > kMaxPayload) throw ProtocolError("websocket: payload too large");

  std::array<std::uint8_t, 4> mask{};
  if (f.masked) {
    if (buffer.size() < pos + 4) return std::nullopt;
    for (std::size_t i = 0; i < 4; ++i) mask[i] = byte(pos + i);
    pos += 4;
  }
  if (buffer.size() < pos + len) return std::nullopt;

  f.payload = buffer.substr(pos, len);
  if (f.masked) {
    for (std::size_t i = 0; i < f.payload.size(); ++i) f.payload[i] = static_cast<char>(f.payload[i] ^ mask[i % 4]);
  }
  buffer.erase(0, pos + len);
  return f;
}

std::optional<std::string> header_value(std::string_view head, std::string_view name) {
  const auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
  };
  const std::string want = lower(name);
  std::size_t pos = 0;
  while (pos < head.size()) {
    std::size_t eol = head.find("\r\n", pos);
    if (eol == std::string_view::npos) eol = head.size();
    const std::string_view line = head.substr(pos, eol - pos);
    const auto colon = line.find(':');
    if (colon != std::string_view::npos && lower(line.substr(0, colon)) == want) {
      std::string_view v = line.substr(colon + 1);
      while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
      while (!v.empty() && (v.back() == ' ' || v.back() == '\t')) v.remove_suffix(1);
      return std::string(v);
    }
    pos = eol + 2;
  }
  return std::nullopt;
}

std::string handshake_response(std::string_view request_head) {
  if (request_head.substr(0, 4) != "GET ") throw ProtocolError("websocket: expected GET request");
  const auto key = header_value(request_head, "Sec-WebSocket-Key");
  if (!key || key->empty()) throw ProtocolError("websocket: missing Sec-WebSocket-Key");
  const auto upgrade = header_value(request_head, "Upgrade");
  if (!upgrade) throw ProtocolError("websocket: missing Upgrade header");
  std::string up = *upgrade;
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::tolower(c); });
  if (up != "websocket") throw ProtocolError("websocket: Upgrade is not websocket");
  return "HTTP/1.1 101 Switching Protocols\r\n"
         "Upgrade: websocket\r\n"
         "Connection: Upgrade\r\n"
         "Sec-WebSocket-Accept: " +
         accept_key(*key) + "\r\n\r\n";
}

}  // namespace glovearm::ws
