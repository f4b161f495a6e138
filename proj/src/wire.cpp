#include "glovearm/wire.hpp"

#include <charconv>
#include <cmath>
#include <vector>

namespace glovearm::wire {
namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

std::string fmt_double(double v) {
  if (v == 0.0) v = 0.0;  // no "-0" on the wire
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::uint64_t parse_u64(std::string_view tok, const char* field) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw WireError(kBadRequest, std::string("bad ") + field + " '" + std::string(tok) + "'");
  }
  return v;
}

int parse_int(std::string_view tok, const char* field) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw WireError(kBadRequest, std::string("bad ") + field + " '" + std::string(tok) + "'");
  }
  return v;
}

int parse_degrees(std::string_view tok) {
  const int v = parse_int(tok, "degrees");
  if (v < 0 || v > 180) throw WireError(kOutOfRange, "degrees out of range: " + std::to_string(v));
  return v;
}

double parse_double(std::string_view tok, const char* field) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw WireError(kBadRequest, std::string("bad ") + field + " '" + std::string(tok) + "'");
  }
  return v;
}

void expect_arity(const std::vector<std::string_view>& toks, std::size_t n) {
  if (toks.size() != n) {
    throw WireError(kBadRequest, std::string(toks[0]) + " expects " + std::to_string(n - 1) + " arguments, got " +
                                     std::to_string(toks.size() - 1));
  }
}

}  // namespace

std::string encode(const Message& m) {
  return std::visit(
      Overloaded{
          [](const Hello& h) { return "HELLO " + h.client_id; },
          [](const Welcome& w) { return "WELCOME " + w.session; },
          [](const Cmd& c) {
            return "CMD " + std::to_string(c.seq) + " " + std::to_string(c.x) + " " + std::to_string(c.y) + " " +
                   std::to_string(c.z);
          },
          [](const Ack& a) { return "ACK " + std::to_string(a.seq); },
          [](const StateQuery&) { return std::string("STATE?"); },
          [](const State& s) {
            return "STATE " + std::to_string(s.x) + " " + std::to_string(s.y) + " " + std::to_string(s.z) + " " +
                   fmt_double(s.fk_x) + " " + fmt_double(s.fk_y) + " " + fmt_double(s.fk_z) + " " +
                   std::to_string(s.flags);
          },
          [](const Error& e) {
            std::string text = e.text;
            for (char& ch : text) {
              if (ch == '\n' || ch == '\r') ch = ' ';
            }
            return "ERR " + std::to_string(e.code) + " " + text;
          },
      },
      m);
}

Message decode(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

  const auto toks = split(line);
  if (toks.empty()) throw WireError(kBadRequest, "empty line");
  const std::string_view verb = toks[0];

  if (verb == "HELLO") {
    expect_arity(toks, 2);
    return Hello{std::string(toks[1])};
  }
  if (verb == "WELCOME") {
    expect_arity(toks, 2);
    return Welcome{std::string(toks[1])};
  }
  if (verb == "CMD") {
    expect_arity(toks, 5);
    Cmd c;
    c.seq = parse_u64(toks[1], "seq");
    c.x = parse_degrees(toks[2]);
    c.y = parse_degrees(toks[3]);
    c.z = parse_degrees(toks[4]);
    return c;
  }
  if (verb == "ACK") {
    expect_arity(toks, 2);
    return Ack{parse_u64(toks[1], "seq")};
  }
  if (verb == "STATE?") {
    expect_arity(toks, 1);
    return StateQuery{};
  }
  if (verb == "STATE") {
    expect_arity(toks, 8);
    State s;
    s.x = parse_degrees(toks[1]);
    s.y = parse_degrees(toks[2]);
    s.z = parse_degrees(toks[3]);
    s.fk_x = parse_double(toks[4], "fk_x");
    s.fk_y = parse_double(toks[5], "fk_y");
    s.fk_z = parse_double(toks[6], "fk_z");
    s.flags = parse_int(toks[7], "flags");
    if (s.flags < 0 || s.flags > 7) throw WireError(kBadRequest, "bad flags");
    return s;
  }
  if (verb == "ERR") {
    if (toks.size() < 2) throw WireError(kBadRequest, "ERR expects a code");
    Error e;
    e.code = parse_int(toks[1], "code");
    // Text is everything after "ERR <code> ", spaces included.
    const std::size_t code_end = static_cast<std::size_t>(toks[1].data() + toks[1].size() - line.data());
    e.text = code_end < line.size() ? std::string(line.substr(code_end + 1)) : std::string();
    return e;
  }
  throw WireError(kBadRequest, "unknown verb '" + std::string(verb) + "'");
}

}  // namespace glovearm::wire
