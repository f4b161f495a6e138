#include "glovearm/wire.hpp"

#include <gtest/gtest.h>

#include "support/messages.hpp"

namespace glovearm::wire {
namespace {

int error_code(std::string_view line) {
  try {
    decode(line);
  } catch (const WireError& e) {
    return e.code();
  }
  return 0;
}

TEST(Wire, EncodeGrammar) {
  EXPECT_EQ(encode(Cmd{7, 90, 45, 120}), "CMD 7 90 45 120");
  EXPECT_EQ(encode(Hello{"glove1"}), "HELLO glove1");
  EXPECT_EQ(encode(Welcome{"0a1b2c3d"}), "WELCOME 0a1b2c3d");
  EXPECT_EQ(encode(Ack{7}), "ACK 7");
  EXPECT_EQ(encode(StateQuery{}), "STATE?");
  EXPECT_EQ(encode(State{0, 0, 90, 66, 0, 11, 1}), "STATE 0 0 90 66 0 11 1");
  EXPECT_EQ(encode(State{90, 90, 90, 0, 0, 77.5, 4}), "STATE 90 90 90 0 0 77.5 4");
  EXPECT_EQ(encode(Error{401, "no session"}), "ERR 401 no session");
  EXPECT_EQ(encode(Error{400, "two\nlines"}), "ERR 400 two lines");
}

TEST(Wire, DecodeExamples) {
  EXPECT_EQ(decode("CMD 7 90 45 120"), Message(Cmd{7, 90, 45, 120}));
  EXPECT_EQ(decode("CMD 7 90 45 120\r\n"), Message(Cmd{7, 90, 45, 120}));
  EXPECT_EQ(decode("STATE?\n"), Message(StateQuery{}));
  EXPECT_EQ(decode("ERR 409 stale seq 3"), Message(Error{409, "stale seq 3"}));
}

TEST(Wire, ErrorsCarryCodes) {
  EXPECT_EQ(error_code("CMD 8 200 0 0"), kOutOfRange);
  EXPECT_EQ(error_code("CMD 8 0 -1 0"), kOutOfRange);
  EXPECT_EQ(error_code("STATE 181 0 0 0 0 0 0"), kOutOfRange);
  EXPECT_EQ(error_code("CMD 8 0 0"), kBadRequest);
  EXPECT_EQ(error_code("CMD x 0 0 0"), kBadRequest);
  EXPECT_EQ(error_code("FLY 1 2"), kBadRequest);
  EXPECT_EQ(error_code(""), kBadRequest);
  EXPECT_EQ(error_code("HELLO"), kBadRequest);
  EXPECT_EQ(error_code("STATE? extra"), kBadRequest);
  EXPECT_EQ(error_code("STATE 1 2 3 0 0 0 8"), kBadRequest);
}

TEST(Wire, RandomRoundTrip) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 5000; ++i) {
    const auto m = testing::random_message(rng);
    const auto line = encode(m);
    EXPECT_EQ(line.find('\n'), std::string::npos);
    EXPECT_EQ(decode(line), m) << line;
  }
}

}  // namespace
}  // namespace glovearm::wire
