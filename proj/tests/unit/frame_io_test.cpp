#include "glovearm/frame_io.hpp"

#include <gtest/gtest.h>

#include <random>
#include <string>

namespace glovearm {
namespace {

std::vector<std::uint8_t> bytes_of(const std::string& header, std::vector<std::uint8_t> payload) {
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

SynthScene five_disks() {
  SynthScene s;
  s.led_centers = {{{50, 50}, {100, 50}, {150, 50}, {75, 120}, {125, 120}}};
  return s;
}

TEST(LoadPgm, CopiesPixelsVerbatim) {
  const auto frame = load_pgm(bytes_of("P5 2 2 255 ", {0, 255, 128, 7}), 1);
  EXPECT_EQ(frame.width, 2);
  EXPECT_EQ(frame.height, 2);
  EXPECT_EQ(frame.seq, 0u);
  EXPECT_EQ(frame.pixels, (std::vector<std::uint8_t>{0, 255, 128, 7}));
}

TEST(LoadPgm, AllBlack16x16) {
  const auto frame = load_pgm(bytes_of("P5 16 16 255\n", std::vector<std::uint8_t>(256, 0)));
  EXPECT_EQ(frame.width, 16);
  EXPECT_EQ(frame.pixels, std::vector<std::uint8_t>(256, 0));
}

TEST(LoadPgm, DistinctErrors) {
  const auto kind_of = [](const std::vector<std::uint8_t>& b, int min_side = 1) {
    try {
      load_pgm(b, min_side);
    } catch (const PgmError& e) {
      return e.kind();
    }
    ADD_FAILURE() << "no error";
    return PgmError::Kind::BadHeader;
  };
  EXPECT_EQ(kind_of(bytes_of("P5 4 4 255\n", std::vector<std::uint8_t>(10, 0))), PgmError::Kind::Truncated);
  EXPECT_EQ(kind_of(bytes_of("P2 4 4 255\n", std::vector<std::uint8_t>(16, 0))), PgmError::Kind::BadMagic);
  EXPECT_EQ(kind_of(bytes_of("P5 4 4 65535\n", std::vector<std::uint8_t>(32, 0))), PgmError::Kind::BadMaxval);
  EXPECT_EQ(kind_of(bytes_of("P5 4 x 255\n", {})), PgmError::Kind::BadHeader);
  EXPECT_EQ(kind_of(bytes_of("P5 8 8 255\n", std::vector<std::uint8_t>(64, 0)), kMinFrameSide),
            PgmError::Kind::TooSmall);
}

TEST(LoadPgm, DefaultRejectsFramesBelow16) {
  EXPECT_THROW(load_pgm(bytes_of("P5 2 2 255 ", {0, 255, 128, 7})), PgmError);
}

TEST(SavePgm, AllWhitePayload) {
  GrayFrame f{16, 16, std::vector<std::uint8_t>(256, 255), 0};
  const auto bytes = save_pgm(f);
  const std::string header = "P5\n16 16\n255\n";
  ASSERT_EQ(bytes.size(), header.size() + 256);
  EXPECT_TRUE(std::equal(header.begin(), header.end(), bytes.begin()));
  EXPECT_TRUE(std::all_of(bytes.begin() + header.size(), bytes.end(), [](auto b) { return b == 255; }));
}

TEST(SavePgm, HeaderCarriesDimensions) {
  GrayFrame f{2, 3, std::vector<std::uint8_t>(6, 9), 0};
  const auto bytes = save_pgm(f);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 7), "P5\n2 3\n");
}

TEST(SavePgm, RoundTripIsIdentity) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    GrayFrame f;
    f.width = 16 + static_cast<int>(rng() % 40);
    f.height = 16 + static_cast<int>(rng() % 40);
    f.pixels.resize(static_cast<std::size_t>(f.width) * f.height);
    for (auto& p : f.pixels) p = static_cast<std::uint8_t>(rng());
    const auto back = load_pgm(save_pgm(f));
    EXPECT_EQ(back.width, f.width);
    EXPECT_EQ(back.height, f.height);
    EXPECT_EQ(back.pixels, f.pixels);
  }
}

TEST(SynthFrame, UnitGainGivesBinaryDisks) {
  const auto scene = five_disks();
  const auto f = synth_frame(scene, 200, 200);
  int lit = 0;
  for (int y = 0; y < 200; ++y) {
    for (int x = 0; x < 200; ++x) {
      bool inside = false;
      for (const auto& c : scene.led_centers) inside |= std::hypot(x + 0.5 - c.x, y + 0.5 - c.y) <= 5.0;
      EXPECT_EQ(f.at(x, y), inside ? 255 : 0) << x << "," << y;
      lit += inside;
    }
  }
  EXPECT_GT(lit, 5 * 70);
}

TEST(SynthFrame, GainAndOffsetArithmetic) {
  auto scene = five_disks();
  scene.gain = 0.5;
  scene.offset = 20;
  const auto f = synth_frame(scene, 200, 200);
  EXPECT_EQ(f.at(50, 50), 147);
  EXPECT_EQ(f.at(0, 0), 20);
}

TEST(SynthFrame, DeterministicForSeed) {
  auto scene = five_disks();
  scene.noise_amplitude = 10;
  scene.seed = 1234;
  EXPECT_EQ(synth_frame(scene, 200, 200).pixels, synth_frame(scene, 200, 200).pixels);
  auto other = scene;
  other.seed = 1235;
  EXPECT_NE(synth_frame(scene, 200, 200).pixels, synth_frame(other, 200, 200).pixels);
}

TEST(SynthFrame, NoiseStaysWithinAmplitude) {
  auto scene = five_disks();
  scene.gain = 0.5;
  scene.offset = 100;
  scene.noise_amplitude = 7;
  const auto f = synth_frame(scene, 200, 200);
  for (auto p : f.pixels) {
    const bool bg = p >= 93 && p <= 107;
    const bool disk = p >= 220 && p <= 234;
    EXPECT_TRUE(bg || disk) << int(p);
  }
}

TEST(SynthFrame, RejectsBadScenes) {
  auto scene = five_disks();
  scene.gain = 0;
  EXPECT_THROW(synth_frame(scene, 200, 200), SceneError);
  scene = five_disks();
  scene.led_centers[0] = {3, 50};
  EXPECT_THROW(synth_frame(scene, 200, 200), SceneError);
  scene = five_disks();
  scene.led_centers[0] = {250, 50};
  EXPECT_THROW(synth_frame(scene, 200, 200), SceneError);
}

TEST(Lcg64, DocumentedSequence) {
  Lcg64 rng(0);
  EXPECT_EQ(rng.next_u64(), 1442695040888963407ULL);
  EXPECT_EQ(rng.next_u64(), 1442695040888963407ULL * 6364136223846793005ULL + 1442695040888963407ULL);
  Lcg64 u(99);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.next_symmetric(3.0);
    EXPECT_GE(v, -3.0);
    EXPECT_LT(v, 3.0);
  }
}

}  // namespace
}  // namespace glovearm
