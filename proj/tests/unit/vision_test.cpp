#include "glovearm/vision.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support/scenes.hpp"

namespace glovearm {
namespace {

GrayFrame gradient_frame(std::uint8_t lo, std::uint8_t hi) {
  GrayFrame f{16, 16, std::vector<std::uint8_t>(256, lo), 0};
  f.pixels[1] = hi;
  return f;
}

TEST(NormalizeAndThreshold, StretchArithmetic) {
  auto f = gradient_frame(10, 200);
  f.pixels[2] = 190;  // (190-10)*255/190 = 241.6
  f.pixels[3] = 189;  // (189-10)*255/190 = 240.2
  f.pixels[4] = 188;  // 238.9
  const auto b = normalize_and_threshold(f);
  EXPECT_FALSE(b.at(0, 0));
  EXPECT_TRUE(b.at(1, 0));
  EXPECT_TRUE(b.at(2, 0));
  EXPECT_TRUE(b.at(3, 0));
  EXPECT_FALSE(b.at(4, 0));
  EXPECT_EQ(b.bits.size(), f.pixels.size());
}

TEST(NormalizeAndThreshold, UniformFrameIsRejected) {
  GrayFrame f{16, 16, std::vector<std::uint8_t>(256, 77), 0};
  EXPECT_THROW(normalize_and_threshold(f), UniformFrameError);
}

TEST(NormalizeAndThreshold, IlluminationInvariance) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    GrayFrame f{32, 32, std::vector<std::uint8_t>(1024), 0};
    for (auto& p : f.pixels) p = static_cast<std::uint8_t>(rng() % 120);
    const int b = static_cast<int>(rng() % 10);
    // Integer-exact transform: p -> 2p + b keeps every stretched value identical.
    GrayFrame g = f;
    for (auto& p : g.pixels) p = static_cast<std::uint8_t>(2 * p + b);
    EXPECT_EQ(normalize_and_threshold(f).bits, normalize_and_threshold(g).bits);
  }
}

TEST(HoughCircles, FindsFiveDisks) {
  SynthScene scene;
  scene.led_centers = {{{50, 50}, {100, 50}, {150, 50}, {75, 120}, {125, 120}}};
  const auto bin = normalize_and_threshold(synth_frame(scene, 200, 200));
  const auto circles = hough_circles(bin, 3, 8);
  ASSERT_GE(circles.size(), 5u);
  for (const auto& truth : scene.led_centers) EXPECT_LE(testing::nearest_distance(circles, 5, truth), 2.0);
  for (std::size_t i = 1; i < circles.size(); ++i) EXPECT_GE(circles[i - 1].score, circles[i].score);
}

TEST(HoughCircles, AllBlackGivesNothing) {
  BinaryFrame b{64, 64, std::vector<std::uint8_t>(64 * 64, 0)};
  EXPECT_TRUE(hough_circles(b, 3, 8).empty());
}

TEST(HoughCircles, SingleDiskRadius) {
  BinaryFrame b{64, 64, std::vector<std::uint8_t>(64 * 64, 0)};
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) b.bits[y * 64 + x] = std::hypot(x + 0.5 - 30, y + 0.5 - 30) <= 6.0;
  }
  const auto circles = hough_circles(b, 3, 10);
  ASSERT_FALSE(circles.empty());
  EXPECT_GE(circles[0].r, 5);
  EXPECT_LE(circles[0].r, 7);
  EXPECT_LE(std::hypot(circles[0].cx - 30, circles[0].cy - 30), 2.0);
}

TEST(HoughCircles, NoTwoCentersWithinRMinAtSameRadius) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    auto scene = testing::random_scene(rng, 160, 120);
    scene.noise_amplitude = 10;
    scene.seed = trial;
    const auto circles = hough_circles(normalize_and_threshold(synth_frame(scene, 160, 120)), 3, 12);
    for (std::size_t i = 0; i < circles.size(); ++i) {
      for (std::size_t j = i + 1; j < circles.size(); ++j) {
        if (circles[i].r != circles[j].r) continue;
        EXPECT_GT(std::hypot(circles[i].cx - circles[j].cx, circles[i].cy - circles[j].cy), 3.0);
      }
    }
  }
}

TEST(HoughCircles, RejectsBadRadiusRange) {
  BinaryFrame b{32, 32, std::vector<std::uint8_t>(32 * 32, 0)};
  EXPECT_THROW(hough_circles(b, 0, 4), std::invalid_argument);
  EXPECT_THROW(hough_circles(b, 5, 4), std::invalid_argument);
  EXPECT_THROW(hough_circles(b, 3, 17), std::invalid_argument);
}

TEST(HoughCircles, RecoversSeededScenes) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    auto scene = testing::random_scene(rng, 320, 240);
    scene.gain = std::uniform_real_distribution<double>(0.7, 1.3)(rng);
    scene.noise_amplitude = std::uniform_real_distribution<double>(0.0, 10.0)(rng);
    scene.offset = std::uniform_real_distribution<double>(0.0, 30.0)(rng);
    scene.seed = static_cast<std::uint64_t>(trial);
    const auto circles = hough_circles(normalize_and_threshold(synth_frame(scene, 320, 240)), 3, 12);
    const auto tips = select_fingertips(circles);
    for (const auto& truth : scene.led_centers) {
      EXPECT_LE(testing::nearest_distance(tips, 5, truth), 2.0) << "trial " << trial;
    }
  }
}

Circle circle(double cx, double cy, int r, int score = 10) { return {cx, cy, r, score}; }

TEST(SelectFingertips, ClosestToMedianRadius) {
  const std::vector<Circle> c = {circle(0, 0, 5), circle(10, 0, 5), circle(20, 0, 9), circle(30, 0, 5),
                                 circle(40, 0, 2), circle(50, 0, 5), circle(60, 0, 5)};
  const auto tips = select_fingertips(c);
  ASSERT_EQ(tips.size(), 5u);
  for (const auto& t : tips) EXPECT_EQ(t.r, 5);
}

TEST(SelectFingertips, ExactlyFiveReturnedAsIs) {
  const std::vector<Circle> c = {circle(0, 0, 3), circle(10, 0, 12), circle(20, 0, 7), circle(30, 0, 4),
                                 circle(40, 0, 9)};
  auto tips = select_fingertips(c);
  const auto key = [](const Circle& a, const Circle& b) { return a.cx < b.cx; };
  std::sort(tips.begin(), tips.end(), key);
  EXPECT_EQ(tips, c);
}

TEST(SelectFingertips, FewerThanFiveIsTrackingLoss) {
  const std::vector<Circle> c = {circle(0, 0, 5), circle(10, 0, 5), circle(20, 0, 5), circle(30, 0, 5)};
  EXPECT_THROW(select_fingertips(c), TrackingLostError);
}

TEST(SelectFingertips, TiesPreferScoreThenPosition) {
  const std::vector<Circle> c = {circle(5, 9, 5, 10), circle(5, 1, 5, 10), circle(0, 0, 5, 30), circle(0, 0, 6, 99),
                                 circle(7, 0, 4, 50), circle(1, 1, 4, 50)};
  // median radius 5; three at distance 0, then four at distance 1 broken by score, then (cy,cx).
  const auto tips = select_fingertips(c);
  EXPECT_EQ(tips[0], c[2]);
  EXPECT_EQ(tips[1], c[1]);
  EXPECT_EQ(tips[2], c[0]);
  EXPECT_EQ(tips[3], c[3]);
  EXPECT_EQ(tips[4], c[4]);
}

TEST(SelectFingertips, OutputIsSubsetOfInput) {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Circle> c;
    const int n = 5 + static_cast<int>(rng() % 10);
    for (int i = 0; i < n; ++i) c.push_back(circle(rng() % 300, rng() % 200, 3 + rng() % 10, rng() % 100));
    const auto tips = select_fingertips(c);
    ASSERT_EQ(tips.size(), 5u);
    for (const auto& t : tips) EXPECT_NE(std::find(c.begin(), c.end(), t), c.end());
  }
}

std::vector<Circle> tips_at(std::vector<std::pair<double, double>> pts) {
  std::vector<Circle> out;
  for (auto [x, y] : pts) out.push_back(circle(x, y, 5));
  return out;
}

TEST(HandCenter, FormulasOnSpreadTips) {
  const auto hc = hand_center(tips_at({{10, 5}, {20, 10}, {30, 15}, {40, 20}, {50, 25}}), 1);
  EXPECT_DOUBLE_EQ(hc.x, 20.0);
  EXPECT_DOUBLE_EQ(hc.y, 10.0);
  EXPECT_DOUBLE_EQ(hc.z, 13.0);  // (150 - 20)/5 - (75 - 10)/5
  EXPECT_EQ(hc.seq, 1u);
}

TEST(HandCenter, CoincidentTips) {
  const auto hc = hand_center(tips_at({{40, 60}, {40, 60}, {40, 60}, {40, 60}, {40, 60}}), 2);
  EXPECT_DOUBLE_EQ(hc.x, 0.0);
  EXPECT_DOUBLE_EQ(hc.y, 0.0);
  EXPECT_DOUBLE_EQ(hc.z, -20.0);
}

TEST(HandCenter, SymmetricTipsGiveZeroDepth) {
  // Mirror about the diagonal: the x and y multisets are equal.
  const auto hc = hand_center(tips_at({{10, 30}, {30, 10}, {20, 20}, {15, 25}, {25, 15}}), 3);
  EXPECT_DOUBLE_EQ(hc.z, 0.0);
}

TEST(HandCenter, PermutationInvariantAndMatchesBruteForce) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 320.0);
  for (int trial = 0; trial < 500; ++trial) {
    auto tips = tips_at({{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}});
    const auto ref = hand_center(tips, 0);
    const auto oracle = testing::brute_force_hand_center(tips);
    EXPECT_EQ(ref.x, oracle.x);
    EXPECT_EQ(ref.y, oracle.y);
    EXPECT_EQ(ref.z, oracle.z);
    std::shuffle(tips.begin(), tips.end(), rng);
    const auto again = hand_center(tips, 0);
    EXPECT_EQ(again.x, ref.x);
    EXPECT_EQ(again.y, ref.y);
    EXPECT_EQ(again.z, ref.z);
  }
}

TEST(Displacement, FirstCaptureIsZero) {
  EXPECT_EQ(displacement(std::nullopt, HandCenter{20, 10, 3, 1}), (Displacement{0, 0, 0}));
}

TEST(Displacement, DifferenceOfCenters) {
  EXPECT_EQ(displacement(HandCenter{20, 10, 3, 1}, HandCenter{25, 7, 3, 2}), (Displacement{5, -3, 0}));
  EXPECT_EQ(displacement(HandCenter{20, 10, 3, 1}, HandCenter{20, 10, 3, 2}), (Displacement{0, 0, 0}));
}

TEST(Displacement, SequenceMustAdvance) {
  EXPECT_THROW(displacement(HandCenter{20, 10, 3, 5}, HandCenter{20, 10, 3, 5}), OrderingError);
  EXPECT_THROW(displacement(HandCenter{20, 10, 3, 5}, HandCenter{20, 10, 3, 4}), OrderingError);
}

}  // namespace
}  // namespace glovearm
