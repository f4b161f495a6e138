#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace glovearm {

/// Grayscale raster, row-major, one byte per pixel.
struct GrayFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
  std::uint64_t seq = 0;

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

inline constexpr int kMinFrameSide = 16;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Five bright disks standing in for the glove's fingertip LEDs.
struct SynthScene {
  std::array<Point2, 5> led_centers{};
  double led_radius = 5.0;
  double gain = 1.0;
  double offset = 0.0;
  double noise_amplitude = 0.0;
  std::uint64_t seed = 0;
};

class PgmError : public std::runtime_error {
 public:
  enum class Kind { BadMagic, BadHeader, BadMaxval, Truncated, TooSmall };

  PgmError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class SceneError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Deterministic noise source shared by every synthetic frame.
///
/// 64-bit linear congruential generator with Knuth's MMIX constants:
///   state' = state * 6364136223846793005 + 1442695040888963407  (mod 2^64)
/// The top 53 bits of the new state give a uniform double in [0, 1).
class Lcg64 {
 public:
  static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
  static constexpr std::uint64_t kIncrement = 1442695040888963407ULL;

  explicit Lcg64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ = state_ * kMultiplier + kIncrement;
    return state_;
  }
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  /// Uniform in [-amplitude, +amplitude).
  double next_symmetric(double amplitude) { return (2.0 * next_unit() - 1.0) * amplitude; }

 private:
  std::uint64_t state_;
};

/// Parses a binary P5 image with maxval 255. Frames with a side shorter than
/// min_side (16 for pipeline input) are rejected.
GrayFrame load_pgm(std::span<const std::uint8_t> bytes, int min_side = kMinFrameSide);
GrayFrame load_pgm_file(const std::string& path, int min_side = kMinFrameSide);

std::vector<std::uint8_t> save_pgm(const GrayFrame& frame);
void save_pgm_file(const GrayFrame& frame, const std::string& path);

/// Renders the scene. A pixel belongs to a disk when its center (x + 0.5, y + 0.5)
/// lies within led_radius of an LED center. Intensities are clamped to [0,255] and
/// floored.
GrayFrame synth_frame(const SynthScene& scene, int width, int height);

/// Validates the scene against a frame size; throws SceneError.
void validate_scene(const SynthScene& scene, int width, int height);

}  // namespace glovearm
