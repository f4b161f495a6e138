#include "glovearm/frame_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string_view>

namespace glovearm {
namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_whitespace_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  long read_int(const char* field) {
    skip_whitespace_and_comments();
    long value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      if (digits++ > 8) throw PgmError(PgmError::Kind::BadHeader, std::string("pgm: ") + field + " too large");
      value = value * 10 + (bytes_[pos_++] - '0');
    }
    if (digits == 0) throw PgmError(PgmError::Kind::BadHeader, std::string("pgm: missing ") + field);
    return value;
  }

  std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint8_t to_intensity(double v) {
  return static_cast<std::uint8_t>(std::floor(std::clamp(v, 0.0, 255.0)));
}

}  // namespace

GrayFrame load_pgm(std::span<const std::uint8_t> bytes, int min_side) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw PgmError(PgmError::Kind::BadMagic, "pgm: expected magic P5");
  }
  HeaderReader header(bytes.subspan(2));
  if (bytes.size() > 2 && !std::isspace(bytes[2])) {
    throw PgmError(PgmError::Kind::BadMagic, "pgm: expected whitespace after magic");
  }
  const long width = header.read_int("width");
  const long height = header.read_int("height");
  const long maxval = header.read_int("maxval");
  if (maxval != 255) {
    throw PgmError(PgmError::Kind::BadMaxval, "pgm: maxval must be 255, got " + std::to_string(maxval));
  }
  // Exactly one whitespace byte separates the header from the raster.
  const std::size_t sep = 2 + header.pos();
  if (sep >= bytes.size() || !std::isspace(bytes[sep])) {
    throw PgmError(PgmError::Kind::Truncated, "pgm: missing raster data");
  }
  if (width < min_side || height < min_side) {
    throw PgmError(PgmError::Kind::TooSmall, "pgm: frame smaller than " + std::to_string(min_side) + " px (" + std::to_string(width) + "x" +
                                                 std::to_string(height) + ")");
  }
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t begin = sep + 1;
  if (bytes.size() - begin < count) {
    throw PgmError(PgmError::Kind::Truncated, "pgm: expected " + std::to_string(count) + " pixel bytes, got " +
                                                  std::to_string(bytes.size() - begin));
  }

  GrayFrame frame;
  frame.width = static_cast<int>(width);
  frame.height = static_cast<int>(height);
  frame.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(begin),
                      bytes.begin() + static_cast<std::ptrdiff_t>(begin + count));
  return frame;
}

GrayFrame load_pgm_file(const std::string& path, int min_side) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_pgm(bytes, min_side);
}

std::vector<std::uint8_t> save_pgm(const GrayFrame& frame) {
  const std::string header = "P5\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), frame.pixels.begin(), frame.pixels.end());
  return out;
}

void save_pgm_file(const GrayFrame& frame, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const auto bytes = save_pgm(frame);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

void validate_scene(const SynthScene& scene, int width, int height) {
  if (!(scene.gain > 0.0)) throw SceneError("scene gain must be > 0");
  if (!(scene.led_radius > 0.0)) throw SceneError("led radius must be > 0");
  if (scene.noise_amplitude < 0.0) throw SceneError("noise amplitude must be >= 0");
  if (width < kMinFrameSide || height < kMinFrameSide) throw SceneError("frame smaller than 16x16");
  for (const auto& c : scene.led_centers) {
    if (c.x < scene.led_radius || c.y < scene.led_radius || c.x > width - scene.led_radius ||
        c.y > height - scene.led_radius) {
      throw SceneError("led center (" + std::to_string(c.x) + "," + std::to_string(c.y) +
                       ") closer than led_radius to the frame border");
    }
  }
}

GrayFrame synth_frame(const SynthScene& scene, int width, int height) {
  validate_scene(scene, width, height);

  GrayFrame frame;
  frame.width = width;
  frame.height = height;
  frame.pixels.resize(static_cast<std::size_t>(width) * height);

  const double r2 = scene.led_radius * scene.led_radius;
  const double lit = scene.gain * 255.0 + scene.offset;
  Lcg64 rng(scene.seed);

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double px = x + 0.5;
      const double py = y + 0.5;
      const bool inside = std::any_of(scene.led_centers.begin(), scene.led_centers.end(), [&](const Point2& c) {
        return (px - c.x) * (px - c.x) + (py - c.y) * (py - c.y) <= r2;
      });
      const double noise = scene.noise_amplitude > 0.0 ? rng.next_symmetric(scene.noise_amplitude) : 0.0;
      frame.at(x, y) = to_intensity((inside ? lit : scene.offset) + noise);
    }
  }
  return frame;
}

}  // namespace glovearm
