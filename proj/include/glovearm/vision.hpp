#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "glovearm/frame_io.hpp"

namespace glovearm {

struct BinaryFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // 0 or 1, row-major

  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
};

struct Circle {
  double cx = 0.0;
  double cy = 0.0;
  int r = 0;
  int score = 0;

  bool operator==(const Circle&) const = default;
};

struct HandCenter {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  std::uint64_t seq = 0;
};

struct Displacement {
  double dx = 0.0;
  double dy = 0.0;
  double dz = 0.0;

  bool operator==(const Displacement&) const = default;
};

/// The frame has a single intensity, so no contrast stretch exists.
class UniformFrameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fewer than five candidate circles.
class TrackingLostError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OrderingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lower edge of the kept band on the stretched 0..255 scale.
inline constexpr double kThresholdBandLow = 240.0;

/// Min-max contrast stretch to [0,255], then keep pixels whose stretched value is
/// at or above `band_low`. Throws UniformFrameError when min == max.
BinaryFrame normalize_and_threshold(const GrayFrame& frame, double band_low = kThresholdBandLow);

/// Renders a binary frame as 0/255 grayscale (for debug dumps).
GrayFrame to_gray(const BinaryFrame& bin);

struct HoughParams {
  int r_min = 3;
  int r_max = 12;
  /// A peak must be voted by at least this fraction of its perimeter samples.
  double min_coverage = 0.5;
};

/// Number of angular samples used on a circle of radius r.
int perimeter_samples(int r);

/// Circle Hough transform over integer (cx, cy, r). Every white pixel votes for all
/// centers at distance r (r in [r_min, r_max]). A circle's score is the 3x3 box sum of
/// votes around its cell. Peaks are local maxima within r_min in each radius plane and
/// need a nearby cell voted by at least min_coverage of the perimeter samples. A peak
/// overlapping a stronger kept circle is merged into it. Sorted by descending score.
std::vector<Circle> hough_circles(const BinaryFrame& bin, const HoughParams& params);
std::vector<Circle> hough_circles(const BinaryFrame& bin, int r_min, int r_max);

/// The five candidates whose radii are closest to the median candidate radius.
/// Ties prefer higher score, then lower (cy, cx). Throws TrackingLostError for fewer
/// than five candidates.
std::vector<Circle> select_fingertips(std::span<const Circle> circles);

/// Hand center from exactly five fingertips:
///   x = |max(cx) - min(cx)| / 2
///   y = |max(cy) - min(cy)| / 2
///   z = (sum(cx) - x) / 5 - (sum(cy) - y) / 5
HandCenter hand_center(std::span<const Circle> tips, std::uint64_t seq);

/// Zero for the first capture, otherwise curr - prev. Throws OrderingError when
/// curr.seq does not advance.
Displacement displacement(const std::optional<HandCenter>& prev, const HandCenter& curr);

}  // namespace glovearm
