#include "glovearm/vision.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <tuple>

namespace glovearm {

BinaryFrame normalize_and_threshold(const GrayFrame& frame, double band_low) {
  const auto [lo_it, hi_it] = std::minmax_element(frame.pixels.begin(), frame.pixels.end());
  if (lo_it == frame.pixels.end() || *lo_it == *hi_it) {
    throw UniformFrameError("frame has a single intensity; nothing to stretch");
  }
  const double lo = *lo_it;
  const double scale = 255.0 / (static_cast<double>(*hi_it) - lo);

  // s = (p - lo) * 255 / (hi - lo) >= band_low, evaluated per intensity level once.
  std::array<std::uint8_t, 256> keep{};
  for (int p = 0; p < 256; ++p) keep[p] = (p - lo) * scale >= band_low ? 1 : 0;

  BinaryFrame out;
  out.width = frame.width;
  out.height = frame.height;
  out.bits.resize(frame.pixels.size());
  std::transform(frame.pixels.begin(), frame.pixels.end(), out.bits.begin(),
                 [&](std::uint8_t p) { return keep[p]; });
  return out;
}

GrayFrame to_gray(const BinaryFrame& bin) {
  GrayFrame g;
  g.width = bin.width;
  g.height = bin.height;
  g.pixels.resize(bin.bits.size());
  std::transform(bin.bits.begin(), bin.bits.end(), g.pixels.begin(),
                 [](std::uint8_t b) -> std::uint8_t { return b ? 255 : 0; });
  return g;
}

int perimeter_samples(int r) {
  return std::max(16, static_cast<int>(std::ceil(2.0 * std::numbers::pi * r)));
}

namespace {

struct Offset {
  int dx;
  int dy;
};

// A white pixel at (i, j) has its center at (i + 0.5, j + 0.5); it votes for the cell
// nearest (i + 0.5 - r cos t, j + 0.5 - r sin t), i.e. (i, j) + floor(1 - r (cos t, sin t)).
std::vector<Offset> vote_offsets(int r) {
  const int n = perimeter_samples(r);
  std::vector<Offset> offs;
  offs.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * std::numbers::pi * k / n;
    offs.push_back({static_cast<int>(std::floor(1.0 - r * std::cos(t))),
                    static_cast<int>(std::floor(1.0 - r * std::sin(t)))});
  }
  return offs;
}

}  // namespace

std::vector<Circle> hough_circles(const BinaryFrame& bin, const HoughParams& params) {
  const int w = bin.width;
  const int h = bin.height;
  const int r_min = params.r_min;
  const int r_max = params.r_max;
  if (r_min < 1 || r_min > r_max || r_max > std::min(w, h) / 2) {
    throw std::invalid_argument("hough radius range [" + std::to_string(r_min) + "," + std::to_string(r_max) +
                                "] invalid for " + std::to_string(w) + "x" + std::to_string(h));
  }

  std::vector<int> whites;
  for (int i = 0; i < w * h; ++i) {
    if (bin.bits[i]) whites.push_back(i);
  }
  if (whites.empty()) return {};

  const int planes = r_max - r_min + 1;
  const std::size_t plane_size = static_cast<std::size_t>(w) * h;
  std::vector<int> acc(plane_size * planes, 0);

  for (int p = 0; p < planes; ++p) {
    int* plane = acc.data() + plane_size * p;
    for (const Offset& o : vote_offsets(r_min + p)) {
      for (int idx : whites) {
        const int cx = idx % w + o.dx;
        const int cy = idx / w + o.dy;
        if (cx >= 0 && cx < w && cy >= 0 && cy < h) ++plane[cy * w + cx];
      }
    }
  }

  // 3x3 box smoothing in each plane steadies the peak when a blob is only partly lit.
  std::vector<int> smooth(plane_size);
  std::vector<Circle> peaks;
  const int reach = r_min;
  for (int p = 0; p < planes; ++p) {
    const int r = r_min + p;
    const int threshold = std::max(1, static_cast<int>(std::ceil(params.min_coverage * perimeter_samples(r))));
    const int* raw = acc.data() + plane_size * p;
    for (int cy = 0; cy < h; ++cy) {
      for (int cx = 0; cx < w; ++cx) {
        int sum = 0;
        int best = 0;
        for (int ny = std::max(0, cy - 1); ny <= std::min(h - 1, cy + 1); ++ny) {
          for (int nx = std::max(0, cx - 1); nx <= std::min(w - 1, cx + 1); ++nx) {
            sum += raw[ny * w + nx];
            best = std::max(best, raw[ny * w + nx]);
          }
        }
        // Cells with no well-covered circle nearby are not candidates.
        smooth[cy * w + cx] = best >= threshold ? sum : 0;
      }
    }
    const int* plane = smooth.data();
    for (int cy = 0; cy < h; ++cy) {
      for (int cx = 0; cx < w; ++cx) {
        const int s = plane[cy * w + cx];
        if (s == 0) continue;
        bool is_peak = true;
        for (int ny = std::max(0, cy - reach); is_peak && ny <= std::min(h - 1, cy + reach); ++ny) {
          for (int nx = std::max(0, cx - reach); nx <= std::min(w - 1, cx + reach); ++nx) {
            if ((nx - cx) * (nx - cx) + (ny - cy) * (ny - cy) > reach * reach) continue;
            if (nx == cx && ny == cy) continue;
            const int ns = plane[ny * w + nx];
            const bool earlier = ny < cy || (ny == cy && nx < cx);
            if (ns > s || (earlier && ns == s)) {
              is_peak = false;
              break;
            }
          }
        }
        if (is_peak) peaks.push_back({static_cast<double>(cx), static_cast<double>(cy), r, s});
      }
    }
  }

  std::sort(peaks.begin(), peaks.end(), [](const Circle& a, const Circle& b) {
    return std::tuple(-a.score, -a.r, a.cy, a.cx) < std::tuple(-b.score, -b.r, b.cy, b.cx);
  });

  std::vector<Circle> kept;
  for (const Circle& c : peaks) {
    const bool merged = std::any_of(kept.begin(), kept.end(), [&](const Circle& k) {
      const double lim = std::max(r_min, k.r + c.r);
      return (c.cx - k.cx) * (c.cx - k.cx) + (c.cy - k.cy) * (c.cy - k.cy) <= lim * lim;
    });
    if (!merged) kept.push_back(c);
  }
  return kept;
}

std::vector<Circle> hough_circles(const BinaryFrame& bin, int r_min, int r_max) {
  HoughParams params;
  params.r_min = r_min;
  params.r_max = r_max;
  return hough_circles(bin, params);
}

std::vector<Circle> select_fingertips(std::span<const Circle> circles) {
  if (circles.size() < 5) {
    throw TrackingLostError("tracking lost: " + std::to_string(circles.size()) + " candidate circles, need 5");
  }
  std::vector<int> radii;
  radii.reserve(circles.size());
  for (const auto& c : circles) radii.push_back(c.r);
  std::sort(radii.begin(), radii.end());
  const std::size_t mid = radii.size() / 2;
  const double median = radii.size() % 2 ? radii[mid] : 0.5 * (radii[mid - 1] + radii[mid]);

  std::vector<Circle> ranked(circles.begin(), circles.end());
  std::stable_sort(ranked.begin(), ranked.end(), [median](const Circle& a, const Circle& b) {
    return std::tuple(std::abs(a.r - median), -a.score, a.cy, a.cx) <
           std::tuple(std::abs(b.r - median), -b.score, b.cy, b.cx);
  });
  ranked.resize(5);
  return ranked;
}

HandCenter hand_center(std::span<const Circle> tips, std::uint64_t seq) {
  if (tips.size() != 5) throw std::invalid_argument("hand_center needs exactly 5 tips");
  auto [min_x, max_x] = std::minmax_element(tips.begin(), tips.end(), [](auto& a, auto& b) { return a.cx < b.cx; });
  auto [min_y, max_y] = std::minmax_element(tips.begin(), tips.end(), [](auto& a, auto& b) { return a.cy < b.cy; });
  // Summed in sorted order so the result does not depend on tip order.
  std::array<double, 5> xs{};
  std::array<double, 5> ys{};
  for (std::size_t i = 0; i < 5; ++i) {
    xs[i] = tips[i].cx;
    ys[i] = tips[i].cy;
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double sum_x = xs[0] + xs[1] + xs[2] + xs[3] + xs[4];
  const double sum_y = ys[0] + ys[1] + ys[2] + ys[3] + ys[4];
  HandCenter hc;
  hc.x = std::abs(max_x->cx - min_x->cx) / 2.0;
  hc.y = std::abs(max_y->cy - min_y->cy) / 2.0;
  hc.z = (sum_x - hc.x) / 5.0 - (sum_y - hc.y) / 5.0;
  hc.seq = seq;
  return hc;
}

Displacement displacement(const std::optional<HandCenter>& prev, const HandCenter& curr) {
  if (!prev) return {};
  if (curr.seq <= prev->seq) {
    throw OrderingError("hand center seq " + std::to_string(curr.seq) + " does not follow " +
                        std::to_string(prev->seq));
  }
  return {curr.x - prev->x, curr.y - prev->y, curr.z - prev->z};
}

}  // namespace glovearm
