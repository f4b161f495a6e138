#include "glovearm/arm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace glovearm {
namespace {

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Degree-argument trig that is exact at multiples of 90 (so vertical poses give 0, not 6e-17).
double cos_deg(double deg) {
  const double r = std::fmod(std::fmod(deg, 360.0) + 360.0, 360.0);
  if (r == 0.0) return 1.0;
  if (r == 90.0 || r == 270.0) return 0.0;
  if (r == 180.0) return -1.0;
  return std::cos(deg2rad(r));
}

double sin_deg(double deg) { return cos_deg(deg - 90.0); }

double clamp_deg(double v) { return std::clamp(v, kDegreeMin, kDegreeMax); }

// Planar chain angles in degrees: shoulder elevation, and the upper link's absolute angle.
struct PlanarAngles {
  double shoulder;
  double upper;
};

PlanarAngles planar(const ArmState& s) {
  const double el_s = s.theta_shoulder;
  const double el_e = s.theta_elbow - 90.0;
  return {el_s, el_s + el_e};
}

}  // namespace

ArmState apply_command(const ArmState&, const ServoCommand& cmd) {
  return {clamp_deg(cmd.x), clamp_deg(cmd.y), clamp_deg(cmd.z)};
}

Vec3 forward_kinematics(const ArmState& state, const ArmGeometry& g) {
  const auto [a1, a2] = planar(state);
  const double outer = g.upper_len + g.claw_len;
  const double reach = g.lower_len * cos_deg(a1) + outer * cos_deg(a2);
  const double height = g.base_height + g.lower_len * sin_deg(a1) + outer * sin_deg(a2);
  return {reach * cos_deg(state.theta_base), reach * sin_deg(state.theta_base), height};
}

TorqueReport static_torque(const ArmState& state, const ArmGeometry& g, double payload_kg) {
  if (payload_kg < 0.0) throw std::invalid_argument("payload must be >= 0");
  const auto [a1, a2] = planar(state);
  const double c1 = cos_deg(a1);
  const double c2 = cos_deg(a2);

  // Each mass contributes mass times its horizontal distance from the joint axis.
  // Distances are unsigned, so masses on opposite sides never cancel.
  const double upper_com = 0.5 * g.upper_len * c2;
  const double claw_com = (g.upper_len + 0.5 * g.claw_len) * c2;
  const double tip = (g.upper_len + g.claw_len) * c2;
  const double elbow_moment =
      g.upper_mass * std::abs(upper_com) + g.claw_mass * std::abs(claw_com) + payload_kg * std::abs(tip);

  const double elbow_x = g.lower_len * c1;
  const double shoulder_moment = g.lower_mass * std::abs(0.5 * g.lower_len * c1) +
                                 g.upper_mass * std::abs(elbow_x + upper_com) +
                                 g.claw_mass * std::abs(elbow_x + claw_com) + payload_kg * std::abs(elbow_x + tip);

  TorqueReport rep;
  rep.shoulder = shoulder_moment;
  rep.elbow = elbow_moment;
  rep.shoulder_overload = rep.shoulder > g.main_servo_rating;
  rep.elbow_overload = rep.elbow > g.main_servo_rating;
  return rep;
}

std::string encode_serial(const ServoCommand& cmd) {
  return "(" + std::to_string(cmd.x) + "," + std::to_string(cmd.y) + "," + std::to_string(cmd.z) + ")\n";
}

namespace {

enum class Scan { Ok, Incomplete, Malformed };

// Parses "(x,y,z)\n" at the front of `s`; each field is 1-3 digits without leading zeros.
Scan scan_frame(std::string_view s, std::array<int, 3>& values, std::size_t& length) {
  std::size_t i = 1;  // s[0] == '('
  for (int field = 0; field < 3; ++field) {
    const std::size_t start = i;
    int v = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
      if (i - start == 3) return Scan::Malformed;
      v = v * 10 + (s[i] - '0');
      ++i;
    }
    if (i == s.size()) return Scan::Incomplete;
    const std::size_t digits = i - start;
    if (digits == 0 || (digits > 1 && s[start] == '0')) return Scan::Malformed;
    values[field] = v;
    const char sep = field < 2 ? ',' : ')';
    if (s[i] != sep) return Scan::Malformed;
    ++i;
  }
  if (i == s.size()) return Scan::Incomplete;
  if (s[i] != '\n') return Scan::Malformed;
  length = i + 1;
  return Scan::Ok;
}

}  // namespace

std::optional<ServoCommand> decode_serial(std::string_view& stream) {
  while (true) {
    const auto open = stream.find('(');
    if (open == std::string_view::npos) {
      stream = stream.substr(stream.size());
      return std::nullopt;
    }
    stream.remove_prefix(open);

    std::array<int, 3> v{};
    std::size_t len = 0;
    switch (scan_frame(stream, v, len)) {
      case Scan::Incomplete:
        return std::nullopt;
      case Scan::Malformed:
        stream.remove_prefix(1);
        continue;
      case Scan::Ok:
        break;
    }
    stream.remove_prefix(len);
    if (std::any_of(v.begin(), v.end(), [](int x) { return x > 180; })) {
      throw SerialFrameRejected("serial frame value out of [0,180]: (" + std::to_string(v[0]) + "," +
                                std::to_string(v[1]) + "," + std::to_string(v[2]) + ")");
    }
    ServoCommand cmd;
    cmd.x = v[0];
    cmd.y = v[1];
    cmd.z = v[2];
    return cmd;
  }
}

}  // namespace glovearm
