#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "glovearm/fuzzy.hpp"

namespace glovearm {

/// Mark II dimensions. Lengths in cm, masses in kg, ratings in kg*cm.
struct ArmGeometry {
  double base_height = 11.0;
  double lower_len = 40.0;
  double upper_len = 20.0;
  double claw_len = 6.0;
  double lower_mass = 0.18;
  double upper_mass = 0.11;
  double claw_mass = 0.02;
  double main_servo_rating = 15.0;  // MG995
  double grip_servo_rating = 1.0;   // SG90

  double reach() const { return lower_len + upper_len + claw_len; }
};

/// Degrees. Shoulder is elevation from horizontal (90 = vertical); elbow 90 keeps the
/// upper arm aligned with the lower arm.
struct ArmState {
  double theta_base = 90.0;
  double theta_shoulder = 90.0;
  double theta_elbow = 90.0;

  bool operator==(const ArmState&) const = default;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct TorqueReport {
  double shoulder = 0.0;  // kg*cm
  double elbow = 0.0;
  bool shoulder_overload = false;
  bool elbow_overload = false;

  int flags() const { return (shoulder_overload ? 1 : 0) | (elbow_overload ? 2 : 0); }
};

/// x -> base yaw, y -> shoulder, z -> elbow, each clamped to [0, 180].
ArmState apply_command(const ArmState& state, const ServoCommand& cmd);

Vec3 forward_kinematics(const ArmState& state, const ArmGeometry& g);

/// Static holding torque about the shoulder and elbow axes: sum of mass times the
/// horizontal lever arm of each link's midpoint beyond the joint, plus the payload at
/// the end effector. Overload when a torque exceeds the main servo rating.
TorqueReport static_torque(const ArmState& state, const ArmGeometry& g, double payload_kg);

/// "(x,y,z)\n" in plain decimal.
std::string encode_serial(const ServoCommand& cmd);

/// A syntactically valid frame carrying a value above 180.
class SerialFrameRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Consumes the next well-formed "(x,y,z)\n" frame from the front of `stream`.
/// Bytes before a '(' and malformed frames are skipped. Returns nullopt (leaving any
/// incomplete trailing frame in place) when no complete frame remains. Throws
/// SerialFrameRejected, after consuming the frame, for values outside [0, 180].
std::optional<ServoCommand> decode_serial(std::string_view& stream);

/// Seconds to clock `bytes` out at 9600 bps with 8N1 framing.
constexpr double serial_wire_time(std::size_t bytes, double baud = 9600.0) { return bytes * 10.0 / baud; }

}  // namespace glovearm
