#pragma once

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "glovearm/vision.hpp"

namespace glovearm {

/// Triangular membership (a, b, c): 0 outside [a, c], 1 at b. a == b or b == c gives a
/// vertical shoulder.
struct FuzzySet {
  std::string label;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

double membership(const FuzzySet& set, double v);

inline constexpr double kDisplacementLimit = 100.0;
inline constexpr double kDegreeMin = 0.0;
inline constexpr double kDegreeMax = 180.0;
inline constexpr double kNeutralDegrees = 90.0;

struct Rule {
  std::string input;
  std::string output;
};

/// Five input sets over [-100, 100] px, five output sets over degrees, one rule per
/// input label.
struct RuleBase {
  std::vector<FuzzySet> input_sets;
  std::vector<FuzzySet> output_sets;
  std::vector<Rule> rules;
};

class RuleBaseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Symmetric default: NL NS Z PS PL feeding output triangles centred at 18, 54, 90,
/// 126, 162 with half-width 36. NS and PS stop 5 px short of zero so that jitter
/// inside +-5 px fires only Z.
RuleBase default_rule_base();

/// Throws RuleBaseError when the structure, vertex order, or input coverage is wrong.
void validate(const RuleBase& rb);

/// Mamdani inference: clip each output set at its rule's activation, aggregate by max,
/// centroid over 1 degree samples spanning the output supports, clamped to [0, 180].
/// Input is clamped to [-100, 100] first.
double infer_axis(double d, const RuleBase& rb);

struct AxisRuleBases {
  RuleBase x = default_rule_base();
  RuleBase y = default_rule_base();
};

/// Plain-text rule file. One entry per line, '#' starts a comment:
///   set <axis> <label> <a> <b> <c>     axis: x | y (inputs), x_out | y_out (outputs)
///   rule <axis> <input label> <output label>
/// Axes not mentioned keep the default rule base.
AxisRuleBases parse_rule_file(std::string_view text);
AxisRuleBases load_rule_file(const std::string& path);
std::string format_rule_file(const AxisRuleBases& rbs);

struct ServoCommand {
  int x = 90;
  int y = 90;
  int z = 90;
  std::uint64_t seq = 0;

  bool same_angles(const ServoCommand& o) const { return x == o.x && y == o.y && z == o.z; }
  bool operator==(const ServoCommand&) const = default;
};

struct ControllerConfig {
  AxisRuleBases rules;
  double k_z = 0.2;  // deg per px of mean dz
  std::size_t z_window = 5;
  double rate_limit = 15.0;  // deg per frame on X and Y
};

struct ControllerState {
  double angle_x = kNeutralDegrees;
  double angle_y = kNeutralDegrees;
  double angle_z = kNeutralDegrees;
  std::deque<double> z_history;
  std::uint64_t seq = 0;  // last emitted command number
};

/// Pushes dz into the moving window and returns round(mean * k_z).
double smooth_z(double dz, ControllerState& state, const ControllerConfig& cfg);

/// One control tick. X/Y go through fuzzy inference (centroid - 90, rate limited);
/// Z goes through smooth_z. Angles are clamped to [0, 180]; the command carries them
/// rounded, numbered state.seq + 1.
ServoCommand step_controller(const Displacement& d, ControllerState& state, const ControllerConfig& cfg);

}  // namespace glovearm
