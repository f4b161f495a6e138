#include "glovearm/fuzzy.hpp"

#include <gtest/gtest.h>

#include <random>

namespace glovearm {
namespace {

TEST(Membership, Triangle) {
  const FuzzySet s{"T", 0, 50, 100};
  EXPECT_DOUBLE_EQ(membership(s, 50), 1.0);
  EXPECT_DOUBLE_EQ(membership(s, 25), 0.5);
  EXPECT_DOUBLE_EQ(membership(s, -10), 0.0);
  EXPECT_DOUBLE_EQ(membership(s, 100), 0.0);
  EXPECT_DOUBLE_EQ(membership(s, 75), 0.5);
}

TEST(Membership, VerticalShoulders) {
  EXPECT_DOUBLE_EQ(membership({"L", -100, -100, -50}, -100), 1.0);
  EXPECT_DOUBLE_EQ(membership({"L", -100, -100, -50}, -75), 0.5);
  EXPECT_DOUBLE_EQ(membership({"R", 50, 100, 100}, 100), 1.0);
}

TEST(InferAxis, Extremes) {
  const auto rb = default_rule_base();
  EXPECT_DOUBLE_EQ(infer_axis(0, rb), 90.0);
  EXPECT_DOUBLE_EQ(infer_axis(100, rb), 162.0);
  EXPECT_DOUBLE_EQ(infer_axis(-100, rb), 18.0);
  EXPECT_DOUBLE_EQ(infer_axis(250, rb), 162.0);
  EXPECT_DOUBLE_EQ(infer_axis(-250, rb), 18.0);
}

// Reference values from an exact rational evaluation of the same sampling rule.
TEST(InferAxis, FrozenIntermediateValues) {
  const auto rb = default_rule_base();
  EXPECT_NEAR(infer_axis(3, rb), 90.0, 1e-9);
  EXPECT_NEAR(infer_axis(5, rb), 90.0, 1e-9);
  EXPECT_NEAR(infer_axis(10, rb), 96.07594936708861, 1e-9);
  EXPECT_NEAR(infer_axis(20, rb), 112.66176470588235, 1e-9);
  EXPECT_NEAR(infer_axis(37.5, rb), 126.0, 1e-9);
  EXPECT_NEAR(infer_axis(-60, rb), 45.311335816923894, 1e-9);
}

TEST(InferAxis, MonotoneAndAntisymmetric) {
  const auto rb = default_rule_base();
  double prev = -1.0;
  for (int d = -100; d <= 100; ++d) {
    const double v = infer_axis(d, rb);
    EXPECT_GE(v, prev - 1e-12) << d;
    EXPECT_NEAR(infer_axis(-d, rb), 180.0 - v, 0.5) << d;
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 180.0);
    prev = v;
  }
}

TEST(RuleBase, DefaultValidates) { EXPECT_NO_THROW(validate(default_rule_base())); }

TEST(RuleBase, RejectsBrokenStructure) {
  auto rb = default_rule_base();
  rb.rules.pop_back();
  EXPECT_THROW(validate(rb), RuleBaseError);

  rb = default_rule_base();
  rb.input_sets[2] = {"Z", -4, 0, 4};  // leaves (-5,-4] and [4,5) uncovered
  EXPECT_THROW(validate(rb), RuleBaseError);

  rb = default_rule_base();
  rb.output_sets[0] = {"D18", 30, 18, 54};
  EXPECT_THROW(validate(rb), RuleBaseError);

  rb = default_rule_base();
  rb.rules[0].output = "nope";
  EXPECT_THROW(validate(rb), RuleBaseError);
}

TEST(RuleFile, RoundTripsThroughText) {
  AxisRuleBases rbs;
  rbs.y.output_sets[4].b = 160;
  const auto back = parse_rule_file(format_rule_file(rbs));
  EXPECT_EQ(back.y.output_sets[4].b, 160);
  EXPECT_EQ(format_rule_file(back), format_rule_file(rbs));
}

TEST(RuleFile, PartialOverrideKeepsDefaults) {
  const auto rbs = parse_rule_file(
      "# widen the dead zone on x\n"
      "set x NL -100 -100 -50\n"
      "set x NS -100 -50 -10\n"
      "set x Z -30 0 30   # trailing comment\n"
      "set x PS 10 50 100\n"
      "set x PL 50 100 100\n");
  EXPECT_EQ(rbs.x.input_sets[2].c, 30);
  EXPECT_DOUBLE_EQ(infer_axis(8, rbs.x), 90.0);
  EXPECT_EQ(format_rule_file({rbs.y, rbs.y}), format_rule_file({default_rule_base(), default_rule_base()}));
}

TEST(RuleFile, ErrorsNameTheLine) {
  try {
    parse_rule_file("\nset q Z -25 0 25\n");
    FAIL();
  } catch (const RuleBaseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse_rule_file("set x Z -25 0\n"), RuleBaseError);
  EXPECT_THROW(parse_rule_file("bogus x\n"), RuleBaseError);
  EXPECT_THROW(parse_rule_file("rule x Z\n"), RuleBaseError);
  EXPECT_THROW(load_rule_file("/nonexistent/rules.txt"), RuleBaseError);
}

TEST(SmoothZ, Examples) {
  ControllerConfig cfg;
  ControllerState s;
  s.z_history = {0, 0, 0, 0, 0};
  EXPECT_EQ(smooth_z(0, s, cfg), 0.0);
  EXPECT_EQ(s.z_history.size(), 5u);

  ControllerState e;
  EXPECT_EQ(smooth_z(10, e, cfg), 2.0);

  ControllerState f;
  f.z_history = {10, 10, 10, 10};
  EXPECT_EQ(smooth_z(-40, f, cfg), 0.0);
}

TEST(StepController, NeutralFixedPoint) {
  ControllerConfig cfg;
  ControllerState s;
  const auto cmd = step_controller({0, 0, 0}, s, cfg);
  EXPECT_EQ(cmd.x, 90);
  EXPECT_EQ(cmd.y, 90);
  EXPECT_EQ(cmd.z, 90);
  EXPECT_EQ(cmd.seq, 1u);
  EXPECT_EQ(s.angle_x, 90.0);
  EXPECT_EQ(s.z_history.size(), 1u);
}

TEST(StepController, RateLimitAndClamp) {
  ControllerConfig cfg;
  ControllerState s;
  auto cmd = step_controller({100, 0, 0}, s, cfg);
  EXPECT_EQ(cmd.x, 105);
  EXPECT_EQ(cmd.y, 90);
  EXPECT_EQ(cmd.z, 90);

  ControllerState t;
  t.angle_x = 175;
  cmd = step_controller({100, 0, 0}, t, cfg);
  EXPECT_EQ(cmd.x, 180);
  EXPECT_EQ(cmd.y, 90);
}

TEST(StepController, OutputsStayInRange) {
  ControllerConfig cfg;
  ControllerState s;
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-400, 400);
  ServoCommand prev;
  for (int i = 0; i < 2000; ++i) {
    const auto cmd = step_controller({u(rng), u(rng), u(rng)}, s, cfg);
    for (int v : {cmd.x, cmd.y, cmd.z}) {
      EXPECT_GE(v, 0);
      EXPECT_LE(v, 180);
    }
    EXPECT_LE(std::abs(cmd.x - prev.x), 15);
    EXPECT_LE(std::abs(cmd.y - prev.y), 15);
    prev = cmd;
  }
}

TEST(StepController, JitterDoesNotDrift) {
  ControllerConfig cfg;
  ControllerState s;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  ServoCommand cmd;
  for (int i = 0; i < 200; ++i) cmd = step_controller({u(rng), u(rng), u(rng)}, s, cfg);
  EXPECT_LE(std::abs(cmd.x - 90), 4);
  EXPECT_LE(std::abs(cmd.y - 90), 4);
  EXPECT_LE(std::abs(cmd.z - 90), 4);
}

}  // namespace
}  // namespace glovearm
