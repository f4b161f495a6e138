#include "glovearm/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace glovearm {

double membership(const FuzzySet& set, double v) {
  if (v < set.a || v > set.c) return 0.0;
  if (v < set.b) return (v - set.a) / (set.b - set.a);
  if (v > set.b) return (set.c - v) / (set.c - set.b);
  return 1.0;
}

RuleBase default_rule_base() {
  RuleBase rb;
  rb.input_sets = {
      {"NL", -100, -100, -50}, {"NS", -100, -50, -5}, {"Z", -25, 0, 25}, {"PS", 5, 50, 100}, {"PL", 50, 100, 100},
  };
  rb.output_sets = {
      {"D18", -18, 18, 54}, {"D54", 18, 54, 90}, {"D90", 54, 90, 126}, {"D126", 90, 126, 162}, {"D162", 126, 162, 198},
  };
  rb.rules = {{"NL", "D18"}, {"NS", "D54"}, {"Z", "D90"}, {"PS", "D126"}, {"PL", "D162"}};
  return rb;
}

namespace {

const FuzzySet* find_set(const std::vector<FuzzySet>& sets, const std::string& label) {
  auto it = std::find_if(sets.begin(), sets.end(), [&](const FuzzySet& s) { return s.label == label; });
  return it == sets.end() ? nullptr : &*it;
}

void check_sets(const std::vector<FuzzySet>& sets, const char* what) {
  if (sets.size() != 5) throw RuleBaseError(std::string(what) + ": need exactly 5 sets, got " + std::to_string(sets.size()));
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto& s = sets[i];
    if (!(s.a <= s.b && s.b <= s.c) || s.a == s.c) {
      throw RuleBaseError(std::string(what) + " set " + s.label + ": vertices must satisfy a <= b <= c, a < c");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (sets[j].label == s.label) throw RuleBaseError(std::string(what) + ": duplicate label " + s.label);
    }
  }
}

}  // namespace

void validate(const RuleBase& rb) {
  check_sets(rb.input_sets, "input");
  check_sets(rb.output_sets, "output");
  if (rb.rules.size() != 5) throw RuleBaseError("need exactly 5 rules, got " + std::to_string(rb.rules.size()));
  for (const auto& in : rb.input_sets) {
    const auto n = std::count_if(rb.rules.begin(), rb.rules.end(), [&](const Rule& r) { return r.input == in.label; });
    if (n != 1) throw RuleBaseError("input set " + in.label + " must appear in exactly one rule");
  }
  for (const auto& r : rb.rules) {
    if (!find_set(rb.input_sets, r.input)) throw RuleBaseError("rule references unknown input " + r.input);
    if (!find_set(rb.output_sets, r.output)) throw RuleBaseError("rule references unknown output " + r.output);
  }
  // Coverage of the displacement universe on a 0.01 px grid.
  for (int i = -10000; i <= 10000; ++i) {
    const double v = i * 0.01;
    const bool covered = std::any_of(rb.input_sets.begin(), rb.input_sets.end(),
                                     [v](const FuzzySet& s) { return membership(s, v) > 0.0; });
    if (!covered) throw RuleBaseError("input sets leave " + std::to_string(v) + " px uncovered");
  }
}

double infer_axis(double d, const RuleBase& rb) {
  d = std::clamp(d, -kDisplacementLimit, kDisplacementLimit);

  std::vector<std::pair<const FuzzySet*, double>> clipped;
  for (const auto& rule : rb.rules) {
    const FuzzySet* in = find_set(rb.input_sets, rule.input);
    const FuzzySet* out = find_set(rb.output_sets, rule.output);
    if (!in || !out) continue;
    const double activation = membership(*in, d);
    if (activation > 0.0) clipped.emplace_back(out, activation);
  }
  if (clipped.empty()) return kNeutralDegrees;

  double lo = rb.output_sets.front().a;
  double hi = rb.output_sets.front().c;
  for (const auto& s : rb.output_sets) {
    lo = std::min(lo, s.a);
    hi = std::max(hi, s.c);
  }

  const double first = std::floor(lo);
  const double last = std::ceil(hi);
  std::vector<double> mu;
  for (double t = first; t <= last; t += 1.0) {
    double m = 0.0;
    for (const auto& [set, activation] : clipped) m = std::max(m, std::min(activation, membership(*set, t)));
    mu.push_back(m);
  }
  // Moments about the middle of the sample range, summed in mirrored pairs so that a
  // symmetric aggregate gives exactly the middle.
  const double mid = 0.5 * (first + last);
  long double moment = 0.0L;
  long double area = 0.0L;
  for (std::size_t i = 0, j = mu.size() - 1; i <= j; ++i, --j) {
    const double ti = first + static_cast<double>(i);
    const double tj = first + static_cast<double>(j);
    if (i == j) {
      moment += static_cast<long double>(ti - mid) * mu[i];
      area += mu[i];
      break;
    }
    moment += static_cast<long double>(ti - mid) * mu[i] + static_cast<long double>(tj - mid) * mu[j];
    area += static_cast<long double>(mu[i]) + mu[j];
  }
  if (area <= 0.0L) return kNeutralDegrees;
  return std::clamp(static_cast<double>(mid + moment / area), kDegreeMin, kDegreeMax);
}

AxisRuleBases parse_rule_file(std::string_view text) {
  AxisRuleBases rbs;
  struct Pending {
    std::vector<FuzzySet> in, out;
    std::vector<Rule> rules;
  } px, py;

  std::istringstream lines{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tok(line);
    std::string kind;
    if (!(tok >> kind)) continue;
    const auto fail = [&](const std::string& msg) {
      throw RuleBaseError("rule file line " + std::to_string(lineno) + ": " + msg);
    };
    std::string axis;
    if (!(tok >> axis)) fail("missing axis");
    std::string extra;
    if (kind == "set") {
      FuzzySet s;
      if (!(tok >> s.label >> s.a >> s.b >> s.c) || (tok >> extra)) fail("expected: set <axis> <label> <a> <b> <c>");
      if (axis == "x") px.in.push_back(s);
      else if (axis == "y") py.in.push_back(s);
      else if (axis == "x_out") px.out.push_back(s);
      else if (axis == "y_out") py.out.push_back(s);
      else fail("unknown axis " + axis);
    } else if (kind == "rule") {
      Rule r;
      if (!(tok >> r.input >> r.output) || (tok >> extra)) fail("expected: rule <axis> <input> <output>");
      if (axis == "x") px.rules.push_back(r);
      else if (axis == "y") py.rules.push_back(r);
      else fail("unknown rule axis " + axis);
    } else {
      fail("unknown entry " + kind);
    }
  }

  const auto apply = [](Pending& p, RuleBase& rb) {
    if (!p.in.empty()) rb.input_sets = std::move(p.in);
    if (!p.out.empty()) rb.output_sets = std::move(p.out);
    if (!p.rules.empty()) rb.rules = std::move(p.rules);
    validate(rb);
  };
  apply(px, rbs.x);
  apply(py, rbs.y);
  return rbs;
}

AxisRuleBases load_rule_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RuleBaseError("cannot open rule file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_rule_file(ss.str());
}

std::string format_rule_file(const AxisRuleBases& rbs) {
  std::ostringstream out;
  const auto emit = [&](const RuleBase& rb, const char* axis) {
    for (const auto& s : rb.input_sets) out << "set " << axis << ' ' << s.label << ' ' << s.a << ' ' << s.b << ' ' << s.c << '\n';
    for (const auto& s : rb.output_sets) out << "set " << axis << "_out " << s.label << ' ' << s.a << ' ' << s.b << ' ' << s.c << '\n';
    for (const auto& r : rb.rules) out << "rule " << axis << ' ' << r.input << ' ' << r.output << '\n';
  };
  emit(rbs.x, "x");
  emit(rbs.y, "y");
  return out.str();
}

double smooth_z(double dz, ControllerState& state, const ControllerConfig& cfg) {
  state.z_history.push_back(dz);
  while (state.z_history.size() > cfg.z_window) state.z_history.pop_front();
  const double mean = std::accumulate(state.z_history.begin(), state.z_history.end(), 0.0) /
                      static_cast<double>(state.z_history.size());
  return std::round(mean * cfg.k_z);
}

ServoCommand step_controller(const Displacement& d, ControllerState& state, const ControllerConfig& cfg) {
  const double lim = cfg.rate_limit;
  const double delta_x = std::clamp(infer_axis(d.dx, cfg.rules.x) - kNeutralDegrees, -lim, lim);
  const double delta_y = std::clamp(infer_axis(d.dy, cfg.rules.y) - kNeutralDegrees, -lim, lim);
  const double delta_z = smooth_z(d.dz, state, cfg);

  state.angle_x = std::clamp(state.angle_x + delta_x, kDegreeMin, kDegreeMax);
  state.angle_y = std::clamp(state.angle_y + delta_y, kDegreeMin, kDegreeMax);
  state.angle_z = std::clamp(state.angle_z + delta_z, kDegreeMin, kDegreeMax);
  ++state.seq;

  ServoCommand cmd;
  cmd.x = static_cast<int>(std::lround(state.angle_x));
  cmd.y = static_cast<int>(std::lround(state.angle_y));
  cmd.z = static_cast<int>(std::lround(state.angle_z));
  cmd.seq = state.seq;
  return cmd;
}

}  // namespace glovearm
