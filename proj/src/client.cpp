#include "glovearm/client.hpp"

namespace glovearm {

const char* to_string(Phase p) {
  switch (p) {
    case Phase::Init: return "INIT";
    case Phase::Capture: return "CAPTURE";
    case Phase::Filter: return "FILTER";
    case Phase::Detect: return "DETECT";
    case Phase::Center: return "CENTER";
    case Phase::Fuzzy: return "FUZZY";
    case Phase::Send: return "SEND";
  }
  return "?";
}

StepReport client_step(ClientFsmState& fsm, const GrayFrame& frame, const PipelineConfig& cfg) {
  StepReport rep;
  fsm.phase = Phase::Capture;
  const std::uint64_t frame_no = ++fsm.counters.frames;

  fsm.phase = Phase::Filter;
  try {
    rep.binary = normalize_and_threshold(frame, cfg.band_low);
  } catch (const UniformFrameError&) {
    ++fsm.counters.degenerate;
    rep.degenerate = true;
    fsm.phase = Phase::Capture;
    return rep;
  }

  fsm.phase = Phase::Detect;
  std::optional<std::vector<Circle>> tips;
  try {
    const auto circles = hough_circles(*rep.binary, cfg.hough);
    tips = select_fingertips(circles);
  } catch (const TrackingLostError&) {
    ++fsm.counters.tracking_lost;
    rep.tracking_lost = true;
  }

  if (tips) {
    fsm.phase = Phase::Center;
    const HandCenter hc = hand_center(*tips, frame_no);
    rep.displacement = displacement(fsm.prev_center, hc);
    rep.center = hc;
    fsm.prev_center = hc;
  }

  fsm.phase = Phase::Fuzzy;
  const ServoCommand servo = step_controller(rep.displacement, fsm.controller, cfg.controller);

  fsm.phase = Phase::Send;
  rep.cmd = wire::Cmd{fsm.seq++, servo.x, servo.y, servo.z};
  ++fsm.counters.commands;

  fsm.phase = Phase::Capture;
  return rep;
}

}  // namespace glovearm
