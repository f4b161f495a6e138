#pragma once

#include <cstdint>
#include <optional>

#include "glovearm/fuzzy.hpp"
#include "glovearm/vision.hpp"
#include "glovearm/wire.hpp"

namespace glovearm {

/// Stages of the client loop, in execution order; SEND loops back to CAPTURE.
enum class Phase { Init, Capture, Filter, Detect, Center, Fuzzy, Send };

const char* to_string(Phase p);

struct PipelineConfig {
  HoughParams hough;
  double band_low = kThresholdBandLow;
  ControllerConfig controller;
};

struct ClientCounters {
  std::uint64_t frames = 0;
  std::uint64_t degenerate = 0;     // uniform frames, no command
  std::uint64_t tracking_lost = 0;  // fewer than five tips, zero displacement
  std::uint64_t commands = 0;
};

struct ClientFsmState {
  Phase phase = Phase::Init;
  std::optional<HandCenter> prev_center;
  ControllerState controller;
  std::uint64_t seq = 1;  // next command number
  ClientCounters counters;
};

/// Everything one frame produced, for logging.
struct StepReport {
  bool degenerate = false;
  bool tracking_lost = false;
  std::optional<BinaryFrame> binary;
  std::optional<HandCenter> center;
  Displacement displacement;
  std::optional<wire::Cmd> cmd;
};

/// Runs FILTER -> DETECT -> CENTER -> FUZZY -> SEND on one frame. A uniform frame emits
/// no command; a frame with fewer than five tips emits one for zero displacement.
/// Frame sequence numbers are assigned from the frame counter, not frame.seq.
StepReport client_step(ClientFsmState& fsm, const GrayFrame& frame, const PipelineConfig& cfg);

}  // namespace glovearm
