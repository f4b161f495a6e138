#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "glovearm/arm.hpp"
#include "glovearm/client.hpp"
#include "glovearm/frame_io.hpp"
#include "glovearm/service.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace glovearm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

/// Raised for bad input the user must fix (maps to exit code 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VisionOptions {
  int r_min = 3;
  int r_max = 12;
  double band_low = kThresholdBandLow;
  std::string rules;

  void add_to(CLI::App& app) {
    app.add_option("--r-min", r_min, "Smallest LED radius searched, px")->check(CLI::PositiveNumber);
    app.add_option("--r-max", r_max, "Largest LED radius searched, px")->check(CLI::PositiveNumber);
    app.add_option("--band-low", band_low, "Threshold cut on the stretched 0..255 scale")->check(CLI::Range(0.0, 255.0));
    app.add_option("--rules", rules, "Fuzzy rule file")->envname("GLOVEARM_RULES")->check(CLI::ExistingFile);
  }

  PipelineConfig pipeline() const {
    if (r_min > r_max) throw UsageError("--r-min must not exceed --r-max");
    PipelineConfig cfg;
    cfg.hough.r_min = r_min;
    cfg.hough.r_max = r_max;
    cfg.band_low = band_low;
    if (!rules.empty()) cfg.controller.rules = load_rule_file(rules);
    return cfg;
  }
};

/// Expands directories into their *.pgm files (sorted); plain files pass through.
std::vector<fs::path> collect_frames(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".pgm") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

std::string triple(double a, double b, double c) {
  char buf[96];
  // Adding 0.0 turns -0 into 0 so the log never shows "-0.00".
  std::snprintf(buf, sizeof buf, "(%.2f,%.2f,%.2f)", a + 0.0, b + 0.0, c + 0.0);
  return buf;
}

// --- synth ---------------------------------------------------------------------------------

struct SynthOptions {
  std::string out_dir;
  int count = 1;
  int width = 320;
  int height = 240;
  double radius = 5.0;
  double gain = 1.0;
  double offset = 0.0;
  double noise = 0.0;
  double drift = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> centers;
};

int cmd_synth(const SynthOptions& o) {
  SynthScene scene;
  scene.led_radius = o.radius;
  scene.gain = o.gain;
  scene.offset = o.offset;
  scene.noise_amplitude = o.noise;

  Lcg64 rng(o.seed);
  if (!o.centers.empty()) {
    if (o.centers.size() != 10) throw UsageError("--centers needs 5 x,y pairs (10 numbers)");
    for (std::size_t i = 0; i < 5; ++i) scene.led_centers[i] = {o.centers[2 * i], o.centers[2 * i + 1]};
  } else {
    // Seeded layout: a loose row of fingertips around the frame centre.
    for (std::size_t i = 0; i < 5; ++i) {
      scene.led_centers[i] = {o.width * (0.2 + 0.15 * static_cast<double>(i)) + rng.next_symmetric(o.width * 0.03),
                              o.height * 0.5 + rng.next_symmetric(o.height * 0.2)};
    }
  }

  fs::create_directories(o.out_dir);
  for (int n = 1; n <= o.count; ++n) {
    scene.seed = o.seed + static_cast<std::uint64_t>(n);
    GrayFrame frame = synth_frame(scene, o.width, o.height);
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04d.pgm", n);
    const fs::path path = fs::path(o.out_dir) / name;
    save_pgm_file(frame, path.string());
    std::cout << path.string() << '\n';

    if (o.drift > 0.0) {
      const double r = o.radius + 1.0;
      for (auto& c : scene.led_centers) {
        c.x = std::clamp(c.x + rng.next_symmetric(o.drift), r, o.width - r);
        c.y = std::clamp(c.y + rng.next_symmetric(o.drift), r, o.height - r);
      }
    }
  }
  return kExitOk;
}

// --- pipeline ------------------------------------------------------------------------------

struct PipelineOptions {
  std::vector<std::string> inputs;
  std::string dump_binary;
  bool json = false;
  VisionOptions vision;
};

int cmd_pipeline(const PipelineOptions& o) {
  const PipelineConfig cfg = o.vision.pipeline();
  const auto paths = collect_frames(o.inputs);
  if (paths.empty()) {
    std::cerr << "pipeline: no frames found\n";
    return kExitUsage;
  }
  if (!o.dump_binary.empty()) fs::create_directories(o.dump_binary);

  ClientFsmState fsm;
  std::size_t loaded = 0;
  for (const auto& path : paths) {
    GrayFrame frame;
    try {
      frame = load_pgm_file(path.string());
    } catch (const std::exception& e) {
      std::cerr << "pipeline: skipping " << path.string() << ": " << e.what() << '\n';
      continue;
    }
    ++loaded;
    const StepReport rep = client_step(fsm, frame, cfg);
    const std::uint64_t n = fsm.counters.frames;

    if (!o.dump_binary.empty() && rep.binary) {
      save_pgm_file(to_gray(*rep.binary), (fs::path(o.dump_binary) / path.filename()).string());
    }

    if (o.json) {
      json row = {{"frame", n}, {"file", path.string()}};
      if (rep.degenerate) row["status"] = "degenerate";
      else if (rep.tracking_lost) row["status"] = "tracking_lost";
      else row["status"] = "ok";
      if (rep.center) row["center"] = {rep.center->x, rep.center->y, rep.center->z};
      row["displacement"] = {rep.displacement.dx, rep.displacement.dy, rep.displacement.dz};
      if (rep.cmd) row["cmd"] = {{"seq", rep.cmd->seq}, {"x", rep.cmd->x}, {"y", rep.cmd->y}, {"z", rep.cmd->z}};
      std::cout << row.dump() << '\n';
    } else if (rep.degenerate) {
      std::cout << n << " degenerate frame, no command\n";
    } else {
      std::cout << n;
      if (rep.center) std::cout << " center=" << triple(rep.center->x, rep.center->y, rep.center->z);
      else std::cout << " tracking-lost";
      const auto& d = rep.displacement;
      std::cout << " disp=" << triple(d.dx, d.dy, d.dz);
      if (rep.cmd) std::cout << " cmd=(" << rep.cmd->x << ',' << rep.cmd->y << ',' << rep.cmd->z << ") seq=" << rep.cmd->seq;
      std::cout << '\n';
    }
  }

  const auto& c = fsm.counters;
  std::cerr << "frames=" << c.frames << " commands=" << c.commands << " degenerate=" << c.degenerate
            << " tracking_lost=" << c.tracking_lost << " unreadable=" << paths.size() - loaded << '\n';
  return loaded == 0 ? kExitFailure : kExitOk;
}

// --- serve ---------------------------------------------------------------------------------

struct ServeOptions {
  std::string listen = "127.0.0.1:7070";
  std::string ws_listen = "127.0.0.1:7071";
  std::string serial;
  bool pace = false;
  double idle_timeout_s = 30.0;
  double payload = 0.0;
  double max_push_hz = 30.0;
  std::string rules;
};

int cmd_serve(const ServeOptions& o) {
  // Block termination signals before any thread starts so only sigwait sees them.
  sigset_t sigs;
  sigemptyset(&sigs);
  sigaddset(&sigs, SIGINT);
  sigaddset(&sigs, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &sigs, nullptr);

  std::unique_ptr<SerialSink> sink;
  if (!o.serial.empty()) sink = std::make_unique<SerialSink>(o.serial, o.pace);
  ArmOwner arm({}, o.payload, std::move(sink));

  ServerConfig scfg;
  scfg.listen = net::parse_endpoint(o.listen);
  scfg.idle_timeout = std::chrono::milliseconds(static_cast<long>(o.idle_timeout_s * 1000.0));
  Server server(arm, scfg);

  ControllerConfig ctl;
  if (!o.rules.empty()) ctl.rules = load_rule_file(o.rules);
  GatewayConfig gcfg;
  gcfg.listen = net::parse_endpoint(o.ws_listen);
  gcfg.max_push_hz = o.max_push_hz;
  Gateway gateway(arm, ctl, gcfg);

  const auto port = server.start();
  const auto wport = gateway.start();
  std::cerr << "serving line protocol on " << scfg.listen.host << ':' << port << ", dashboard on ws://"
            << gcfg.listen.host << ':' << wport << "/\n";

  int sig = 0;
  sigwait(&sigs, &sig);
  std::cerr << "shutting down (" << sig << ")\n";
  gateway.stop();
  server.stop();
  std::cerr << "applied " << arm.log().size() << " commands\n";
  return kExitOk;
}

// --- client --------------------------------------------------------------------------------

struct ClientOptions {
  std::string server = "127.0.0.1:7070";
  std::string id = "glove";
  std::vector<std::string> inputs;
  double fps = 0.0;
  int loops = 1;
  bool json = false;
  VisionOptions vision;
};

int cmd_client(const ClientOptions& o) {
  const PipelineConfig cfg = o.vision.pipeline();
  const auto paths = collect_frames(o.inputs);
  if (paths.empty()) {
    std::cerr << "client: no frames found\n";
    return kExitUsage;
  }
  std::vector<GrayFrame> frames;
  for (const auto& p : paths) {
    try {
      frames.push_back(load_pgm_file(p.string()));
    } catch (const std::exception& e) {
      std::cerr << "client: skipping " << p.string() << ": " << e.what() << '\n';
    }
  }
  if (frames.empty()) return kExitFailure;

  net::LineClient conn(net::parse_endpoint(o.server));
  const auto welcome = wire::decode(conn.request(wire::encode(wire::Hello{o.id})));
  if (!std::holds_alternative<wire::Welcome>(welcome)) {
    std::cerr << "client: server refused HELLO: " << wire::encode(welcome) << '\n';
    return kExitFailure;
  }

  ClientFsmState fsm;
  fsm.phase = Phase::Init;
  const auto period = o.fps > 0 ? std::chrono::duration<double>(1.0 / o.fps) : std::chrono::duration<double>(0);
  auto next = std::chrono::steady_clock::now();
  std::uint64_t errors = 0;
  for (int loop = 0; loop < o.loops; ++loop) {
    for (const auto& frame : frames) {
      if (o.fps > 0) {
        std::this_thread::sleep_until(next);
        next += std::chrono::duration_cast<std::chrono::steady_clock::duration>(period);
      }
      const StepReport rep = client_step(fsm, frame, cfg);
      if (!rep.cmd) continue;
      const std::string reply = conn.request(wire::encode(*rep.cmd));
      const bool acked = reply == wire::encode(wire::Ack{rep.cmd->seq});
      errors += !acked;
      if (o.json) {
        std::cout << json{{"seq", rep.cmd->seq}, {"x", rep.cmd->x}, {"y", rep.cmd->y}, {"z", rep.cmd->z}, {"reply", reply}}.dump()
                  << '\n';
      } else {
        std::cout << wire::encode(*rep.cmd) << " -> " << reply << '\n';
      }
    }
  }
  std::cerr << "sent=" << fsm.counters.commands << " errors=" << errors << '\n';
  return errors ? kExitFailure : kExitOk;
}

// --- simulate ------------------------------------------------------------------------------

struct SimulateOptions {
  std::string log;
  double payload = 0.0;
  double claw_len = ArmGeometry{}.claw_len;
  bool json = false;
};

/// Reads serial frames "(x,y,z)" and/or wire "CMD seq x y z" lines.
std::vector<ServoCommand> read_command_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  std::vector<ServoCommand> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("CMD ", 0) == 0) {
      const auto m = wire::decode(line);
      const auto& c = std::get<wire::Cmd>(m);
      ServoCommand s;
      s.x = c.x;
      s.y = c.y;
      s.z = c.z;
      s.seq = c.seq;
      out.push_back(s);
      continue;
    }
    const std::string framed = line + "\n";
    std::string_view view = framed;
    while (true) {
      try {
        auto cmd = decode_serial(view);
        if (!cmd) break;
        out.push_back(*cmd);
      } catch (const SerialFrameRejected& e) {
        std::cerr << "simulate: " << e.what() << '\n';
      }
    }
  }
  return out;
}

int cmd_simulate(const SimulateOptions& o) {
  if (o.payload < 0) throw UsageError("--payload must be >= 0");
  ArmGeometry g;
  g.claw_len = o.claw_len;
  const auto cmds = read_command_log(o.log);

  ArmState state;
  if (!o.json && !cmds.empty()) {
    std::printf("%4s %4s %4s %4s %9s %9s %9s %9s %9s %s\n", "#", "x", "y", "z", "fk_x", "fk_y", "fk_z", "shoulder",
                "elbow", "overload");
  }
  int row = 0;
  for (const auto& c : cmds) {
    state = apply_command(state, c);
    const Vec3 p = forward_kinematics(state, g);
    const TorqueReport t = static_torque(state, g, o.payload);
    ++row;
    std::string flags = t.shoulder_overload && t.elbow_overload ? "SHOULDER,ELBOW"
                        : t.shoulder_overload                   ? "SHOULDER"
                        : t.elbow_overload                      ? "ELBOW"
                                                                : "-";
    if (o.json) {
      std::cout << json{{"row", row},
                        {"cmd", {c.x, c.y, c.z}},
                        {"fk", {p.x, p.y, p.z}},
                        {"torque", {{"shoulder", t.shoulder}, {"elbow", t.elbow}}},
                        {"overload", {{"shoulder", t.shoulder_overload}, {"elbow", t.elbow_overload}}}}
                       .dump()
                << '\n';
    } else {
      std::printf("%4d %4d %4d %4d %9.3f %9.3f %9.3f %9.3f %9.3f %s\n", row, c.x, c.y, c.z, p.x, p.y, p.z, t.shoulder,
                  t.elbow, flags.c_str());
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Glove-driven robotic arm: vision pipeline, fuzzy control, arm simulator and server"};
  app.require_subcommand(1);

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Render synthetic LED frames as PGM files");
  synth->add_option("--out-dir,-o", so.out_dir, "Output directory")->required();
  synth->add_option("--count,-n", so.count, "Number of frames")->check(CLI::PositiveNumber);
  synth->add_option("--width", so.width)->check(CLI::Range(kMinFrameSide, 8192));
  synth->add_option("--height", so.height)->check(CLI::Range(kMinFrameSide, 8192));
  synth->add_option("--radius", so.radius, "LED radius, px")->check(CLI::PositiveNumber);
  synth->add_option("--gain", so.gain)->check(CLI::PositiveNumber);
  synth->add_option("--offset", so.offset);
  synth->add_option("--noise", so.noise, "Uniform noise amplitude")->check(CLI::NonNegativeNumber);
  synth->add_option("--drift", so.drift, "Random walk per frame, px")->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", so.seed);
  synth->add_option("--centers", so.centers, "Five LED centres: x1,y1,...,x5,y5")->delimiter(',');

  PipelineOptions po;
  auto* pipeline = app.add_subcommand("pipeline", "Replay the client loop over PGM frames");
  pipeline->add_option("inputs", po.inputs, "Frame files or directories")->required();
  pipeline->add_option("--dump-binary", po.dump_binary, "Write thresholded frames into this directory");
  pipeline->add_flag("--json", po.json, "One JSON object per frame");
  po.vision.add_to(*pipeline);

  ServeOptions sv;
  auto* serve = app.add_subcommand("serve", "Run the line-protocol server and the dashboard gateway");
  serve->add_option("--listen", sv.listen, "host:port for the line protocol")->envname("GLOVEARM_LISTEN");
  serve->add_option("--ws-listen", sv.ws_listen, "host:port for the WebSocket gateway")->envname("GLOVEARM_WS_LISTEN");
  serve->add_option("--serial", sv.serial, "Append serial frames to this file or device")->envname("GLOVEARM_SERIAL");
  serve->add_flag("--pace", sv.pace, "Pace serial writes at 9600 bps 8N1");
  serve->add_option("--idle-timeout", sv.idle_timeout_s, "Session idle timeout, s")
      ->envname("GLOVEARM_IDLE_TIMEOUT")
      ->check(CLI::PositiveNumber);
  serve->add_option("--payload", sv.payload, "Payload at the claw, kg")->envname("GLOVEARM_PAYLOAD")->check(CLI::NonNegativeNumber);
  serve->add_option("--max-push-hz", sv.max_push_hz, "Dashboard push rate limit")
      ->envname("GLOVEARM_MAX_PUSH_HZ")
      ->check(CLI::PositiveNumber);
  serve->add_option("--rules", sv.rules, "Fuzzy rule file for dashboard moves")->envname("GLOVEARM_RULES")->check(CLI::ExistingFile);

  ClientOptions co;
  auto* client = app.add_subcommand("client", "Stream commands computed from frames to a server");
  client->add_option("inputs", co.inputs, "Frame files or directories")->required();
  client->add_option("--server", co.server, "host:port")->envname("GLOVEARM_SERVER");
  client->add_option("--id", co.id, "Client id sent in HELLO")->envname("GLOVEARM_CLIENT_ID");
  client->add_option("--fps", co.fps, "Frame rate (0 = as fast as possible)")->check(CLI::NonNegativeNumber);
  client->add_option("--loops", co.loops, "Replay the frame list this many times")->check(CLI::PositiveNumber);
  client->add_flag("--json", co.json);
  co.vision.add_to(*client);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "FK trace and torque audit for a command log");
  simulate->add_option("log", sim.log, "Serial frames or CMD lines")->required();
  simulate->add_option("--payload", sim.payload, "Payload at the claw, kg")->envname("GLOVEARM_PAYLOAD");
  simulate->add_option("--claw-len", sim.claw_len, "Claw length, cm")->check(CLI::PositiveNumber);
  simulate->add_flag("--json", sim.json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(so);
    if (*pipeline) return cmd_pipeline(po);
    if (*serve) return cmd_serve(sv);
    if (*client) return cmd_client(co);
    if (*simulate) return cmd_simulate(sim);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const RuleBaseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SceneError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
