#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "glovearm/arm.hpp"
#include "glovearm/client.hpp"
#include "glovearm/frame_io.hpp"
#include "glovearm/service.hpp"
#include "glovearm/vision.hpp"
#include "glovearm/wire.hpp"

namespace py = pybind11;
using namespace glovearm;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

GrayFrame frame_from_array(const U8Array& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D uint8 array (height, width)");
  GrayFrame f;
  f.height = static_cast<int>(a.shape(0));
  f.width = static_cast<int>(a.shape(1));
  f.pixels.assign(a.data(), a.data() + a.size());
  return f;
}

U8Array array_from_pixels(int width, int height, const std::vector<std::uint8_t>& px) {
  U8Array out({height, width});
  std::copy(px.begin(), px.end(), out.mutable_data());
  return out;
}

BinaryFrame binary_from_array(const U8Array& a) {
  const GrayFrame g = frame_from_array(a);
  BinaryFrame b{g.width, g.height, g.pixels};
  for (auto& v : b.bits) v = v != 0;
  return b;
}

py::dict message_to_dict(const wire::Message& m) {
  py::dict d;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, wire::Hello>) {
          d["type"] = "HELLO";
          d["client_id"] = v.client_id;
        } else if constexpr (std::is_same_v<T, wire::Welcome>) {
          d["type"] = "WELCOME";
          d["session"] = v.session;
        } else if constexpr (std::is_same_v<T, wire::Cmd>) {
          d["type"] = "CMD";
          d["seq"] = v.seq;
          d["x"] = v.x;
          d["y"] = v.y;
          d["z"] = v.z;
        } else if constexpr (std::is_same_v<T, wire::Ack>) {
          d["type"] = "ACK";
          d["seq"] = v.seq;
        } else if constexpr (std::is_same_v<T, wire::StateQuery>) {
          d["type"] = "STATE?";
        } else if constexpr (std::is_same_v<T, wire::State>) {
          d["type"] = "STATE";
          d["x"] = v.x;
          d["y"] = v.y;
          d["z"] = v.z;
          d["fk"] = py::make_tuple(v.fk_x, v.fk_y, v.fk_z);
          d["flags"] = v.flags;
        } else {
          d["type"] = "ERR";
          d["code"] = v.code;
          d["text"] = v.text;
        }
      },
      m);
  return d;
}

/// Arm owner plus line server plus gateway, for driving from Python.
class Service {
 public:
  Service(const std::string& listen, const std::string& ws_listen, double idle_timeout_s, double payload_kg)
      : arm_({}, payload_kg) {
    ServerConfig s;
    s.listen = net::parse_endpoint(listen);
    s.idle_timeout = std::chrono::milliseconds(static_cast<long>(idle_timeout_s * 1000));
    server_ = std::make_unique<Server>(arm_, s);
    GatewayConfig g;
    g.listen = net::parse_endpoint(ws_listen);
    gateway_ = std::make_unique<Gateway>(arm_, ControllerConfig{}, g);
  }

  std::pair<int, int> start() { return {server_->start(), gateway_->start()}; }
  void stop() {
    gateway_->stop();
    server_->stop();
  }
  ArmSnapshot snapshot() const { return arm_.snapshot(); }
  std::size_t applied() const { return arm_.log().size(); }

 private:
  ArmOwner arm_;
  std::unique_ptr<Server> server_;
  std::unique_ptr<Gateway> gateway_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Glove-driven arm teleoperation: vision, fuzzy control, arm model and service";

  py::register_exception<PgmError>(m, "PgmError", PyExc_ValueError);
  py::register_exception<SceneError>(m, "SceneError", PyExc_ValueError);
  py::register_exception<UniformFrameError>(m, "UniformFrameError", PyExc_ValueError);
  py::register_exception<TrackingLostError>(m, "TrackingLostError", PyExc_RuntimeError);
  py::register_exception<OrderingError>(m, "OrderingError", PyExc_ValueError);
  py::register_exception<RuleBaseError>(m, "RuleBaseError", PyExc_ValueError);
  py::register_exception<SerialFrameRejected>(m, "SerialFrameRejected", PyExc_ValueError);
  // WireError carries the ERR code as `.code`.
  static PyObject* wire_error = PyErr_NewException("glovearm._core.WireError", PyExc_ValueError, nullptr);
  m.add_object("WireError", py::handle(wire_error));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const wire::WireError& e) {
      py::object err = py::reinterpret_borrow<py::object>(wire_error)(e.what());
      err.attr("code") = e.code();
      PyErr_SetObject(wire_error, err.ptr());
    }
  });

  // frame io
  m.def(
      "load_pgm",
      [](py::bytes data, int min_side) {
        const std::string s = data;
        const auto f = load_pgm(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()), min_side);
        return array_from_pixels(f.width, f.height, f.pixels);
      },
      py::arg("data"), py::arg("min_side") = kMinFrameSide);
  m.def("save_pgm", [](const U8Array& a) {
    const auto bytes = save_pgm(frame_from_array(a));
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  });
  m.def(
      "synth_frame",
      [](const std::vector<std::pair<double, double>>& centers, int width, int height, double radius, double gain,
         double offset, double noise, std::uint64_t seed) {
        if (centers.size() != 5) throw std::invalid_argument("need exactly five LED centers");
        SynthScene s;
        for (std::size_t i = 0; i < 5; ++i) s.led_centers[i] = {centers[i].first, centers[i].second};
        s.led_radius = radius;
        s.gain = gain;
        s.offset = offset;
        s.noise_amplitude = noise;
        s.seed = seed;
        const auto f = synth_frame(s, width, height);
        return array_from_pixels(f.width, f.height, f.pixels);
      },
      py::arg("centers"), py::arg("width") = 320, py::arg("height") = 240, py::arg("radius") = 5.0,
      py::arg("gain") = 1.0, py::arg("offset") = 0.0, py::arg("noise") = 0.0, py::arg("seed") = 0);

  // vision
  py::class_<Circle>(m, "Circle")
      .def(py::init<double, double, int, int>(), py::arg("cx"), py::arg("cy"), py::arg("r"), py::arg("score") = 0)
      .def_readwrite("cx", &Circle::cx)
      .def_readwrite("cy", &Circle::cy)
      .def_readwrite("r", &Circle::r)
      .def_readwrite("score", &Circle::score)
      .def("__repr__", [](const Circle& c) {
        return "Circle(cx=" + std::to_string(c.cx) + ", cy=" + std::to_string(c.cy) + ", r=" + std::to_string(c.r) +
               ", score=" + std::to_string(c.score) + ")";
      });
  py::class_<HandCenter>(m, "HandCenter")
      .def_readonly("x", &HandCenter::x)
      .def_readonly("y", &HandCenter::y)
      .def_readonly("z", &HandCenter::z)
      .def_readonly("seq", &HandCenter::seq);

  m.def(
      "normalize_and_threshold",
      [](const U8Array& a, double band_low) {
        const auto b = normalize_and_threshold(frame_from_array(a), band_low);
        return array_from_pixels(b.width, b.height, b.bits);
      },
      py::arg("frame"), py::arg("band_low") = kThresholdBandLow);
  m.def(
      "hough_circles",
      [](const U8Array& bin, int r_min, int r_max) { return hough_circles(binary_from_array(bin), r_min, r_max); },
      py::arg("binary"), py::arg("r_min") = 3, py::arg("r_max") = 12, py::call_guard<py::gil_scoped_release>());
  m.def("select_fingertips", [](const std::vector<Circle>& c) { return select_fingertips(c); });
  m.def("hand_center", [](const std::vector<Circle>& tips, std::uint64_t seq) { return hand_center(tips, seq); },
        py::arg("tips"), py::arg("seq") = 0);

  // fuzzy
  m.def("membership", [](double a, double b, double c, double v) { return membership(FuzzySet{"", a, b, c}, v); });
  m.def("infer_axis", [](double d) { return infer_axis(d, default_rule_base()); });
  m.def("default_rules", [] { return format_rule_file(AxisRuleBases{}); });

  py::class_<ControllerConfig>(m, "ControllerConfig")
      .def(py::init<>())
      .def_static("from_rules", [](const std::string& text) {
        ControllerConfig c;
        c.rules = parse_rule_file(text);
        return c;
      })
      .def_readwrite("k_z", &ControllerConfig::k_z)
      .def_readwrite("z_window", &ControllerConfig::z_window)
      .def_readwrite("rate_limit", &ControllerConfig::rate_limit);

  struct Controller {
    ControllerConfig cfg;
    ControllerState state;
  };
  py::class_<Controller>(m, "Controller")
      .def(py::init([](const ControllerConfig& c) { return Controller{c, {}}; }), py::arg("config") = ControllerConfig{})
      .def("step",
           [](Controller& c, double dx, double dy, double dz) {
             const auto cmd = step_controller({dx, dy, dz}, c.state, c.cfg);
             return py::make_tuple(cmd.x, cmd.y, cmd.z);
           })
      .def_property_readonly("angles", [](const Controller& c) {
        return py::make_tuple(c.state.angle_x, c.state.angle_y, c.state.angle_z);
      });

  // arm
  m.def(
      "forward_kinematics",
      [](double base, double shoulder, double elbow) {
        const Vec3 p = forward_kinematics({base, shoulder, elbow}, ArmGeometry{});
        return py::make_tuple(p.x, p.y, p.z);
      },
      py::arg("base"), py::arg("shoulder"), py::arg("elbow"));
  m.def(
      "static_torque",
      [](double base, double shoulder, double elbow, double payload) {
        const auto t = static_torque({base, shoulder, elbow}, ArmGeometry{}, payload);
        py::dict d;
        d["shoulder"] = t.shoulder;
        d["elbow"] = t.elbow;
        d["shoulder_overload"] = t.shoulder_overload;
        d["elbow_overload"] = t.elbow_overload;
        return d;
      },
      py::arg("base"), py::arg("shoulder"), py::arg("elbow"), py::arg("payload") = 0.0);
  m.def("encode_serial", [](int x, int y, int z) {
    ServoCommand c;
    c.x = x;
    c.y = y;
    c.z = z;
    return py::bytes(encode_serial(c));
  });
  m.def("decode_serial", [](py::bytes data) {
    const std::string s = data;
    std::string_view view = s;
    std::vector<std::tuple<int, int, int>> out;
    while (auto c = decode_serial(view)) out.emplace_back(c->x, c->y, c->z);
    return out;
  });

  // wire
  m.def("wire_decode", [](const std::string& line) { return message_to_dict(wire::decode(line)); });
  m.def("wire_cmd", [](std::uint64_t seq, int x, int y, int z) { return wire::encode(wire::Cmd{seq, x, y, z}); });

  // client pipeline
  struct Pipeline {
    PipelineConfig cfg;
    ClientFsmState fsm;
  };
  py::class_<Pipeline>(m, "Pipeline")
      .def(py::init([](int r_min, int r_max, double band_low) {
             Pipeline p;
             p.cfg.hough.r_min = r_min;
             p.cfg.hough.r_max = r_max;
             p.cfg.band_low = band_low;
             return p;
           }),
           py::arg("r_min") = 3, py::arg("r_max") = 12, py::arg("band_low") = kThresholdBandLow)
      .def("step",
           [](Pipeline& p, const U8Array& frame) -> py::object {
             StepReport rep;
             const GrayFrame f = frame_from_array(frame);
             {
               py::gil_scoped_release release;
               rep = client_step(p.fsm, f, p.cfg);
             }
             py::dict d;
             d["degenerate"] = rep.degenerate;
             d["tracking_lost"] = rep.tracking_lost;
             d["displacement"] = py::make_tuple(rep.displacement.dx, rep.displacement.dy, rep.displacement.dz);
             d["center"] = rep.center ? py::object(py::make_tuple(rep.center->x, rep.center->y, rep.center->z)) : py::none();
             d["cmd"] = rep.cmd ? py::object(py::make_tuple(rep.cmd->seq, rep.cmd->x, rep.cmd->y, rep.cmd->z)) : py::none();
             return std::move(d);
           })
      .def_property_readonly("frames", [](const Pipeline& p) { return p.fsm.counters.frames; })
      .def_property_readonly("commands", [](const Pipeline& p) { return p.fsm.counters.commands; });

  // service
  py::class_<Service>(m, "Service")
      .def(py::init<const std::string&, const std::string&, double, double>(), py::arg("listen") = "127.0.0.1:0",
           py::arg("ws_listen") = "127.0.0.1:0", py::arg("idle_timeout") = 30.0, py::arg("payload") = 0.0)
      .def("start", &Service::start, "Returns (line_port, ws_port)")
      .def("stop", &Service::stop, py::call_guard<py::gil_scoped_release>())
      .def("state", [](const Service& s) { return wire::encode(s.snapshot().to_wire()); })
      .def_property_readonly("applied", &Service::applied);
}
