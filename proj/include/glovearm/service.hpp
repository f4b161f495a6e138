#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "glovearm/arm.hpp"
#include "glovearm/net.hpp"
#include "glovearm/wire.hpp"

namespace glovearm {

/// Appends encoded serial frames to a file or character device, optionally paced at
/// the UART's 9600 bps 8N1 wire time.
class SerialSink {
 public:
  explicit SerialSink(const std::string& path, bool pace = false);
  void write(const std::string& frame);

 private:
  std::ofstream out_;
  bool pace_;
};

struct ArmSnapshot {
  ArmState state;
  Vec3 fk;
  TorqueReport torque;
  bool grip_closed = false;
  std::uint64_t applied = 0;  // commands applied so far

  wire::State to_wire() const;
};

struct AppliedCommand {
  std::string origin;  // session token, or "gateway"
  std::uint64_t seq = 0;
  ServoCommand cmd;
};

/// The single owner of the simulated arm. Every mutation goes through here and is
/// applied strictly one at a time, in arrival order.
class ArmOwner {
 public:
  using Listener = std::function<void(const ArmSnapshot&)>;

  explicit ArmOwner(ArmGeometry geometry = {}, double payload_kg = 0.0, std::unique_ptr<SerialSink> sink = nullptr);

  ArmSnapshot apply(const ServoCommand& cmd, const std::string& origin, std::uint64_t seq);
  ArmSnapshot set_grip(bool closed);
  ArmSnapshot snapshot() const;
  std::vector<AppliedCommand> log() const;

  /// Listeners run on the mutating thread while the owner's lock is held; keep them short.
  std::size_t subscribe(Listener listener);
  void unsubscribe(std::size_t id);

 private:
  ArmSnapshot snapshot_locked() const;

  ArmGeometry geometry_;
  double payload_kg_;
  std::unique_ptr<SerialSink> sink_;
  mutable std::mutex mu_;
  ArmState state_;
  bool grip_closed_ = false;
  std::vector<AppliedCommand> log_;
  std::map<std::size_t, Listener> listeners_;
  std::size_t next_listener_ = 0;
};

struct ServerConfig {
  net::Endpoint listen{"127.0.0.1", 7070};
  std::chrono::milliseconds idle_timeout{30000};
};

/// Multi-client line-protocol server driving one shared arm.
class Server {
 public:
  Server(ArmOwner& arm, ServerConfig cfg);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts accepting; returns the bound port.
  std::uint16_t start();
  void stop();
  std::uint16_t port() const { return port_; }

  /// Per-connection protocol state, exposed so the line handler can be tested without sockets.
  struct Connection {
    std::optional<std::string> session;
    std::string client_id;
  };

  /// Handles one request line and returns the reply line (without LF).
  std::string handle_line(Connection& conn, std::string_view line);
  /// Drops the connection's session.
  void disconnect(Connection& conn);

  std::size_t session_count() const;

 private:
  struct Session {
    std::string client_id;
    std::uint64_t last_seq = 0;
    std::chrono::steady_clock::time_point last_activity;
  };
  struct Worker {
    std::thread thread;
    std::shared_ptr<net::Socket> sock;
    std::shared_ptr<std::atomic<bool>> done;
  };

  void accept_loop();
  void serve_connection(std::shared_ptr<net::Socket> sock, std::shared_ptr<std::atomic<bool>> done);
  std::string new_token();
  void expire_idle_locked(std::chrono::steady_clock::time_point now);

  ArmOwner& arm_;
  ServerConfig cfg_;
  net::Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;

  mutable std::mutex sessions_mu_;
  std::map<std::string, Session> sessions_;

  std::mutex workers_mu_;
  std::list<Worker> workers_;
};

struct GatewayConfig {
  net::Endpoint listen{"127.0.0.1", 7071};
  double max_push_hz = 30.0;
};

/// RFC 6455 endpoint for the dashboard. Pushes "STATE ..." text after arm changes
/// (throttled) and accepts "MOVE dx dy dz" and "GRIP 0|1".
class Gateway {
 public:
  Gateway(ArmOwner& arm, ControllerConfig controller, GatewayConfig cfg);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  std::uint16_t start();
  void stop();
  std::uint16_t port() const { return port_; }

  /// Handles one inbound dashboard message. Returns false for malformed input.
  bool handle_text(std::string_view text);

  std::uint64_t pushes() const { return pushes_.load(); }

 private:
  struct Peer {
    std::shared_ptr<net::Socket> sock;
    std::mutex write_mu;
    std::atomic<bool> open{true};
  };

  void accept_loop();
  void serve_peer(std::shared_ptr<Peer> peer);
  void push_loop();
  void send_to(Peer& peer, const std::string& text);

  ArmOwner& arm_;
  ControllerConfig controller_cfg_;
  GatewayConfig cfg_;

  std::mutex control_mu_;
  ControllerState controller_;
  std::optional<ServoCommand> last_sent_;

  net::Socket listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::thread pusher_;

  std::mutex push_mu_;
  std::condition_variable push_cv_;
  bool dirty_ = false;
  std::atomic<std::uint64_t> pushes_{0};
  std::size_t subscription_ = 0;

  std::mutex peers_mu_;
  std::vector<std::shared_ptr<Peer>> peers_;
  std::vector<std::thread> peer_threads_;
};

}  // namespace glovearm
