#include "glovearm/service.hpp"

#include <charconv>
#include <cmath>
#include <iostream>
#include <random>
#include <sstream>

#include "glovearm/websocket.hpp"

namespace glovearm {

// --- SerialSink ------------------------------------------------------------------------

SerialSink::SerialSink(const std::string& path, bool pace) : out_(path, std::ios::binary | std::ios::app), pace_(pace) {
  if (!out_) throw std::runtime_error("cannot open serial sink " + path);
}

void SerialSink::write(const std::string& frame) {
  out_.write(frame.data(), static_cast<std::streamsize>(frame.size()));
  out_.flush();
  if (pace_) std::this_thread::sleep_for(std::chrono::duration<double>(serial_wire_time(frame.size())));
}

// --- ArmOwner --------------------------------------------------------------------------

wire::State ArmSnapshot::to_wire() const {
  wire::State s;
  s.x = static_cast<int>(std::lround(state.theta_base));
  s.y = static_cast<int>(std::lround(state.theta_shoulder));
  s.z = static_cast<int>(std::lround(state.theta_elbow));
  s.fk_x = fk.x;
  s.fk_y = fk.y;
  s.fk_z = fk.z;
  s.flags = torque.flags() | (grip_closed ? 4 : 0);
  return s;
}

ArmOwner::ArmOwner(ArmGeometry geometry, double payload_kg, std::unique_ptr<SerialSink> sink)
    : geometry_(geometry), payload_kg_(payload_kg), sink_(std::move(sink)) {}

ArmSnapshot ArmOwner::snapshot_locked() const {
  ArmSnapshot snap;
  snap.state = state_;
  snap.fk = forward_kinematics(state_, geometry_);
  snap.torque = static_torque(state_, geometry_, payload_kg_);
  snap.grip_closed = grip_closed_;
  snap.applied = log_.size();
  return snap;
}

ArmSnapshot ArmOwner::apply(const ServoCommand& cmd, const std::string& origin, std::uint64_t seq) {
  std::lock_guard lock(mu_);
  state_ = apply_command(state_, cmd);
  log_.push_back({origin, seq, cmd});
  if (sink_) sink_->write(encode_serial(cmd));
  const ArmSnapshot snap = snapshot_locked();
  for (const auto& [id, listener] : listeners_) listener(snap);
  return snap;
}

ArmSnapshot ArmOwner::set_grip(bool closed) {
  std::lock_guard lock(mu_);
  grip_closed_ = closed;
  const ArmSnapshot snap = snapshot_locked();
  for (const auto& [id, listener] : listeners_) listener(snap);
  return snap;
}

ArmSnapshot ArmOwner::snapshot() const {
  std::lock_guard lock(mu_);
  return snapshot_locked();
}

std::vector<AppliedCommand> ArmOwner::log() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::size_t ArmOwner::subscribe(Listener listener) {
  std::lock_guard lock(mu_);
  listeners_.emplace(next_listener_, std::move(listener));
  return next_listener_++;
}

void ArmOwner::unsubscribe(std::size_t id) {
  std::lock_guard lock(mu_);
  listeners_.erase(id);
}

// --- Server ----------------------------------------------------------------------------

Server::Server(ArmOwner& arm, ServerConfig cfg) : arm_(arm), cfg_(std::move(cfg)) {}

Server::~Server() { stop(); }

std::uint16_t Server::start() {
  listener_ = net::listen_tcp(cfg_.listen);
  port_ = net::local_port(listener_);
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
  return port_;
}

void Server::stop() {
  if (!running_.exchange(false)) return;
  listener_.shutdown();
  if (acceptor_.joinable()) acceptor_.join();
  listener_.close();
  std::list<Worker> workers;
  {
    std::lock_guard lock(workers_mu_);
    workers.swap(workers_);
  }
  for (auto& w : workers) w.sock->shutdown();
  for (auto& w : workers) {
    if (w.thread.joinable()) w.thread.join();
  }
}

void Server::accept_loop() {
  while (running_) {
    net::Socket client;
    try {
      client = net::accept_tcp(listener_);
    } catch (const net::NetError& e) {
      if (running_) std::cerr << "server: " << e.what() << '\n';
      return;
    }
    net::set_nodelay(client);
    auto sock = std::make_shared<net::Socket>(std::move(client));
    auto done = std::make_shared<std::atomic<bool>>(false);

    std::lock_guard lock(workers_mu_);
    for (auto it = workers_.begin(); it != workers_.end();) {
      if (*it->done) {
        it->thread.join();
        it = workers_.erase(it);
      } else {
        ++it;
      }
    }
    workers_.push_back({std::thread([this, sock, done] { serve_connection(sock, done); }), sock, done});
  }
}

void Server::serve_connection(std::shared_ptr<net::Socket> sock, std::shared_ptr<std::atomic<bool>> done) {
  Connection conn;
  net::LineReader reader(*sock);
  try {
    while (auto line = reader.read_line()) {
      net::send_all(*sock, handle_line(conn, *line) + "\n");
    }
  } catch (const net::NetError&) {
    // Peer went away or sent an oversized line; drop the connection.
  }
  disconnect(conn);
  *done = true;
}

std::string Server::new_token() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  while (true) {
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(rng() & 0xFFFFFFFFu));
    if (!sessions_.count(buf)) return buf;
  }
}

void Server::expire_idle_locked(std::chrono::steady_clock::time_point now) {
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    if (now - it->second.last_activity > cfg_.idle_timeout) {
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
}

std::size_t Server::session_count() const {
  std::lock_guard lock(sessions_mu_);
  return sessions_.size();
}

void Server::disconnect(Connection& conn) {
  if (!conn.session) return;
  std::lock_guard lock(sessions_mu_);
  sessions_.erase(*conn.session);
  conn.session.reset();
}

std::string Server::handle_line(Connection& conn, std::string_view line) {
  const auto err = [](int code, const std::string& text) { return wire::encode(wire::Error{code, text}); };

  wire::Message msg;
  try {
    msg = wire::decode(line);
  } catch (const wire::WireError& e) {
    return err(e.code(), e.what());
  }

  const auto now = std::chrono::steady_clock::now();

  if (const auto* hello = std::get_if<wire::Hello>(&msg)) {
    std::lock_guard lock(sessions_mu_);
    if (conn.session) sessions_.erase(*conn.session);
    const std::string token = new_token();
    sessions_[token] = Session{hello->client_id, 0, now};
    conn.session = token;
    conn.client_id = hello->client_id;
    return wire::encode(wire::Welcome{token});
  }

  const bool is_cmd = std::holds_alternative<wire::Cmd>(msg);
  const bool is_query = std::holds_alternative<wire::StateQuery>(msg);
  if (!is_cmd && !is_query) return err(wire::kForbidden, "server-side verb not accepted from clients");

  std::unique_lock lock(sessions_mu_);
  if (!conn.session) return err(wire::kNoSession, "send HELLO first");
  expire_idle_locked(now);
  auto it = sessions_.find(*conn.session);
  if (it == sessions_.end()) {
    conn.session.reset();
    return err(wire::kSessionExpired, "session expired");
  }
  Session& session = it->second;
  session.last_activity = now;

  if (is_query) {
    lock.unlock();
    return wire::encode(arm_.snapshot().to_wire());
  }

  const auto& cmd = std::get<wire::Cmd>(msg);
  if (cmd.seq <= session.last_seq) {
    return err(wire::kStaleSeq, "seq " + std::to_string(cmd.seq) + " <= last acked " + std::to_string(session.last_seq));
  }
  session.last_seq = cmd.seq;
  const std::string token = *conn.session;
  lock.unlock();

  ServoCommand servo;
  servo.x = cmd.x;
  servo.y = cmd.y;
  servo.z = cmd.z;
  servo.seq = cmd.seq;
  arm_.apply(servo, token, cmd.seq);
  return wire::encode(wire::Ack{cmd.seq});
}

// --- Gateway ---------------------------------------------------------------------------

Gateway::Gateway(ArmOwner& arm, ControllerConfig controller, GatewayConfig cfg)
    : arm_(arm), controller_cfg_(std::move(controller)), cfg_(std::move(cfg)) {
  subscription_ = arm_.subscribe([this](const ArmSnapshot&) {
    {
      std::lock_guard lock(push_mu_);
      dirty_ = true;
    }
    push_cv_.notify_one();
  });
}

Gateway::~Gateway() {
  stop();
  arm_.unsubscribe(subscription_);
}

std::uint16_t Gateway::start() {
  listener_ = net::listen_tcp(cfg_.listen);
  port_ = net::local_port(listener_);
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
  pusher_ = std::thread([this] { push_loop(); });
  return port_;
}

void Gateway::stop() {
  if (!running_.exchange(false)) return;
  listener_.shutdown();
  push_cv_.notify_all();
  if (acceptor_.joinable()) acceptor_.join();
  if (pusher_.joinable()) pusher_.join();
  listener_.close();
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(peers_mu_);
    for (auto& p : peers_) p->sock->shutdown();
    threads.swap(peer_threads_);
  }
  for (auto& t : threads) t.join();
  std::lock_guard lock(peers_mu_);
  peers_.clear();
}

bool Gateway::handle_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string verb;
  in >> verb;
  std::string extra;
  if (verb == "MOVE") {
    Displacement d;
    if (!(in >> d.dx >> d.dy >> d.dz) || (in >> extra) || !std::isfinite(d.dx) || !std::isfinite(d.dy) ||
        !std::isfinite(d.dz)) {
      return false;
    }
    std::lock_guard lock(control_mu_);
    // Another client may have moved the arm since our last command; continue from the real pose.
    const ArmState pose = arm_.snapshot().state;
    if (!last_sent_ || pose.theta_base != last_sent_->x || pose.theta_shoulder != last_sent_->y ||
        pose.theta_elbow != last_sent_->z) {
      controller_.angle_x = pose.theta_base;
      controller_.angle_y = pose.theta_shoulder;
      controller_.angle_z = pose.theta_elbow;
    }
    const ServoCommand cmd = step_controller(d, controller_, controller_cfg_);
    last_sent_ = cmd;
    arm_.apply(cmd, "gateway", cmd.seq);
    return true;
  }
  if (verb == "GRIP") {
    int v = -1;
    if (!(in >> v) || (in >> extra) || (v != 0 && v != 1)) return false;
    arm_.set_grip(v == 1);
    return true;
  }
  return false;
}

void Gateway::accept_loop() {
  while (running_) {
    net::Socket client;
    try {
      client = net::accept_tcp(listener_);
    } catch (const net::NetError& e) {
      if (running_) std::cerr << "gateway: " << e.what() << '\n';
      return;
    }
    net::set_nodelay(client);
    auto peer = std::make_shared<Peer>();
    peer->sock = std::make_shared<net::Socket>(std::move(client));
    std::lock_guard lock(peers_mu_);
    peer_threads_.emplace_back([this, peer] { serve_peer(peer); });
  }
}

void Gateway::send_to(Peer& peer, const std::string& text) {
  if (!peer.open) return;
  std::lock_guard lock(peer.write_mu);
  try {
    net::send_all(*peer.sock, ws::encode_frame(ws::Opcode::Text, text));
  } catch (const net::NetError&) {
    peer.open = false;
  }
}

void Gateway::serve_peer(std::shared_ptr<Peer> peer) {
  std::string buf;
  try {
    while (buf.find("\r\n\r\n") == std::string::npos) {
      const auto chunk = net::recv_some(*peer->sock, std::chrono::milliseconds(5000));
      if (!chunk || chunk->empty() || buf.size() > 8192) return;
      buf += *chunk;
    }
    const auto end = buf.find("\r\n\r\n");
    std::string response;
    try {
      response = ws::handshake_response(std::string_view(buf).substr(0, end));
    } catch (const ws::ProtocolError& e) {
      net::send_all(*peer->sock, "HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\n\r\n");
      return;
    }
    buf.erase(0, end + 4);
    {
      std::lock_guard lock(peer->write_mu);
      net::send_all(*peer->sock, response);
    }
    {
      std::lock_guard lock(peers_mu_);
      peers_.push_back(peer);
    }
    send_to(*peer, wire::encode(arm_.snapshot().to_wire()));

    while (running_ && peer->open) {
      while (auto frame = ws::decode_frame(buf)) {
        switch (frame->opcode) {
          case ws::Opcode::Text:
            if (!handle_text(frame->payload)) {
              std::cerr << "gateway: ignoring malformed message '" << frame->payload << "'\n";
            }
            break;
          case ws::Opcode::Ping: {
            std::lock_guard lock(peer->write_mu);
            net::send_all(*peer->sock, ws::encode_frame(ws::Opcode::Pong, frame->payload));
            break;
          }
          case ws::Opcode::Close: {
            std::lock_guard lock(peer->write_mu);
            net::send_all(*peer->sock, ws::encode_frame(ws::Opcode::Close, ""));
            peer->open = false;
            break;
          }
          default:
            break;
        }
        if (!peer->open) break;
      }
      if (!peer->open) break;
      const auto chunk = net::recv_some(*peer->sock, std::chrono::milliseconds(-1));
      if (!chunk || chunk->empty()) break;
      buf += *chunk;
    }
  } catch (const std::exception& e) {
    if (running_) std::cerr << "gateway: peer dropped: " << e.what() << '\n';
  }
  peer->open = false;
  std::lock_guard lock(peers_mu_);
  std::erase(peers_, peer);
}

void Gateway::push_loop() {
  const auto min_gap = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / cfg_.max_push_hz));
  auto last_push = std::chrono::steady_clock::now() - min_gap;
  while (true) {
    {
      std::unique_lock lock(push_mu_);
      push_cv_.wait(lock, [&] { return dirty_ || !running_; });
      if (!running_) return;
      // Throttle: hold the push until min_gap has passed since the previous one.
      const auto ready = last_push + min_gap;
      if (push_cv_.wait_until(lock, ready, [&] { return !running_; })) return;
      dirty_ = false;
    }
    last_push = std::chrono::steady_clock::now();
    const std::string text = wire::encode(arm_.snapshot().to_wire());
    std::vector<std::shared_ptr<Peer>> peers;
    {
      std::lock_guard lock(peers_mu_);
      peers = peers_;
    }
    for (auto& p : peers) send_to(*p, text);
    ++pushes_;
  }
}

}  // namespace glovearm
