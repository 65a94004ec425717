#include "ctxtrack/bridge_server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <deque>
#include <set>
#include <thread>

namespace ctxtrack {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  using Registry = std::set<std::shared_ptr<Connection>>;

  /// Everything a connection needs that does not change while the session runs.
  struct Context {
    asio::io_context& ioc;
    Session& session;
    Registry& registry;
    Bounds bounds;
    BridgeOptions options;
    Json info;
  };

  Connection(tcp::socket socket, const Context& ctx) : ws_(std::move(socket)), ctx_(ctx) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return self->drop();
      self->greet();
      self->read();
    });
  }

  bool negotiated() const { return version_.has_value(); }

  /// Queues a message; drops the client when its queue is full.
  void send(std::shared_ptr<const std::string> msg) {
    if (closed_) return;
    if (outbox_.size() >= ctx_.options.client_queue) return close();
    outbox_.push_back(std::move(msg));
    if (outbox_.size() == 1) write();
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    ctx_.registry.erase(shared_from_this());
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
  }

 private:
  int wire_version() const { return version_.value_or(ctx_.options.protocol_version); }

  void greet() { send_json(hello_message(ctx_.options.protocol_version, ctx_.info)); }

  void send_json(const Json& j) { send(std::make_shared<const std::string>(j.dump())); }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->drop();
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->handle(text);
      if (!self->closed_) self->read();
    });
  }

  void write() {
    ws_.text(true);
    ws_.async_write(asio::buffer(*outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return self->drop();
      self->outbox_.pop_front();
      if (!self->closed_ && !self->outbox_.empty()) self->write();
    });
  }

  void drop() {
    closed_ = true;
    ctx_.registry.erase(shared_from_this());
  }

  void handle(const std::string& text) {
    Json msg;
    std::optional<long> ref;
    try {
      msg = Json::parse(text);
      if (!msg.is_object()) throw ProtocolError("message must be a JSON object");
      if (msg.contains("ref") && msg["ref"].is_number_integer()) ref = msg["ref"].get<long>();
      if (!msg.contains("type") || !msg["type"].is_string()) throw ProtocolError("message needs a string 'type'");
      const std::string type = msg["type"];
      if (type == "hello") return hello(msg, ref);
      if (!version_) throw ProtocolError("send hello before " + type);
      if (!msg.contains("version") || !msg["version"].is_number_integer() || msg["version"].get<int>() != *version_)
        throw ProtocolError("message version does not match the negotiated version " + std::to_string(*version_));
      if (type != "command") throw ProtocolError("clients may not send '" + type + "' messages");
      if (!msg.contains("command")) throw ProtocolError("command message needs a 'command' object");
      auto cmd = command_from_json(msg["command"], ctx_.bounds);
      std::weak_ptr<Connection> weak = shared_from_this();
      auto& ioc = ctx_.ioc;
      const int version = *version_;
      ctx_.session.submit(std::move(cmd), [weak, &ioc, version, ref](const std::string& reason) {
        asio::post(ioc, [weak, version, ref, reason] {
          if (auto self = weak.lock()) self->send_json(error_message(version, reason, ref));
        });
      });
    } catch (const Json::exception& e) {
      send_json(error_message(wire_version(), std::string("malformed message: ") + e.what(), ref));
    } catch (const ProtocolError& e) {
      send_json(error_message(wire_version(), e.what(), ref));
    }
  }

  void hello(const Json& msg, std::optional<long> ref) {
    const auto chosen = negotiate_version(offered_versions(msg), supported_protocol_versions());
    if (!chosen) {
      std::string offered;
      for (int v : supported_protocol_versions()) offered += (offered.empty() ? "" : ", ") + std::to_string(v);
      send_json(error_message(wire_version(), "unsupported protocol version; server speaks " + offered, ref));
      return close_after_flush();
    }
    version_ = *chosen;
    send_json(hello_message(*version_, {{"accepted", true}}));
  }

  void close_after_flush() {
    // Let the queued error go out before closing.
    auto self = shared_from_this();
    auto timer = std::make_shared<asio::steady_timer>(ws_.get_executor(), std::chrono::milliseconds(50));
    timer->async_wait([self, timer](beast::error_code) { self->close(); });
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  const Context& ctx_;
  std::deque<std::shared_ptr<const std::string>> outbox_;
  std::optional<int> version_;
  bool closed_ = false;
};

}  // namespace

struct BridgeServer::Impl {
  Session& session;
  asio::io_context ioc;
  tcp::acceptor acceptor;
  Connection::Registry connections;
  std::atomic<std::size_t> client_count{0};
  std::thread io_thread;
  std::thread sim_thread;
  std::atomic<bool> stopping{false};
  std::mutex mutex;
  bool started = false;
  bool stopped = false;
  Connection::Context context;

  Impl(Session& s, const std::string& address, unsigned short port)
      : session(s),
        acceptor(ioc, tcp::endpoint(asio::ip::make_address(address), port)),
        context{ioc,
                s,
                connections,
                s.simulation().world().bounds,
                s.simulation().config().bridge,
                {{"scenario", s.simulation().script().name}, {"dt", s.simulation().config().agent.dt}}} {}

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      auto c = std::make_shared<Connection>(std::move(socket), context);
      connections.insert(c);
      client_count = connections.size();
      c->start();
      accept();
    });
  }

  void broadcast(std::string text) {
    auto msg = std::make_shared<const std::string>(std::move(text));
    asio::post(ioc, [this, msg] {
      const auto targets = connections;  // send() may erase
      for (const auto& c : targets)
        if (c->negotiated()) c->send(msg);
      client_count = connections.size();
    });
  }

  void simulate() {
    using clock = std::chrono::steady_clock;
    const auto& config = session.simulation().config();
    auto next = clock::now();
    while (!stopping) {
      const auto r = session.advance();
      if (r.snapshot_due) broadcast(snapshot_message(config.bridge.protocol_version, session.snapshot()).dump());
      next += std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(config.agent.dt / session.speed()));
      const auto now = clock::now();
      if (next < now - std::chrono::seconds(1)) next = now;  // fell far behind; do not try to catch up
      std::this_thread::sleep_until(next);
    }
  }
};

BridgeServer::BridgeServer(Session& session, const std::string& address, unsigned short port) {
  const int v = session.simulation().config().bridge.protocol_version;
  const auto& supported = supported_protocol_versions();
  if (std::find(supported.begin(), supported.end(), v) == supported.end())
    throw std::invalid_argument("bridge.protocol_version " + std::to_string(v) + " is not supported by this build");
  impl_ = std::make_unique<Impl>(session, address, port);
}

BridgeServer::~BridgeServer() { stop(); }

unsigned short BridgeServer::port() const { return impl_->acceptor.local_endpoint().port(); }

std::size_t BridgeServer::clients() const { return impl_->client_count; }

void BridgeServer::start() {
  if (impl_->started) return;
  impl_->started = true;
  impl_->accept();
  impl_->io_thread = std::thread([this] {
    auto guard = asio::make_work_guard(impl_->ioc);
    impl_->ioc.run();
  });
  impl_->sim_thread = std::thread([this] { impl_->simulate(); });
}

void BridgeServer::stop() {
  {
    std::lock_guard lock(impl_->mutex);
    if (impl_->stopped) return;
    impl_->stopped = true;
  }
  impl_->stopping = true;
  if (impl_->sim_thread.joinable()) impl_->sim_thread.join();
  asio::post(impl_->ioc, [this] {
    beast::error_code ec;
    impl_->acceptor.close(ec);
    const auto all = impl_->connections;
    for (const auto& c : all) c->close();
  });
  // Give the close handshakes a moment, then stop the loop.
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  impl_->ioc.stop();
  if (impl_->io_thread.joinable()) impl_->io_thread.join();
}

}  // namespace ctxtrack
