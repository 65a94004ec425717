#pragma once
/**
 * @file   bridge_server.hpp
 * @brief  WebSocket transport for a live Session.
 *
 * One I/O thread serves every connection; one simulation thread paces the
 * session in real time and hands snapshots to the I/O thread. A client whose
 * outbound queue exceeds `BridgeOptions::client_queue` is disconnected.
 */

#include "ctxtrack/bridge.hpp"

#include <memory>
#include <string>

namespace ctxtrack {

class BridgeServer {
 public:
  /// Binds immediately; port 0 picks a free port (see `port()`). Throws on bind failure.
  BridgeServer(Session& session, const std::string& address, unsigned short port);
  ~BridgeServer();

  BridgeServer(const BridgeServer&) = delete;
  BridgeServer& operator=(const BridgeServer&) = delete;

  unsigned short port() const;
  /// Starts the I/O and simulation threads.
  void start();
  /// Stops both threads and closes every connection. Idempotent.
  void stop();
  std::size_t clients() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ctxtrack
