#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gateway/session.hpp"

namespace hare::gateway {

struct ServerOptions {
    std::string host = "127.0.0.1";
    unsigned short port = 8765;  // 0 picks a free port
    json default_config = json::object();
    Pacing pacing = Pacing::Realtime;
    std::optional<double> frame_rate;  // overrides every session config
    unsigned io_threads = 2;
};

/// Overlays HARE_PORT and HARE_FRAME_RATE from the environment.
/// Throws ConfigError on malformed values.
ServerOptions apply_env(ServerOptions options);

/// WebSocket and newline-delimited JSON over TCP on one port. The first bytes
/// of a connection decide: an HTTP upgrade request means WebSocket.
class Server {
public:
    explicit Server(ServerOptions options);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds and starts serving. Throws std::runtime_error if binding fails.
    void start();
    unsigned short port() const;
    void stop();

    std::shared_ptr<Session> session(const std::string& id) const;
    /// Registers a session created outside the protocol (replays). Throws
    /// ProtocolError if the id is taken.
    void add_session(const std::shared_ptr<Session>& session);
    std::vector<std::string> session_ids() const;

    struct Impl;

private:
    std::shared_ptr<Impl> impl_;
};

}  // namespace hare::gateway
