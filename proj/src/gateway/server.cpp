#include "gateway/server.hpp"

#include <cstdlib>
#include <deque>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "kernel/errors.hpp"

namespace hare::gateway {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

ServerOptions apply_env(ServerOptions options) {
    if (const char* port = std::getenv("HARE_PORT")) {
        char* end = nullptr;
        const long value = std::strtol(port, &end, 10);
        if (!*port || *end || value < 0 || value > 65535) throw ConfigError("HARE_PORT", "expected a port number");
        options.port = static_cast<unsigned short>(value);
    }
    if (const char* rate = std::getenv("HARE_FRAME_RATE")) {
        char* end = nullptr;
        const double value = std::strtod(rate, &end);
        if (!*rate || *end || !(value > 0)) throw ConfigError("HARE_FRAME_RATE", "expected a positive number");
        options.frame_rate = value;
    }
    return options;
}

namespace {

struct Outgoing {
    std::string type;
    std::string session;
    json payload;
};

/// Per-connection outbox: ordered control messages plus at most one pending
/// frame, which newer frames replace.
class Connection : public Subscriber, public std::enable_shared_from_this<Connection> {
public:
    Connection(Server::Impl& server, net::io_context& io) : server_(server), strand_(net::make_strand(io)) {}

    void deliver(const std::string& type, const std::string& session, json payload) override {
        std::lock_guard lock(mutex_);
        if (closed_) return;
        if (type == "frame") {
            std::erase_if(queue_, [](const Outgoing& o) { return o.type == "frame"; });
        }
        queue_.push_back({type, session, std::move(payload)});
        if (!writing_) {
            writing_ = true;
            net::post(strand_, [self = shared_from_this()] { self->write_next(); });
        }
    }

    void handle(const std::string& text);
    virtual void close() = 0;

protected:
    void write_next() {
        std::string text;
        {
            std::lock_guard lock(mutex_);
            if (queue_.empty() || closed_) {
                writing_ = false;
                return;
            }
            auto msg = std::move(queue_.front());
            queue_.pop_front();
            text = envelope(msg.type, msg.session, std::move(msg.payload), ++seq_).dump();
        }
        write(std::move(text));
    }

    /// Writes one message; must call write_next() on success from the strand.
    virtual void write(std::string text) = 0;

    void mark_closed();

    Server::Impl& server_;
    net::strand<net::io_context::executor_type> strand_;
    std::mutex mutex_;
    std::deque<Outgoing> queue_;
    bool writing_ = false;
    bool closed_ = false;
    std::uint64_t seq_ = 0;
    std::weak_ptr<Session> session_;
};

}  // namespace

struct Server::Impl : std::enable_shared_from_this<Server::Impl> {
    ServerOptions options;
    net::io_context io;
    tcp::acceptor acceptor{io};
    std::vector<std::thread> threads;
    mutable std::mutex mutex;
    std::map<std::string, std::shared_ptr<Session>> sessions;
    std::vector<std::weak_ptr<Connection>> connections;
    std::uint64_t next_session = 1;
    bool running = false;

    void accept();
    void dispatch(const std::shared_ptr<Connection>& conn, std::weak_ptr<Session>& current, const std::string& text);
};

namespace {

void send_error(const std::shared_ptr<Connection>& conn, const std::string& session, const std::string& message,
                const std::string& path = {}) {
    json payload{{"message", message}};
    if (!path.empty()) payload["path"] = path;
    conn->deliver("error", session, payload);
}

void Connection::handle(const std::string& text) { server_.dispatch(shared_from_this(), session_, text); }

void Connection::mark_closed() {
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
        queue_.clear();
    }
    if (auto s = session_.lock()) s->detach(this);
}

class TcpConnection final : public Connection {
public:
    TcpConnection(Server::Impl& server, net::io_context& io, tcp::socket socket)
        : Connection(server, io), socket_(std::move(socket)) {}

    void start() { read(); }

    void close() override {
        net::post(strand_, [self = std::static_pointer_cast<TcpConnection>(shared_from_this())] {
            beast::error_code ec;
            self->socket_.shutdown(tcp::socket::shutdown_both, ec);
            self->socket_.close(ec);
        });
    }

private:
    void read() {
        net::async_read_until(
            socket_, net::dynamic_buffer(in_), '\n',
            net::bind_executor(strand_, [self = std::static_pointer_cast<TcpConnection>(shared_from_this())](
                                            beast::error_code ec, std::size_t n) {
                if (ec) return self->mark_closed();
                std::string line = self->in_.substr(0, n - 1);
                self->in_.erase(0, n);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                if (!line.empty()) self->handle(line);
                self->read();
            }));
    }

    void write(std::string text) override {
        out_ = std::move(text) + "\n";
        net::async_write(socket_, net::buffer(out_),
                         net::bind_executor(strand_, [self = std::static_pointer_cast<TcpConnection>(shared_from_this())](
                                                         beast::error_code ec, std::size_t) {
                             if (ec) return self->mark_closed();
                             self->write_next();
                         }));
    }

    tcp::socket socket_;
    std::string in_;
    std::string out_;
};

class WsConnection final : public Connection {
public:
    WsConnection(Server::Impl& server, net::io_context& io, tcp::socket socket)
        : Connection(server, io), ws_(std::move(socket)) {}

    void start() {
        ws_.text(true);
        ws_.async_accept(net::bind_executor(
            strand_, [self = std::static_pointer_cast<WsConnection>(shared_from_this())](beast::error_code ec) {
                if (ec) return self->mark_closed();
                self->read();
            }));
    }

    void close() override {
        net::post(strand_, [self = std::static_pointer_cast<WsConnection>(shared_from_this())] {
            beast::error_code ec;
            beast::get_lowest_layer(self->ws_).shutdown(tcp::socket::shutdown_both, ec);
            beast::get_lowest_layer(self->ws_).close(ec);
        });
    }

private:
    void read() {
        ws_.async_read(buffer_, net::bind_executor(strand_, [self = std::static_pointer_cast<WsConnection>(
                                                                 shared_from_this())](beast::error_code ec, std::size_t) {
                           if (ec) return self->mark_closed();
                           const auto text = beast::buffers_to_string(self->buffer_.data());
                           self->buffer_.consume(self->buffer_.size());
                           self->handle(text);
                           self->read();
                       }));
    }

    void write(std::string text) override {
        out_ = std::move(text);
        ws_.async_write(net::buffer(out_),
                        net::bind_executor(strand_, [self = std::static_pointer_cast<WsConnection>(shared_from_this())](
                                                        beast::error_code ec, std::size_t) {
                            if (ec) return self->mark_closed();
                            self->write_next();
                        }));
    }

    websocket::stream<tcp::socket> ws_;
    beast::flat_buffer buffer_;
    std::string out_;
};

/// Waits until the first bytes arrive, then hands the socket to the matching protocol.
void sniff(Server::Impl& server, std::shared_ptr<tcp::socket> socket) {
    socket->async_wait(tcp::socket::wait_read, [&server, socket](beast::error_code ec) {
        if (ec) return;
        char head[4];
        const auto n = socket->receive(net::buffer(head), tcp::socket::message_peek, ec);
        if (ec || n == 0) return;
        const bool http = std::string_view(head, n) == std::string_view("GET ", n);
        if (http && n < 4) return sniff(server, socket);
        std::shared_ptr<Connection> conn;
        if (http) {
            auto c = std::make_shared<WsConnection>(server, server.io, std::move(*socket));
            conn = c;
            c->start();
        } else {
            auto c = std::make_shared<TcpConnection>(server, server.io, std::move(*socket));
            conn = c;
            c->start();
        }
        std::lock_guard lock(server.mutex);
        std::erase_if(server.connections, [](const auto& w) { return w.expired(); });
        server.connections.push_back(conn);
    });
}

}  // namespace

void Server::Impl::accept() {
    acceptor.async_accept([self = shared_from_this()](beast::error_code ec, tcp::socket socket) {
        if (ec) return;
        socket.set_option(tcp::no_delay(true), ec);
        sniff(*self, std::make_shared<tcp::socket>(std::move(socket)));
        self->accept();
    });
}

void Server::Impl::dispatch(const std::shared_ptr<Connection>& conn, std::weak_ptr<Session>& current,
                            const std::string& text) {
    json msg;
    try {
        msg = json::parse(text);
    } catch (const json::parse_error& e) {
        return send_error(conn, "", std::string("malformed JSON: ") + e.what());
    }
    if (!msg.is_object() || !msg.contains("type") || !msg.at("type").is_string())
        return send_error(conn, "", "message needs a string \"type\"");
    const auto type = msg.at("type").get<std::string>();
    const json payload = msg.contains("payload") && msg.at("payload").is_object() ? msg.at("payload") : json::object();
    std::string sid = msg.contains("session") && msg.at("session").is_string() ? msg.at("session").get<std::string>() : "";
    if (sid.empty() && payload.contains("session") && payload.at("session").is_string())
        sid = payload.at("session").get<std::string>();

    const auto find = [&](const std::string& id) -> std::shared_ptr<Session> {
        if (id.empty()) return current.lock();
        std::lock_guard lock(mutex);
        const auto it = sessions.find(id);
        return it == sessions.end() ? nullptr : it->second;
    };

    if (type == "hello") {
        json reply{{"server", "hare"}, {"protocol", 1}};
        {
            std::lock_guard lock(mutex);
            json ids = json::array();
            for (const auto& [id, s] : sessions) ids.push_back(id);
            reply["sessions"] = ids;
        }
        std::shared_ptr<Session> join;
        if (!sid.empty()) {
            join = find(sid);
            if (!join) return send_error(conn, sid, "unknown session");
            reply["phase"] = to_string(join->phase());
            reply["scenario"] = to_string(join->config().scenario);
        }
        conn->deliver("hello", sid, reply);
        if (join) {
            if (auto old = current.lock(); old && old != join) old->detach(conn.get());
            current = join;
            join->attach(conn);
        }
        return;
    }

    if (type == "open") {
        json doc = payload.contains("config") ? payload.at("config") : options.default_config;
        SimConfig config;
        try {
            if (payload.contains("seed")) doc["seed"] = payload.at("seed");
            config = parse_config(doc);
        } catch (const ConfigError& e) {
            return send_error(conn, sid, e.what(), e.path());
        } catch (const std::exception& e) {
            return send_error(conn, sid, e.what());
        }
        if (options.frame_rate) config.frame_rate = *options.frame_rate;
        std::shared_ptr<Session> session;
        {
            std::lock_guard lock(mutex);
            if (!sid.empty() && sessions.count(sid)) {
                const auto phase = sessions.at(sid)->phase();
                return send_error(conn, sid, "session already open (" + std::string(to_string(phase)) + ")");
            }
            if (sid.empty()) {
                do sid = "s" + std::to_string(next_session++);
                while (sessions.count(sid));
            }
            session = std::make_shared<Session>(sid, config, options.pacing);
            sessions[sid] = session;
        }
        conn->deliver("open", sid,
                      {{"session", sid}, {"phase", "training"}, {"scenario", to_string(config.scenario)},
                       {"config", to_json(config)}, {"frame", session->snapshot_frame()}});
        if (auto old = current.lock()) old->detach(conn.get());
        current = session;
        session->attach(conn);
        session->run();
        return;
    }

    auto session = find(sid);
    if (!session) return send_error(conn, sid, "no session; send open or hello with a session id first");
    sid = session->id();

    if (type == "start_live") {
        try {
            session->start_live();
        } catch (const ProtocolError& e) {
            send_error(conn, sid, e.what());
        }
        return;
    }
    if (type == "command") {
        session->enqueue(payload, conn);
        return;
    }
    send_error(conn, sid, "unknown message type \"" + type + "\"");
}

Server::Server(ServerOptions options) : impl_(std::make_shared<Impl>()) { impl_->options = std::move(options); }

Server::~Server() { stop(); }

void Server::start() {
    auto& im = *impl_;
    if (im.running) return;
    beast::error_code ec;
    const tcp::endpoint endpoint(net::ip::make_address(im.options.host, ec), im.options.port);
    if (ec) throw std::runtime_error("bad host " + im.options.host);
    im.acceptor.open(endpoint.protocol(), ec);
    if (!ec) im.acceptor.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) im.acceptor.bind(endpoint, ec);
    if (!ec) im.acceptor.listen(net::socket_base::max_listen_connections, ec);
    if (ec) throw std::runtime_error("cannot listen on " + im.options.host + ":" + std::to_string(im.options.port) +
                                     ": " + ec.message());
    im.running = true;
    im.accept();
    for (unsigned i = 0; i < std::max(1u, im.options.io_threads); ++i)
        im.threads.emplace_back([impl = impl_] { impl->io.run(); });
}

unsigned short Server::port() const {
    beast::error_code ec;
    const auto ep = impl_->acceptor.local_endpoint(ec);
    return ec ? 0 : ep.port();
}

void Server::stop() {
    auto& im = *impl_;
    if (!im.running) return;
    im.running = false;
    std::map<std::string, std::shared_ptr<Session>> sessions;
    std::vector<std::weak_ptr<Connection>> connections;
    {
        std::lock_guard lock(im.mutex);
        sessions.swap(im.sessions);
        connections.swap(im.connections);
    }
    for (auto& [id, s] : sessions) s->stop();
    net::post(im.io, [&im] {
        beast::error_code ec;
        im.acceptor.close(ec);
    });
    for (auto& w : connections)
        if (auto c = w.lock()) c->close();
    im.io.stop();
    for (auto& t : im.threads) t.join();
    im.threads.clear();
}

std::shared_ptr<Session> Server::session(const std::string& id) const {
    std::lock_guard lock(impl_->mutex);
    const auto it = impl_->sessions.find(id);
    return it == impl_->sessions.end() ? nullptr : it->second;
}

void Server::add_session(const std::shared_ptr<Session>& session) {
    std::lock_guard lock(impl_->mutex);
    if (impl_->sessions.count(session->id())) throw ProtocolError("session id in use: " + session->id());
    impl_->sessions[session->id()] = session;
}

std::vector<std::string> Server::session_ids() const {
    std::lock_guard lock(impl_->mutex);
    std::vector<std::string> ids;
    for (const auto& [id, s] : impl_->sessions) ids.push_back(id);
    return ids;
}

}  // namespace hare::gateway
