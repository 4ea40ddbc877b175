#include <doctest.h>

#include <chrono>
#include <mutex>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "gateway/server.hpp"
#include "gateway/session.hpp"
#include "kernel/errors.hpp"

using namespace hare;
using namespace hare::gateway;
namespace net = boost::asio;
namespace beast = boost::beast;
using tcp = net::ip::tcp;

namespace {

struct Captured {
    std::string type;
    json payload;
};

class Capture : public Subscriber {
public:
    void deliver(const std::string& type, const std::string&, json payload) override {
        std::lock_guard lock(mutex);
        messages.push_back({type, std::move(payload)});
    }
    std::vector<Captured> of(const std::string& type) {
        std::lock_guard lock(mutex);
        std::vector<Captured> out;
        for (const auto& m : messages)
            if (m.type == type) out.push_back(m);
        return out;
    }
    std::mutex mutex;
    std::vector<Captured> messages;
};

SimConfig short_traffic(double seconds = 2.0) { return parse_config({{"duration", seconds}, {"power", "limited"}}); }

}  // namespace

TEST_CASE("attach sends a full snapshot") {
    Session s("a", short_traffic(), Pacing::Manual);
    auto cap = std::make_shared<Capture>();
    s.attach(cap);
    REQUIRE(cap->messages.size() == 1);
    CHECK(cap->messages[0].type == "frame");
    CHECK(cap->messages[0].payload["full"] == true);
    CHECK(cap->messages[0].payload["phase"] == "training");
    CHECK(cap->messages[0].payload["view"]["cars"].size() == 300);
}

TEST_CASE("frames follow the configured rate") {
    Session s("a", short_traffic(), Pacing::Manual);
    CHECK(s.frame_interval_ticks() == 2);
    auto cap = std::make_shared<Capture>();
    s.attach(cap);
    s.advance(10);
    const auto frames = cap->of("frame");
    REQUIRE(frames.size() == 6);
    for (std::size_t i = 1; i < frames.size(); ++i) {
        CHECK(frames[i].payload["tick"] == 2 * static_cast<int>(i));
        CHECK(frames[i].payload["full"] == false);
    }
}

TEST_CASE("commands apply at the next tick boundary") {
    Session s("a", short_traffic(), Pacing::Manual);
    auto cap = std::make_shared<Capture>();
    s.attach(cap);
    s.start_live();
    CHECK(s.phase() == Phase::Live);
    CHECK_THROWS_AS(s.start_live(), ProtocolError);
    s.enqueue({{"target", "BC"}, {"delta", 0.05}, {"client_tag", "x1"}}, cap);
    s.enqueue({{"target", "BC"}, {"delta", 0.013}}, cap);
    s.enqueue({{"target", "QQ"}, {"delta", 0.01}}, cap);
    s.enqueue({{"target", "BC"}}, cap);
    CHECK(cap->of("command_result").empty());
    s.advance(1);
    const auto results = cap->of("command_result");
    REQUIRE(results.size() == 4);
    CHECK(results[0].payload["accepted"] == true);
    CHECK(results[0].payload["client_tag"] == "x1");
    CHECK(results[0].payload["balance_mills"] == 250);
    CHECK(results[0].payload["tick"] == 0);
    CHECK(results[1].payload["reason"] == "increment");
    CHECK(results[2].payload["reason"] == "unknown-target");
    CHECK(results[3].payload["accepted"] == false);

    const auto logged = s.live_record().events_of("intervention");
    REQUIRE(logged.size() == 2);
    CHECK(logged[0]["source"] == "human");
}

TEST_CASE("the live game ends with a score and refuses late commands") {
    Session s("a", short_traffic(1.0), Pacing::Manual);
    auto cap = std::make_shared<Capture>();
    s.attach(cap);
    s.advance(3);
    CHECK(s.live_record().events().empty());
    s.start_live();
    s.advance(100);
    CHECK(s.phase() == Phase::Finished);
    const auto over = cap->of("game_over");
    REQUIRE(over.size() == 1);
    CHECK(over[0].payload["score_metric"] == "throughput_pct");
    CHECK(over[0].payload["score"] == over[0].payload["metrics"]["throughput_pct"]);
    CHECK(s.live_record().summary()["ticks"] == 10);
    s.enqueue({{"target", "BC"}, {"delta", 0.01}, {"client_tag", 7}}, cap);
    const auto late = cap->of("command_result");
    REQUIRE(late.size() == 1);
    CHECK(late[0].payload["reason"] == "phase");
    CHECK(late[0].payload["client_tag"] == 7);
}

TEST_CASE("water sessions take price commands by period") {
    Session s("w", parse_config({{"scenario", "water"}, {"power", "limited"}, {"duration", 2}}), Pacing::Manual);
    auto cap = std::make_shared<Capture>();
    s.attach(cap);
    s.start_live();
    for (int i = 0; i < 4; ++i) s.enqueue({{"target", 4}, {"delta", 0.1}}, cap);
    s.advance(1);
    const auto results = cap->of("command_result");
    REQUIRE(results.size() == 4);
    CHECK(results[2].payload["changes_used"] == 3);
    CHECK(results[3].payload["reason"] == "quota");
}

TEST_CASE("command parsing") {
    Simulation sim(short_traffic(), 1);
    const auto iv = parse_command({{"target", "AB"}, {"delta", -0.03}}, sim);
    CHECK(iv.delta == -3);
    CHECK(iv.source == InterventionSource::Human);
    CHECK_THROWS_AS(parse_command(json::array(), sim), ProtocolError);
    CHECK_THROWS_AS(parse_command({{"target", true}, {"delta", 1}}, sim), ProtocolError);
    CHECK_THROWS_AS(parse_command({{"kind", "dance"}, {"target", "AB"}, {"delta", 1}}, sim), ProtocolError);
    CHECK(envelope("frame", "s1", {{"a", 1}}, 4) ==
          json{{"type", "frame"}, {"session", "s1"}, {"payload", {{"a", 1}}}, {"seq", 4}});
}

namespace {

using Clock = std::chrono::steady_clock;

class LineClient {
public:
    explicit LineClient(unsigned short port) : socket_(io_) {
        socket_.connect(tcp::endpoint(net::ip::make_address("127.0.0.1"), port));
    }
    void send(const json& msg) { net::write(socket_, net::buffer(msg.dump() + "\n")); }
    json next() {
        const auto n = net::read_until(socket_, net::dynamic_buffer(buf_), '\n');
        auto msg = json::parse(buf_.substr(0, n - 1));
        buf_.erase(0, n);
        return msg;
    }
    /// Skips messages until one of `type` arrives.
    json until(const std::string& type) {
        const auto deadline = Clock::now() + std::chrono::seconds(20);
        while (Clock::now() < deadline) {
            auto m = next();
            seen.push_back(m);
            if (m["type"] == type) return m;
        }
        throw std::runtime_error("timed out waiting for " + type);
    }
    bool saw(const std::string& type) const {
        for (const auto& m : seen)
            if (m["type"] == type) return true;
        return false;
    }

    std::vector<json> seen;

private:
    net::io_context io_;
    tcp::socket socket_;
    std::string buf_;
};

class WsClient {
public:
    explicit WsClient(unsigned short port) : ws_(io_) {
        ws_.next_layer().connect(tcp::endpoint(net::ip::make_address("127.0.0.1"), port));
        ws_.handshake("127.0.0.1", "/");
        ws_.text(true);
    }
    void send(const json& msg) { ws_.write(net::buffer(msg.dump())); }
    json until(const std::string& type) {
        const auto deadline = Clock::now() + std::chrono::seconds(20);
        while (Clock::now() < deadline) {
            beast::flat_buffer buffer;
            ws_.read(buffer);
            auto m = json::parse(beast::buffers_to_string(buffer.data()));
            if (m["type"] == type) return m;
        }
        throw std::runtime_error("timed out waiting for " + type);
    }

private:
    net::io_context io_;
    beast::websocket::stream<tcp::socket> ws_;
};

ServerOptions test_options() {
    ServerOptions o;
    o.port = 0;
    o.pacing = Pacing::FreeRun;
    o.default_config = {{"power", "limited"}, {"duration", 5}};
    return o;
}

}  // namespace

TEST_CASE("newline JSON over TCP") {
    Server server(test_options());
    server.start();
    REQUIRE(server.port() != 0);
    LineClient c(server.port());

    c.send({{"type", "hello"}});
    const auto hello = c.next();
    CHECK(hello["type"] == "hello");
    CHECK(hello["payload"]["protocol"] == 1);
    CHECK(hello["seq"] == 1);

    c.send({{"type", "open"}, {"session", "game1"}, {"payload", {{"seed", 3}}}});
    const auto opened = c.until("open");
    CHECK(opened["session"] == "game1");
    CHECK(opened["payload"]["phase"] == "training");
    CHECK(opened["payload"]["config"]["seed"] == 3);
    CHECK(server.session_ids() == std::vector<std::string>{"game1"});

    c.send({{"type", "open"}, {"session", "game1"}});
    CHECK(c.until("error")["payload"]["message"].get<std::string>().find("already open") != std::string::npos);

    c.send({{"type", "start_live"}});
    CHECK(c.until("start_live")["payload"]["phase"] == "live");
    c.send({{"type", "command"}, {"payload", {{"target", "BC"}, {"delta", 0.01}, {"client_tag", "t"}}}});
    const auto result = c.until("command_result");
    CHECK(result["payload"]["client_tag"] == "t");
    CHECK(result["payload"].contains("accepted"));
    if (!c.saw("game_over")) c.until("game_over");
    for (const auto& m : c.seen)
        if (m["type"] == "game_over") CHECK(m["payload"]["score_metric"] == "throughput_pct");

    c.send({{"type", "open"}, {"payload", {{"config", {{"duration", -1}}}}}});
    const auto err = c.until("error");
    CHECK(err["payload"]["path"] == "/duration");
    c.send({{"type", "dance"}});
    CHECK(c.until("error")["payload"]["message"].get<std::string>().find("unknown message type") != std::string::npos);
    server.stop();
}

TEST_CASE("malformed input yields an error, not a disconnect") {
    Server server(test_options());
    server.start();
    LineClient c(server.port());
    c.send(json("not an object"));
    CHECK(c.next()["type"] == "error");
    c.send({{"type", "command"}, {"payload", {{"target", "BC"}, {"delta", 0.01}}}});
    CHECK(c.next()["payload"]["message"].get<std::string>().find("no session") != std::string::npos);
    c.send({{"type", "hello"}, {"session", "nope"}});
    CHECK(c.next()["type"] == "error");
    c.send({{"type", "hello"}});
    CHECK(c.next()["type"] == "hello");
    server.stop();
}

TEST_CASE("WebSocket clients share the same protocol") {
    Server server(test_options());
    server.start();
    WsClient a(server.port());
    a.send({{"type", "open"}, {"session", "ws"}});
    CHECK(a.until("open")["payload"]["scenario"] == "traffic");
    const auto frame = a.until("frame");
    CHECK(frame["session"] == "ws");
    CHECK(frame["payload"]["view"]["roads"].size() == 10);

    WsClient b(server.port());
    b.send({{"type", "hello"}, {"session", "ws"}});
    const auto hello = b.until("hello");
    CHECK(hello["payload"]["phase"] == "training");
    CHECK(b.until("frame")["session"] == "ws");
    b.send({{"type", "command"}, {"payload", {{"target", "ZZ"}, {"delta", 0.01}}}});
    CHECK(b.until("command_result")["payload"]["reason"] == "unknown-target");
    server.stop();
}

TEST_CASE("environment overrides") {
    ::setenv("HARE_PORT", "9100", 1);
    ::setenv("HARE_FRAME_RATE", "2.5", 1);
    auto o = apply_env(ServerOptions{});
    CHECK(o.port == 9100);
    CHECK(o.frame_rate == 2.5);
    ::setenv("HARE_PORT", "port", 1);
    CHECK_THROWS_AS(apply_env(ServerOptions{}), ConfigError);
    ::unsetenv("HARE_PORT");
    ::setenv("HARE_FRAME_RATE", "-1", 1);
    CHECK_THROWS_AS(apply_env(ServerOptions{}), ConfigError);
    ::unsetenv("HARE_FRAME_RATE");
}

TEST_CASE("replay sessions cannot take an existing id") {
    Server server(test_options());
    server.start();
    auto s = std::make_shared<Session>("replay", short_traffic(), Pacing::Manual);
    server.add_session(s);
    CHECK(server.session(std::string("replay")) == s);
    CHECK_THROWS_AS(server.add_session(s), ProtocolError);
    server.stop();
}
