#include "gateway/replay.hpp"

#include <chrono>
#include <thread>

#include "gateway/server.hpp"

namespace hare::gateway {

ReplayReport replay_stream(const RunRecord& record, double speed, unsigned short port,
                           const std::function<void(unsigned short)>& on_listening) {
    if (!(speed > 0)) throw std::invalid_argument("speed must be positive");
    auto config = parse_config(record.header().at("config"));
    config.seed = record.header().at("seed").get<std::uint64_t>();
    config.pacing_speed = speed;

    ServerOptions options;
    options.port = port;
    options.pacing = Pacing::Realtime;
    Server server(options);
    server.start();
    auto session = std::make_shared<Session>("replay", config, Pacing::Realtime);
    session->set_script(record_interventions(record));
    server.add_session(session);
    if (on_listening) on_listening(server.port());
    session->start_live();
    session->run();
    while (session->phase() != Phase::Finished) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    // Let the final frame and game_over reach connected clients.
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    const auto produced = session->live_record();
    server.stop();
    return compare_samples(record, produced);
}

}  // namespace hare::gateway
