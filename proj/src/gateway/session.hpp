#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "kernel/config.hpp"
#include "kernel/run_record.hpp"
#include "sim/simulation.hpp"

namespace hare::gateway {

enum class Phase { Training, Live, Finished };
std::string_view to_string(Phase phase);

/// Receives server messages for one client. `frame` messages may be
/// coalesced by the implementation; all others must be delivered in order.
class Subscriber {
public:
    virtual ~Subscriber() = default;
    virtual void deliver(const std::string& type, const std::string& session, json payload) = 0;
};

/// Builds the wire envelope {type, session, payload, seq}.
json envelope(const std::string& type, const std::string& session, json payload, std::uint64_t seq);

/// Parses a command payload {kind?, target, delta, client_tag?} against a
/// simulation. Money deltas are converted to grid units; off-grid deltas
/// yield a zero delta, which the regulator rejects as an increment error.
/// Throws ProtocolError when fields are missing or mistyped.
Intervention parse_command(const json& payload, const Simulation& sim);

enum class Pacing {
    Manual,    // the owner calls advance()
    Realtime,  // wall-clock paced by dt (traffic) or seconds_per_period (water), scaled by pacing_speed
    FreeRun,   // as fast as possible
};

/// One live game. Training runs a randomized-agent world; start_live()
/// resets to the configured world with the session seed. Commands are queued
/// and applied at the next tick boundary, in arrival order.
class Session {
public:
    Session(std::string id, SimConfig config, Pacing pacing);
    ~Session();
    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    const std::string& id() const { return id_; }
    Phase phase() const;
    const SimConfig& config() const { return config_; }
    std::int64_t frame_interval_ticks() const { return frame_every_; }

    /// Sends the subscriber a full snapshot frame, then streams to it.
    void attach(const std::shared_ptr<Subscriber>& subscriber);
    void detach(const Subscriber* subscriber);

    /// Throws ProtocolError unless the session is in training.
    void start_live();

    /// Queues a command; its command_result goes to `reply_to`. Commands on a
    /// finished session are rejected immediately.
    void enqueue(const json& payload, const std::shared_ptr<Subscriber>& reply_to);

    /// Replay mode: the live world runs without its scripted policy and these
    /// interventions are re-submitted at their recorded ticks. Call before start_live().
    void set_script(std::vector<Intervention> script);

    /// Manual pacing: runs `ticks` ticks (stops early when the game ends).
    void advance(std::int64_t ticks);

    json snapshot_frame() const;
    /// Copy of the live game's record (empty before start_live).
    RunRecord live_record() const;

    /// Starts the pacing thread (no-op for manual pacing).
    void run();
    void stop();

private:
    struct Pending {
        json payload;
        std::weak_ptr<Subscriber> reply_to;
    };

    void tick_locked();
    json frame_locked(bool full) const;
    void broadcast_locked(const std::string& type, const json& payload);
    void finish_locked();
    void pace();

    std::string id_;
    SimConfig config_;
    Pacing pacing_;
    std::int64_t frame_every_ = 1;
    mutable std::mutex mutex_;
    std::condition_variable wake_;
    Phase phase_ = Phase::Training;
    std::unique_ptr<Simulation> sim_;
    std::deque<Pending> queue_;
    std::vector<std::weak_ptr<Subscriber>> subscribers_;
    std::optional<std::vector<Intervention>> script_;
    std::size_t script_next_ = 0;
    std::thread thread_;
    bool stopping_ = false;
};

}  // namespace hare::gateway
