#pragma once

#include <cstdint>
#include <functional>

#include "kernel/run_record.hpp"
#include "sim/simulation.hpp"

namespace hare::gateway {

/// Serves a replay of `record` as session "replay" on `port`, paced at
/// `speed` times real time, and compares the re-simulated samples with the
/// record once the game ends.
ReplayReport replay_stream(const RunRecord& record, double speed, unsigned short port,
                           const std::function<void(unsigned short)>& on_listening = {});

}  // namespace hare::gateway
