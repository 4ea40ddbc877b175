#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace hare {

enum class InterventionKind { TollChange, PriceChange };
enum class InterventionSource { Human, ScriptedPolicy };

/// A single regulator action. `delta` is in grid units of the scenario's money
/// grid: cents for tolls, tenths for water prices. `target` is a road index or
/// a 1-based period index.
struct Intervention {
    InterventionKind kind = InterventionKind::TollChange;
    int target = 0;
    std::int64_t delta = 0;
    std::int64_t issued_tick = 0;
    InterventionSource source = InterventionSource::Human;
    std::string client_tag;
};

enum class RejectReason { None, Power, Budget, Quota, Bounds, Increment, Phase, UnknownTarget };

std::string_view to_string(InterventionKind kind);
std::string_view to_string(InterventionSource source);
std::string_view to_string(RejectReason reason);
InterventionKind parse_intervention_kind(std::string_view text);

}  // namespace hare
