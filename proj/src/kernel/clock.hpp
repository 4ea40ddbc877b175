#pragma once

#include <cmath>
#include <cstdint>

namespace hare {

struct SimClock {
    std::int64_t tick_index = 0;
    double dt = 0.1;

    double elapsed() const { return static_cast<double>(tick_index) * dt; }
    void advance() { ++tick_index; }

    /// Ticks per whole unit of time (second or period), dt must divide 1.
    std::int64_t ticks_per_unit() const { return std::llround(1.0 / dt); }
    bool at_unit_boundary() const {
        const auto per = ticks_per_unit();
        return per > 0 && tick_index % per == 0;
    }
};

}  // namespace hare
