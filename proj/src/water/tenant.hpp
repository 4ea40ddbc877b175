#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kernel/config.hpp"
#include "kernel/money.hpp"
#include "kernel/rng.hpp"

namespace hare::water {

using Activity = ActivitySpec;

enum class DeviceMode { Simple, Adaptive, Random };

struct ShedLog {
    std::int64_t count = 0;
    double value = 0.0;

    void add(double v) {
        ++count;
        value += v;
    }
};

struct Tenant {
    int id = 0;
    DeviceMode mode = DeviceMode::Simple;
    std::vector<Activity> activities;  // index = home period - 1
    int shift = 0;                     // t*(d) for the current day
    double utility = 0.0;
    double value_realized = 0.0;
    double payments = 0.0;
    ShedLog shed;
};

/// Outcome of offering one activity to the tank at a given price.
struct Decision {
    bool execute = false;
    double utility = 0.0;  // v - s * p when executed
};

/// Executes iff v - s * p > 0 and s <= available.
Decision simple_decide(const Activity& activity, Tenths price, int available);

/// Mean of start-of-period levels at `period` (1-based) over days 1..day-1.
/// `history[d-1][h-1]` is L(d, h). Requires day >= 2.
double estimate_level(std::span<const std::vector<int>> history, int day, int period);

/// Tomorrow's price estimate is today's realized price for the same period.
inline std::vector<Tenths> estimate_price(std::span<const Tenths> yesterday) {
    return {yesterday.begin(), yesterday.end()};
}

/// Best whole-schedule shift t in [0, periods-1]: the activity whose home is
/// tau - t is credited max(0, v - s * p'(tau)) when L'(tau) > s, zero
/// otherwise; activities pushed beyond the day contribute nothing. Ties go to
/// the smaller shift.
int choose_shift(std::span<const Activity> activities, std::span<const double> level_estimate,
                 std::span<const Tenths> price_estimate);

/// Per-tenant activity tables for one day: `[tenant][home - 1]`. Sizes are
/// uniform integers rescaled so the building total equals `daily_total`;
/// values are `value_means[h] * (1 + U(-noise, noise))`.
std::vector<std::vector<Activity>> generate_activities(const WaterParams& params, SeededRng& rng);

/// Table from an explicit config table (validated upstream).
std::vector<std::vector<Activity>> table_activities(const WaterParams& params);

}  // namespace hare::water
