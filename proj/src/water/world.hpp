#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "kernel/clock.hpp"
#include "kernel/config.hpp"
#include "kernel/intervention.hpp"
#include "water/tenant.hpp"

namespace hare::water {

struct WaterTank {
    int level = 0;
    int capacity = 0;
    std::vector<int> refill;

    /// End-of-period update: consumption first, then the period's refill, clamped.
    void finish_period(int period, int consumed) {
        level = std::min(capacity, level - consumed + refill.at(period - 1));
    }
};

struct PeriodOutcome {
    int day = 1;
    int period = 1;
    int level_start = 0;
    int consumed = 0;
    int executed = 0;
    ShedLog shed;
    double utility = 0.0;
    double value = 0.0;
};

/// The robotic-building ecology. One tick is one period; periods are 1-based
/// and a day has `refill.size()` of them.
class WaterWorld {
public:
    WaterWorld(const SimConfig& config, std::uint64_t seed, DeviceMode mode);

    /// Applies an already validated price change (target = 1-based period).
    void apply(const Intervention& intervention);
    void step(const SimClock& clock);

    int periods() const { return static_cast<int>(tank_.refill.size()); }
    const WaterTank& tank() const { return tank_; }
    const std::vector<Tenant>& tenants() const { return tenants_; }
    const std::vector<Tenths>& prices() const { return prices_; }
    Tenths price_floor() const { return floor_; }
    Tenths price_ceiling() const { return ceiling_; }
    const std::vector<std::vector<int>>& level_history() const { return level_history_; }
    const std::vector<std::vector<Tenths>>& price_history() const { return price_history_; }
    const std::vector<double>& utility_by_day() const { return utility_by_day_; }
    const std::vector<double>& value_by_day() const { return value_by_day_; }
    const std::vector<std::vector<int>>& consumption_by_day() const { return consumption_by_day_; }
    const PeriodOutcome& last_period() const { return last_; }
    double aggregate_utility() const;
    std::int64_t shed_count() const;
    double shed_value() const;

    nlohmann::json sample(std::int64_t tick) const;
    nlohmann::json view() const;

private:
    void start_day(int day);

    WaterParams params_;
    DeviceMode mode_;
    WaterTank tank_;
    std::vector<Tenant> tenants_;
    std::vector<Tenths> prices_;
    Tenths floor_{};
    Tenths ceiling_{};
    SeededRng contention_;
    std::vector<SeededRng> device_rngs_;
    std::vector<std::vector<int>> level_history_;
    std::vector<std::vector<Tenths>> price_history_;
    std::vector<double> utility_by_day_;
    std::vector<double> value_by_day_;
    std::vector<std::vector<int>> consumption_by_day_;
    PeriodOutcome last_;
};

}  // namespace hare::water
