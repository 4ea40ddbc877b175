#include "water/world.hpp"

#include <algorithm>
#include <numeric>

#include "kernel/errors.hpp"

namespace hare::water {

WaterWorld::WaterWorld(const SimConfig& config, std::uint64_t seed, DeviceMode mode)
    : params_(config.water), mode_(mode), contention_(seed, streams::kContention) {
    tank_.level = params_.initial_level;
    tank_.capacity = params_.tank_capacity;
    tank_.refill = params_.refill;
    prices_.assign(params_.refill.size(), Tenths::from_double(params_.initial_price));
    floor_ = Tenths::from_double(params_.price_min);
    ceiling_ = Tenths::from_double(params_.price_max);

    SeededRng setup(seed, streams::kSetup);
    const auto table = params_.table ? table_activities(params_) : generate_activities(params_, setup);
    for (int i = 0; i < params_.tenants; ++i) {
        Tenant t;
        t.id = i;
        t.mode = mode;
        t.activities = table[i];
        tenants_.push_back(std::move(t));
        device_rngs_.emplace_back(seed, streams::kAgentBase + static_cast<std::uint64_t>(i));
    }
}

void WaterWorld::apply(const Intervention& intervention) {
    if (intervention.kind != InterventionKind::PriceChange)
        throw ProtocolError("water scenario only accepts price changes");
    if (intervention.target < 1 || intervention.target > periods())
        throw ProtocolError("unknown period " + std::to_string(intervention.target));
    prices_[intervention.target - 1] += Tenths{intervention.delta};
}

void WaterWorld::start_day(int day) {
    level_history_.emplace_back(periods(), 0);
    price_history_.emplace_back(periods(), Tenths{});
    consumption_by_day_.emplace_back(periods(), 0);
    utility_by_day_.push_back(0.0);
    value_by_day_.push_back(0.0);

    for (auto& t : tenants_) {
        t.shift = 0;
        // Day 1 has no history: adaptive devices behave exactly like simple ones.
        if (t.mode != DeviceMode::Adaptive || day < 2) continue;
        std::vector<double> level_estimate(periods());
        for (int h = 1; h <= periods(); ++h)
            level_estimate[h - 1] = estimate_level(level_history_, day, h);
        const auto price_estimate = estimate_price(price_history_[day - 2]);
        t.shift = choose_shift(t.activities, level_estimate, price_estimate);
    }
}

void WaterWorld::step(const SimClock& clock) {
    const int day = static_cast<int>(clock.tick_index / periods()) + 1;
    const int period = static_cast<int>(clock.tick_index % periods()) + 1;
    if (period == 1) start_day(day);

    PeriodOutcome out;
    out.day = day;
    out.period = period;
    out.level_start = tank_.level;
    level_history_[day - 1][period - 1] = tank_.level;
    const Tenths price = prices_[period - 1];
    price_history_[day - 1][period - 1] = price;

    std::vector<int> order(tenants_.size());
    std::iota(order.begin(), order.end(), 0);
    contention_.shuffle(std::span<int>(order));

    int available = tank_.level;
    for (int idx : order) {
        auto& t = tenants_[idx];
        const int home = period - t.shift;
        if (home < 1) continue;
        const auto& act = t.activities[home - 1];
        Decision d;
        if (t.mode == DeviceMode::Random) {
            const bool coin = device_rngs_[idx].uniform01() < 0.5;
            if (coin && act.size <= available) d = {true, act.value - act.size * price.as_double()};
        } else {
            d = simple_decide(act, price, available);
        }
        if (d.execute) {
            available -= act.size;
            out.consumed += act.size;
            ++out.executed;
            out.utility += d.utility;
            out.value += act.value;
            t.utility += d.utility;
            t.value_realized += act.value;
            t.payments += act.size * price.as_double();
        } else {
            t.shed.add(act.value);
            out.shed.add(act.value);
        }
    }

    // Activities shifted past the end of the day are dropped.
    if (period == periods()) {
        for (auto& t : tenants_) {
            for (int home = periods() - t.shift + 1; home <= periods(); ++home) {
                t.shed.add(t.activities[home - 1].value);
                out.shed.add(t.activities[home - 1].value);
            }
        }
    }

    tank_.finish_period(period, out.consumed);
    consumption_by_day_[day - 1][period - 1] = out.consumed;
    utility_by_day_[day - 1] += out.utility;
    value_by_day_[day - 1] += out.value;
    last_ = out;
}

double WaterWorld::aggregate_utility() const {
    double total = 0.0;
    for (const auto& t : tenants_) total += t.utility;
    return total;
}

std::int64_t WaterWorld::shed_count() const {
    std::int64_t total = 0;
    for (const auto& t : tenants_) total += t.shed.count;
    return total;
}

double WaterWorld::shed_value() const {
    double total = 0.0;
    for (const auto& t : tenants_) total += t.shed.value;
    return total;
}

nlohmann::json WaterWorld::sample(std::int64_t tick) const {
    nlohmann::json prices = nlohmann::json::array();
    for (auto p : prices_) prices.push_back(p.units);
    nlohmann::json utilities = nlohmann::json::array();
    for (const auto& t : tenants_) utilities.push_back(t.utility);
    return {{"type", "sample"},
            {"tick", tick},
            {"day", last_.day},
            {"period", last_.period},
            {"level_start", last_.level_start},
            {"level", tank_.level},
            {"consumed", last_.consumed},
            {"executed", last_.executed},
            {"shed_count", last_.shed.count},
            {"shed_value", last_.shed.value},
            {"period_utility", last_.utility},
            {"period_value", last_.value},
            {"prices_tenths", prices},
            {"tenant_utility", utilities},
            {"aggregate_utility", aggregate_utility()}};
}

nlohmann::json WaterWorld::view() const {
    nlohmann::json prices = nlohmann::json::array();
    for (auto p : prices_) prices.push_back(p.as_double());
    nlohmann::json tenants = nlohmann::json::array();
    for (const auto& t : tenants_)
        tenants.push_back({{"id", t.id},
                           {"happiness", t.utility},
                           {"shift", t.shift},
                           {"shed_count", t.shed.count},
                           {"shed_value", t.shed.value}});
    nlohmann::json consumption = nlohmann::json::array();
    if (!consumption_by_day_.empty()) consumption = consumption_by_day_.back();
    return {{"level", tank_.level},
            {"capacity", tank_.capacity},
            {"prices", prices},
            {"consumption", consumption},
            {"shed_count", shed_count()},
            {"shed_value", shed_value()},
            {"tenants", tenants},
            {"aggregate_happiness", aggregate_utility()}};
}

}  // namespace hare::water
