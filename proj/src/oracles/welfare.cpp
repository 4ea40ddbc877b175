#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

#include "kernel/rng.hpp"
#include "oracles/oracles.hpp"

namespace hare::oracles {

namespace {

constexpr double kUnreachable = -std::numeric_limits<double>::infinity();

// Best value for each exact amount of water used by one period's activities.
struct PeriodKnapsack {
    std::vector<double> best;              // index = units used
    std::vector<std::uint64_t> chosen;     // tenant bitmask achieving best
};

PeriodKnapsack knapsack(const std::vector<std::vector<water::Activity>>& acts, int period, int max_units) {
    PeriodKnapsack k;
    k.best.assign(max_units + 1, kUnreachable);
    k.chosen.assign(max_units + 1, 0);
    k.best[0] = 0.0;
    for (std::size_t t = 0; t < acts.size(); ++t) {
        const auto& a = acts[t][period - 1];
        for (int used = max_units; used >= a.size; --used) {
            if (k.best[used - a.size] == kUnreachable) continue;
            const double cand = k.best[used - a.size] + a.value;
            if (cand > k.best[used]) {
                k.best[used] = cand;
                k.chosen[used] = k.chosen[used - a.size] | (std::uint64_t{1} << t);
            }
        }
    }
    return k;
}

}  // namespace

OracleResult optimal_welfare(const WelfareInstance& in) {
    const auto started = std::chrono::steady_clock::now();
    if (in.activities.size() > 64) throw std::invalid_argument("welfare oracle supports at most 64 tenants");
    const int periods = static_cast<int>(in.refill.size());
    const int cap = in.capacity;
    if (cap < 0 || in.initial_level < 0 || in.initial_level > cap) throw std::invalid_argument("bad tank");
    for (const auto& row : in.activities)
        if (static_cast<int>(row.size()) != periods) throw std::invalid_argument("activity table shape mismatch");

    std::vector<PeriodKnapsack> per_period;
    for (int h = 1; h <= periods; ++h) per_period.push_back(knapsack(in.activities, h, cap));

    const int steps = in.days * periods;
    std::vector<double> value(cap + 1, kUnreachable);
    value[in.initial_level] = 0.0;
    // parent[s][level'] = (level, used) that produced level' after step s.
    std::vector<std::vector<std::pair<int, int>>> parent(steps, std::vector<std::pair<int, int>>(cap + 1, {-1, -1}));
    for (int s = 0; s < steps; ++s) {
        const int h = s % periods + 1;
        const auto& ks = per_period[h - 1];
        std::vector<double> next(cap + 1, kUnreachable);
        for (int level = 0; level <= cap; ++level) {
            if (value[level] == kUnreachable) continue;
            for (int used = 0; used <= level; ++used) {
                if (ks.best[used] == kUnreachable) continue;
                const int after = std::min(cap, level - used + in.refill[h - 1]);
                const double cand = value[level] + ks.best[used];
                if (cand > next[after]) {
                    next[after] = cand;
                    parent[s][after] = {level, used};
                }
            }
        }
        value = std::move(next);
    }

    int end_level = 0;
    for (int level = 0; level <= cap; ++level)
        if (value[level] > value[end_level]) end_level = level;

    // Walk parents back into a per-day, per-period schedule of executed tenants.
    nlohmann::json schedule = nlohmann::json::array();
    for (int d = 0; d < in.days; ++d) schedule.push_back(nlohmann::json::array());
    std::vector<std::vector<int>> executed(steps);
    int level = end_level;
    for (int s = steps - 1; s >= 0; --s) {
        const auto [prev, used] = parent[s][level];
        const auto mask = per_period[s % periods].chosen[used];
        for (std::size_t t = 0; t < in.activities.size(); ++t)
            if (mask & (std::uint64_t{1} << t)) executed[s].push_back(static_cast<int>(t));
        level = prev;
    }
    for (int s = 0; s < steps; ++s) schedule[s / periods].push_back(executed[s]);

    OracleResult result;
    result.objective = value[end_level];
    result.method = "exact DP over (period, integer level); value-only objective";
    result.certificate = {{"executed", schedule}};
    result.compute_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return result;
}

double evaluate_welfare_certificate(const WelfareInstance& in, const nlohmann::json& certificate) {
    const int periods = static_cast<int>(in.refill.size());
    int level = in.initial_level;
    double total = 0.0;
    const auto& days = certificate.at("executed");
    for (int d = 0; d < in.days; ++d) {
        for (int h = 1; h <= periods; ++h) {
            int used = 0;
            for (const auto& t : days.at(d).at(h - 1)) {
                const auto& a = in.activities.at(t.get<int>()).at(h - 1);
                used += a.size;
                total += a.value;
            }
            if (used > level) throw std::invalid_argument("certificate overdraws the tank");
            level = std::min(in.capacity, level - used + in.refill[h - 1]);
        }
    }
    return total;
}

WelfareInstance welfare_instance_from_json(const nlohmann::json& doc) {
    WelfareInstance in;
    in.refill = doc.at("refill").get<std::vector<int>>();
    in.capacity = doc.at("capacity").get<int>();
    in.initial_level = doc.value("initial_level", 0);
    in.days = doc.value("days", 1);
    const int periods = static_cast<int>(in.refill.size());
    for (const auto& row : doc.at("activities")) {
        std::vector<water::Activity> acts;
        for (const auto& a : row) {
            const double size = a.at("size").get<double>();
            if (size != std::floor(size) || size < 1)
                throw std::invalid_argument("welfare oracle requires positive integer sizes");
            water::Activity act;
            act.home = static_cast<int>(acts.size()) + 1;
            act.size = static_cast<int>(size);
            act.value = a.at("value").get<double>();
            acts.push_back(act);
        }
        if (static_cast<int>(acts.size()) != periods) throw std::invalid_argument("one activity per period required");
        in.activities.push_back(std::move(acts));
    }
    return in;
}

std::vector<std::vector<water::Activity>> activity_table_for(const SimConfig& config, std::uint64_t seed) {
    if (config.water.table) return water::table_activities(config.water);
    // Same stream and draw order the world uses at setup.
    SeededRng setup(seed, streams::kSetup);
    return water::generate_activities(config.water, setup);
}

double optimal_welfare_for(const SimConfig& config, std::uint64_t seed, int days) {
    static std::mutex mutex;
    static std::map<std::string, double> cache;
    const auto key = oracle_key_hash(config) + "/" + std::to_string(config.water.table ? 0 : seed) + "/" +
                     std::to_string(days);
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    WelfareInstance in;
    in.activities = activity_table_for(config, seed);
    in.refill = config.water.refill;
    in.capacity = config.water.tank_capacity;
    in.initial_level = config.water.tank_capacity;
    in.days = days;
    const double value = optimal_welfare(in).objective;
    std::lock_guard lock(mutex);
    cache[key] = value;
    return value;
}

nlohmann::json oracle_key(const SimConfig& config) {
    const auto full = to_json(config);
    if (config.scenario == Scenario::Traffic)
        return {{"scenario", "traffic"},
                {"network", full["traffic"]["network"]},
                {"car_count", config.traffic.car_count}};
    auto water = full["water"];
    water.erase("prices");
    water.erase("max_daily_changes");
    water.erase("seconds_per_period");
    return {{"scenario", "water"}, {"water", water}};
}

std::string oracle_key_hash(const SimConfig& config) {
    const auto text = oracle_key(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace hare::oracles
