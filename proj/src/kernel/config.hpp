#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace hare {

using json = nlohmann::json;

enum class Scenario { Traffic, Water };
enum class Adaptivity { Simple, Adaptive, Random };
enum class PowerLevel { None, Limited, Unlimited };
enum class ValueSpread { StdDev, Variance };

struct RoadSpec {
    std::string from;
    std::string to;
    double length = 5.0;
    int capacity = 60;
    double max_speed = 1.0;
};

struct NetworkSpec {
    std::vector<std::string> nodes;
    std::vector<RoadSpec> roads;
    std::map<std::string, std::pair<double, double>> layout;  // console coordinates
    double initial_toll = 0.50;
    std::string sink = "D";  // throughput is counted at this node
};

struct TrafficParams {
    NetworkSpec network;
    int car_count = 300;
    double operating_cost = 0.079;  // money per second
    double default_bias = 0.6;
    std::map<std::string, double> destination_bias{{"C", 0.8}};
    ValueSpread value_spread = ValueSpread::StdDev;
    double toll_increment = 0.01;
    double budget_initial = 0.30;
    double budget_rate = 0.007;  // money per simulated second
};

struct ForecastParams {
    bool enabled = false;
    double horizon = 20.0;        // seconds of lookahead
    double window = 60.0;         // choice-model sliding window, seconds
    double step = 0.5;            // surrogate integration step, seconds
    double refresh = 1.0;         // seconds between reports
    double yellow_fraction = 0.75;
};

struct ActivitySpec {
    int tenant = 0;
    int home = 1;          // 1-based period
    int window_start = 1;  // [window_start, window_end)
    int window_end = 2;
    int size = 1;
    double value = 0.0;
};

struct WaterParams {
    int tenants = 8;
    std::vector<int> refill{0, 40, 50, 60, 30, 0};
    int tank_capacity = 60;
    int initial_level = 30;
    double initial_price = 0.3;
    double price_increment = 0.1;
    double price_min = 0.0;
    double price_max = 2.0;
    int size_min = 2;
    int size_max = 10;
    int daily_total = 300;
    std::vector<double> value_means{8, 4, 3, 3, 4, 8};
    double value_noise = 0.25;
    std::optional<std::vector<ActivitySpec>> table;  // explicit activity table
    int max_daily_changes = 3;
    double seconds_per_period = 10.0;  // interactive pacing only

    int periods() const { return static_cast<int>(refill.size()); }
};

struct PolicySpec {
    std::string name = "none";
    double cadence = 10.0;  // seconds (traffic) or periods (water)
};

struct SimConfig {
    Scenario scenario = Scenario::Traffic;
    Adaptivity adaptivity = Adaptivity::Simple;
    PowerLevel power = PowerLevel::None;
    std::uint64_t seed = 1;
    double duration = 1500.0;  // seconds (traffic) or days (water)
    double dt = 0.1;           // seconds per tick (traffic); water ticks are periods
    double frame_rate = 5.0;   // frames per simulated second (traffic)
    double pacing_speed = 1.0; // interactive wall-clock multiplier
    TrafficParams traffic;
    WaterParams water;
    ForecastParams forecast;
    PolicySpec policy;

    /// Number of ticks the configured duration spans.
    std::int64_t total_ticks() const;
};

/// Parse and validate. Throws ConfigError naming the offending field path.
SimConfig parse_config(const json& doc);
/// Fully resolved configuration (every default spelled out).
json to_json(const SimConfig& config);
/// FNV-1a over the canonical resolved JSON text.
std::string config_hash(const SimConfig& config);

NetworkSpec default_network();

std::string_view to_string(Scenario s);
std::string_view to_string(Adaptivity a);
std::string_view to_string(PowerLevel p);
Adaptivity parse_adaptivity(std::string_view text, const std::string& path);
PowerLevel parse_power(std::string_view text, const std::string& path);

}  // namespace hare
