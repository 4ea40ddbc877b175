#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include <json.hpp>

#include "kernel/config.hpp"
#include "traffic/network.hpp"
#include "traffic/world.hpp"

namespace hare::forecast {

enum class Status { None, Yellow, Red };

std::string_view to_string(Status s);
Status parse_status(std::string_view text);

/// red iff peak > C; yellow iff 0.75 C <= peak <= C; none otherwise.
Status classify(double peak, int capacity, double yellow_fraction = 0.75);

/// Empirical split of departing cars over each node's outgoing roads within
/// a sliding window of simulated time. Uniform when a node has no recent
/// departures.
class ChoiceModel {
public:
    ChoiceModel(const traffic::RoadNetwork& net, double window_seconds);

    void observe(int road, double time);
    void expire(double now);
    /// Fractions aligned with `net.out_roads(node)`.
    std::vector<double> fractions(int node) const;

private:
    const traffic::RoadNetwork* net_;
    double window_;
    std::deque<std::pair<double, int>> events_;  // (time, road)
    std::vector<int> counts_;                    // per road, inside window
};

struct RoadForecast {
    double peak = 0.0;
    Status status = Status::None;
};

struct ForecastReport {
    std::int64_t issued_tick = 0;
    double horizon = 20.0;
    std::vector<RoadForecast> roads;

    nlohmann::json to_json(const traffic::RoadNetwork& net) const;
};

/// Fluid lookahead over a copy of the snapshot: cohorts of (fractional) cars
/// advance at road_speed of their road's current mass; mass reaching a node is
/// split over outgoing roads by the choice model. Pure: never touches the
/// live world.
ForecastReport forecast(const traffic::RoadNetwork& net, const traffic::TrafficSnapshot& snapshot,
                        const ChoiceModel& choices, const ForecastParams& params);

/// Surrogate mass at the end of the lookahead, exposed for conservation tests.
double forecast_final_mass(const traffic::RoadNetwork& net, const traffic::TrafficSnapshot& snapshot,
                           const ChoiceModel& choices, const ForecastParams& params);

struct AccuracyResult {
    double accuracy = 0.0;
    std::int64_t comparisons = 0;
    std::int64_t matches = 0;
    /// Restricted to (report, road) pairs whose realized status at the horizon
    /// differs from the status at issue time. NaN when there are none.
    double change_accuracy = 0.0;
    std::int64_t change_comparisons = 0;
    std::int64_t change_matches = 0;
};

/// Realized occupancy series: tick -> per-road occupancy.
struct RealizedSeries {
    std::vector<std::int64_t> ticks;
    std::vector<std::vector<int>> occupancy;
};

/// Compares each report's per-road status with the status realized
/// `horizon` later. Throws std::invalid_argument when no report has a
/// realized counterpart (run shorter than the horizon).
AccuracyResult accuracy(std::span<const ForecastReport> reports, const RealizedSeries& realized,
                        std::span<const int> capacities, double dt, double yellow_fraction = 0.75);

}  // namespace hare::forecast
