#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "kernel/clock.hpp"
#include "kernel/config.hpp"
#include "kernel/intervention.hpp"
#include "traffic/car.hpp"
#include "traffic/network.hpp"

namespace hare::traffic {

struct Departure {
    int car = 0;
    int node = 0;
    int road = 0;
};

struct TollCharge {
    int car = 0;
    int road = 0;
    Cents amount{};
};

/// Immutable view used by the forecaster and the frame builder.
struct CarPosition {
    int road = -1;
    double progress = 0.0;
    int node = -1;  // set when the car stands at a node
};

struct TrafficSnapshot {
    std::int64_t tick = 0;
    std::vector<int> occupancy;
    std::vector<CarPosition> cars;
};

/// The driverless-car ecology. One call to step() advances one tick:
/// speeds are taken from the occupancy at tick start, en-route cars move,
/// arrivals learn/credit/resample, then every car standing at a node plans
/// and enters its next road, paying that road's current toll.
class TrafficWorld {
public:
    TrafficWorld(const SimConfig& config, std::uint64_t seed, DriveMode mode);

    /// Applies an already validated toll change. Throws ProtocolError for an
    /// unknown road or a non-toll intervention.
    void apply(const Intervention& intervention);
    void step(const SimClock& clock);

    const RoadNetwork& network() const { return net_; }
    const std::vector<Car>& cars() const { return cars_; }
    DriveMode mode() const { return mode_; }
    int sink() const { return sink_; }
    std::int64_t sink_transits() const { return sink_transits_; }
    std::span<const Departure> last_departures() const { return departures_; }
    std::span<const TollCharge> last_charges() const { return charges_; }
    int cars_on_roads() const;
    int cars_at_nodes() const;
    double total_utility() const;
    const TrafficParams& params() const { return params_; }

    TrafficSnapshot snapshot(std::int64_t tick) const;
    nlohmann::json sample(std::int64_t tick) const;
    nlohmann::json view(bool include_cars) const;

private:
    void decide_and_depart(Car& car, std::int64_t tick);

    TrafficParams params_;
    RoadNetwork net_;
    DriveMode mode_;
    double dt_;
    int sink_ = 0;
    std::vector<double> bias_;
    std::vector<double> free_flow_;
    std::vector<Car> cars_;
    std::int64_t sink_transits_ = 0;
    std::vector<Departure> departures_;
    std::vector<TollCharge> charges_;
    std::vector<char> needs_plan_;
};

}  // namespace hare::traffic
