#include "traffic/world.hpp"

#include <algorithm>
#include <numeric>

#include "kernel/errors.hpp"
#include "traffic/physics.hpp"

namespace hare::traffic {

TrafficWorld::TrafficWorld(const SimConfig& config, std::uint64_t seed, DriveMode mode)
    : params_(config.traffic),
      net_(RoadNetwork::from_spec(config.traffic.network)),
      mode_(mode),
      dt_(config.dt) {
    sink_ = *net_.find_node(params_.network.sink);
    bias_ = destination_bias(net_, params_);
    free_flow_ = free_flow_times(net_);

    SeededRng setup(seed, streams::kSetup);
    cars_.resize(params_.car_count);
    needs_plan_.assign(cars_.size(), 1);
    for (int i = 0; i < params_.car_count; ++i) {
        Car& car = cars_[i];
        car.id = i;
        car.mode = mode;
        car.rng = SeededRng(seed, streams::kAgentBase + static_cast<std::uint64_t>(i));
        car.node = static_cast<int>(setup.below(static_cast<std::uint64_t>(net_.node_count())));
        car.alpha = car.rng.uniform01();
        car.values = sample_destination_values(car.rng, bias_, params_.value_spread);
        car.link_time = free_flow_;
    }
}

void TrafficWorld::apply(const Intervention& intervention) {
    if (intervention.kind != InterventionKind::TollChange)
        throw ProtocolError("traffic scenario only accepts toll changes");
    if (intervention.target < 0 || intervention.target >= net_.road_count())
        throw ProtocolError("unknown road " + std::to_string(intervention.target));
    auto& road = net_.road(intervention.target);
    road.toll += Cents{intervention.delta};
}

void TrafficWorld::step(const SimClock& clock) {
    const std::int64_t k = clock.tick_index;
    departures_.clear();
    charges_.clear();

    std::vector<double> speed(net_.road_count());
    for (const auto& r : net_.roads()) speed[r.id] = road_speed(r.occupancy, r.capacity, r.max_speed);

    for (auto& car : cars_) {
        if (!car.on_road()) continue;
        auto& road = net_.road(car.road);
        car.progress += speed[road.id] * dt_ / road.length;
        if (car.progress < 1.0) continue;

        road.occupancy -= 1;
        const double observed = static_cast<double>(k + 1 - car.road_entry_tick) * dt_;
        if (car.mode == DriveMode::Adaptive)
            car.link_time[road.id] = learn_link_cost(car.link_time[road.id], car.alpha, observed);
        car.node = road.to;
        car.road = -1;
        car.progress = 0.0;
        if (!car.path.empty()) car.path.erase(car.path.begin());
        if (car.node == sink_) ++sink_transits_;
        if (car.node == car.destination) {
            const double seconds = static_cast<double>(k + 1 - car.trip_start_tick) * dt_;
            car.cumulative_utility +=
                arrival_credit(car.values[car.destination], car.trip_tolls, seconds, params_.operating_cost);
            car.trip_tolls = 0.0;
            ++car.trips_completed;
            car.values = sample_destination_values(car.rng, bias_, params_.value_spread);
            needs_plan_[car.id] = 1;
        }
    }

    for (auto& car : cars_)
        if (!car.on_road()) decide_and_depart(car, k + 1);
}

void TrafficWorld::decide_and_depart(Car& car, std::int64_t entry_tick) {
    const bool fresh = needs_plan_[car.id] != 0;
    Route route;
    if (car.mode == DriveMode::Random) {
        if (fresh) {
            // Training agents: random destination, route under random link weights.
            std::vector<double> weights(net_.road_count());
            for (auto& w : weights) w = car.rng.uniform(0.1, 10.0);
            int dest = car.node;
            while (dest == car.node) dest = static_cast<int>(car.rng.below(static_cast<std::uint64_t>(net_.node_count())));
            car.destination = dest;
            route = *cheapest_route(net_, car.node, dest, weights, 1.0);
            car.path = route.nodes;
        }
    } else if (fresh) {
        auto p = plan(net_, car.node, car.values, car.link_time, params_.operating_cost);
        car.destination = p.destination;
        car.path = p.route.nodes;
    } else {
        // Mid-trip: destination is committed, route re-evaluated under current tolls/estimates.
        route = *cheapest_route(net_, car.node, car.destination, car.link_time, params_.operating_cost);
        car.path = route.nodes;
    }
    if (fresh) {
        car.trip_start_tick = entry_tick;
        car.trip_tolls = 0.0;
        needs_plan_[car.id] = 0;
    }

    const int next = car.path.at(1);
    const int road_id = *net_.road_between(car.node, next);
    auto& road = net_.road(road_id);
    const double toll = road.toll.as_double();
    car.trip_tolls += toll;
    car.tolls_paid_total += toll;
    charges_.push_back({car.id, road_id, road.toll});
    departures_.push_back({car.id, car.node, road_id});
    road.occupancy += 1;
    car.road = road_id;
    car.node = -1;
    car.progress = 0.0;
    car.road_entry_tick = entry_tick;
}

int TrafficWorld::cars_on_roads() const {
    return static_cast<int>(std::count_if(cars_.begin(), cars_.end(), [](const Car& c) { return c.on_road(); }));
}

int TrafficWorld::cars_at_nodes() const {
    return static_cast<int>(std::count_if(cars_.begin(), cars_.end(), [](const Car& c) { return c.node >= 0; }));
}

double TrafficWorld::total_utility() const {
    double total = 0.0;
    for (const auto& c : cars_) total += c.cumulative_utility;
    return total;
}

TrafficSnapshot TrafficWorld::snapshot(std::int64_t tick) const {
    TrafficSnapshot snap;
    snap.tick = tick;
    for (const auto& r : net_.roads()) snap.occupancy.push_back(r.occupancy);
    snap.cars.reserve(cars_.size());
    for (const auto& c : cars_) snap.cars.push_back({c.road, c.progress, c.node});
    return snap;
}

nlohmann::json TrafficWorld::sample(std::int64_t tick) const {
    nlohmann::json occ = nlohmann::json::array();
    nlohmann::json tolls = nlohmann::json::array();
    for (const auto& r : net_.roads()) {
        occ.push_back(r.occupancy);
        tolls.push_back(r.toll.units);
    }
    return {{"type", "sample"},      {"tick", tick},          {"occupancy", occ},
            {"tolls_cents", tolls},  {"transits", sink_transits_}, {"utility", total_utility()}};
}

nlohmann::json TrafficWorld::view(bool include_cars) const {
    nlohmann::json roads = nlohmann::json::array();
    for (const auto& r : net_.roads()) {
        roads.push_back({{"id", r.name},
                         {"from", net_.node_name(r.from)},
                         {"to", net_.node_name(r.to)},
                         {"occupancy", r.occupancy},
                         {"capacity", r.capacity},
                         {"toll", r.toll.as_double()}});
    }
    nlohmann::json out{{"roads", roads}, {"transits", sink_transits_}, {"car_count", cars_.size()}};
    if (include_cars) {
        nlohmann::json cars = nlohmann::json::array();
        for (const auto& c : cars_) {
            if (c.on_road()) cars.push_back({{"road", net_.road(c.road).name}, {"pos", c.progress}});
            else cars.push_back({{"node", net_.node_name(c.node)}});
        }
        out["cars"] = cars;
    }
    return out;
}

}  // namespace hare::traffic
