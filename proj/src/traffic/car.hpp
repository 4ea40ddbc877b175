#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kernel/config.hpp"
#include "kernel/rng.hpp"
#include "traffic/network.hpp"

namespace hare::traffic {

enum class DriveMode { Simple, Adaptive, Random };

/// Cheapest route between two nodes. `nodes` starts at the origin and ends at
/// the destination; `roads` holds the traversed road ids.
struct Route {
    std::vector<int> nodes;
    std::vector<int> roads;
    double cost = 0.0;        // sum of (y * x + toll) in path order
    double travel_cost = 0.0; // c_t: sum of y * x
    double toll_cost = 0.0;   // c_$: sum of tolls
};

struct Plan {
    int destination = -1;
    Route route;
    double expected_utility = 0.0;
};

/// Destination values for every node in network order. Each node draws
/// m = bias + U[0,1), s = 0.1 + 0.3 U[0,1), then v ~ Normal(m, s) (or with
/// variance s when `spread` is Variance).
std::vector<double> sample_destination_values(SeededRng& rng, std::span<const double> bias, ValueSpread spread);

/// Bias vector in network node order.
std::vector<double> destination_bias(const RoadNetwork& net, const TrafficParams& params);

/// Lowest-cost route with link weight y * x_ij + toll_ij. Ties: fewer hops,
/// then the lexicographically smallest node-index sequence. Returns nullopt
/// when `to` is unreachable.
std::optional<Route> cheapest_route(const RoadNetwork& net, int from, int to, std::span<const double> link_time,
                                    double operating_cost);

/// Picks the destination g != `from` maximising v(g) - c_t - c_$ over the
/// cheapest route to g. Ties go to the lower node index. Throws
/// std::runtime_error when every other node is unreachable.
Plan plan(const RoadNetwork& net, int from, std::span<const double> values, std::span<const double> link_time,
          double operating_cost);

/// Exponential smoothing of a link traversal time estimate.
inline double learn_link_cost(double estimate, double alpha, double observed) {
    return alpha * estimate + (1.0 - alpha) * observed;
}

/// Utility credited on reaching the destination.
inline double arrival_credit(double value, double tolls_paid, double travel_seconds, double operating_cost) {
    return value - tolls_paid - operating_cost * travel_seconds;
}

/// Free-flow traversal time for every road (simple-mode estimates).
std::vector<double> free_flow_times(const RoadNetwork& net);

struct Car {
    int id = 0;
    DriveMode mode = DriveMode::Simple;
    SeededRng rng{0, 0};

    // Location: on `road` (>= 0) with `progress` in [0,1), or at `node`.
    int node = -1;
    int road = -1;
    double progress = 0.0;
    std::int64_t road_entry_tick = 0;

    int destination = -1;
    std::vector<int> path;  // remaining nodes, front is the current/next node
    std::vector<double> values;
    std::vector<double> link_time;  // x_ij per road, seconds
    double alpha = 0.0;

    double cumulative_utility = 0.0;
    std::int64_t trip_start_tick = 0;
    double trip_tolls = 0.0;
    double tolls_paid_total = 0.0;
    std::int64_t trips_completed = 0;

    bool on_road() const { return road >= 0; }
};

}  // namespace hare::traffic
