#include "traffic/car.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hare::traffic {

std::vector<double> sample_destination_values(SeededRng& rng, std::span<const double> bias, ValueSpread spread) {
    std::vector<double> values;
    values.reserve(bias.size());
    for (double b : bias) {
        const double mean = b + rng.uniform01();
        const double s = 0.1 + 0.3 * rng.uniform01();
        const double stddev = spread == ValueSpread::StdDev ? s : std::sqrt(s);
        values.push_back(rng.normal(mean, stddev));
    }
    return values;
}

std::vector<double> destination_bias(const RoadNetwork& net, const TrafficParams& params) {
    std::vector<double> bias;
    for (const auto& name : net.node_names()) {
        const auto it = params.destination_bias.find(name);
        bias.push_back(it == params.destination_bias.end() ? params.default_bias : it->second);
    }
    return bias;
}

std::vector<double> free_flow_times(const RoadNetwork& net) {
    std::vector<double> x;
    x.reserve(net.road_count());
    for (const auto& r : net.roads()) x.push_back(r.free_flow_time());
    return x;
}

namespace {

struct Label {
    double cost = std::numeric_limits<double>::infinity();
    std::vector<int> nodes;
    std::vector<int> roads;
    bool settled = false;

    bool reached() const { return !nodes.empty(); }
};

bool better(double cost, const std::vector<int>& nodes, const Label& other) {
    if (!other.reached()) return true;
    if (cost != other.cost) return cost < other.cost;
    if (nodes.size() != other.nodes.size()) return nodes.size() < other.nodes.size();
    return nodes < other.nodes;
}

// Dijkstra from `from` with the documented tie-break; labels carry full paths
// so ties are resolved identically to exhaustive enumeration.
std::vector<Label> shortest_tree(const RoadNetwork& net, int from, std::span<const double> link_time,
                                 double operating_cost) {
    std::vector<Label> labels(net.node_count());
    labels[from].cost = 0.0;
    labels[from].nodes = {from};
    for (;;) {
        int best = -1;
        for (int n = 0; n < net.node_count(); ++n) {
            if (labels[n].settled || !labels[n].reached()) continue;
            if (best < 0 || better(labels[n].cost, labels[n].nodes, labels[best])) best = n;
        }
        if (best < 0) break;
        labels[best].settled = true;
        for (int id : net.out_roads(best)) {
            const auto& road = net.road(id);
            if (labels[road.to].settled) continue;
            const double w = operating_cost * link_time[id] + road.toll.as_double();
            const double cost = labels[best].cost + w;
            std::vector<int> nodes = labels[best].nodes;
            nodes.push_back(road.to);
            if (better(cost, nodes, labels[road.to])) {
                labels[road.to].cost = cost;
                labels[road.to].nodes = std::move(nodes);
                labels[road.to].roads = labels[best].roads;
                labels[road.to].roads.push_back(id);
            }
        }
    }
    return labels;
}

Route to_route(const RoadNetwork& net, const Label& label, std::span<const double> link_time, double operating_cost) {
    Route route;
    route.nodes = label.nodes;
    route.roads = label.roads;
    route.cost = label.cost;
    for (int id : route.roads) {
        route.travel_cost += operating_cost * link_time[id];
        route.toll_cost += net.road(id).toll.as_double();
    }
    return route;
}

}  // namespace

std::optional<Route> cheapest_route(const RoadNetwork& net, int from, int to, std::span<const double> link_time,
                                    double operating_cost) {
    const auto labels = shortest_tree(net, from, link_time, operating_cost);
    if (!labels[to].reached()) return std::nullopt;
    return to_route(net, labels[to], link_time, operating_cost);
}

Plan plan(const RoadNetwork& net, int from, std::span<const double> values, std::span<const double> link_time,
          double operating_cost) {
    const auto labels = shortest_tree(net, from, link_time, operating_cost);
    Plan best;
    for (int g = 0; g < net.node_count(); ++g) {
        if (g == from || !labels[g].reached()) continue;
        auto route = to_route(net, labels[g], link_time, operating_cost);
        const double u = values[g] - route.travel_cost - route.toll_cost;
        if (best.destination < 0 || u > best.expected_utility) {
            best.destination = g;
            best.expected_utility = u;
            best.route = std::move(route);
        }
    }
    if (best.destination < 0) throw std::runtime_error("malformed network: no destination reachable from " +
                                                       net.node_name(from));
    return best;
}

}  // namespace hare::traffic
