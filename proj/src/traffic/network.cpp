#include "traffic/network.hpp"

#include <algorithm>
#include <charconv>
#include <functional>

#include "kernel/errors.hpp"

namespace hare::traffic {

RoadNetwork RoadNetwork::from_spec(const NetworkSpec& spec, bool require_strong) {
    RoadNetwork net;
    net.nodes_ = spec.nodes;
    net.out_.resize(net.nodes_.size());
    net.in_.resize(net.nodes_.size());
    const bool short_names = std::all_of(spec.nodes.begin(), spec.nodes.end(),
                                         [](const std::string& n) { return n.size() == 1; });
    const auto toll = Cents::from_double(spec.initial_toll);
    for (const auto& rs : spec.roads) {
        Road road;
        road.id = static_cast<int>(net.roads_.size());
        const auto from = net.find_node(rs.from);
        const auto to = net.find_node(rs.to);
        if (!from || !to) throw ConfigError("/traffic/network/roads", "road references unknown node");
        if (*from == *to) throw ConfigError("/traffic/network/roads", "self-loop " + rs.from);
        if (net.road_between(*from, *to))
            throw ConfigError("/traffic/network/roads", "duplicate road " + rs.from + "->" + rs.to);
        road.from = *from;
        road.to = *to;
        road.length = rs.length;
        road.capacity = rs.capacity;
        road.max_speed = rs.max_speed;
        road.toll = toll;
        road.name = short_names ? rs.from + rs.to : rs.from + "-" + rs.to;
        net.out_[road.from].push_back(road.id);
        net.in_[road.to].push_back(road.id);
        net.roads_.push_back(road);
    }
    if (require_strong && !net.strongly_connected())
        throw ConfigError("/traffic/network", "network must be strongly connected");
    return net;
}

std::optional<int> RoadNetwork::find_node(std::string_view name) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i] == name) return static_cast<int>(i);
    return std::nullopt;
}

std::optional<int> RoadNetwork::find_road(std::string_view name) const {
    for (const auto& r : roads_) {
        if (r.name == name) return r.id;
        const auto& a = nodes_[r.from];
        const auto& b = nodes_[r.to];
        if (name == a + "-" + b || name == a + ">" + b || name == a + b) return r.id;
    }
    int index = -1;
    const auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), index);
    if (ec == std::errc{} && ptr == name.data() + name.size() && index >= 0 && index < road_count()) return index;
    return std::nullopt;
}

std::optional<int> RoadNetwork::road_between(int from, int to) const {
    for (int id : out_.at(from))
        if (roads_[id].to == to) return id;
    return std::nullopt;
}

bool RoadNetwork::strongly_connected() const {
    if (nodes_.empty()) return false;
    const auto reach_all = [&](bool forward) {
        std::vector<char> seen(nodes_.size(), 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const int n = stack.back();
            stack.pop_back();
            for (int id : forward ? out_[n] : in_[n]) {
                const int m = forward ? roads_[id].to : roads_[id].from;
                if (!seen[m]) {
                    seen[m] = 1;
                    stack.push_back(m);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    };
    return reach_all(true) && reach_all(false);
}

int RoadNetwork::total_occupancy() const {
    int total = 0;
    for (const auto& r : roads_) total += r.occupancy;
    return total;
}

}  // namespace hare::traffic
