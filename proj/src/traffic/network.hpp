#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kernel/config.hpp"
#include "kernel/money.hpp"

namespace hare::traffic {

struct Road {
    int id = 0;
    int from = 0;
    int to = 0;
    double length = 1.0;
    int capacity = 1;
    double max_speed = 1.0;
    Cents toll{50};
    int occupancy = 0;
    std::string name;

    double free_flow_time() const { return length / max_speed; }
};

/// Directed road graph. Node and road ids are dense indices.
class RoadNetwork {
public:
    /// Throws ConfigError if the graph is not strongly connected (unless
    /// `require_strong` is false, which unit tests use for partial graphs).
    static RoadNetwork from_spec(const NetworkSpec& spec, bool require_strong = true);

    int node_count() const { return static_cast<int>(nodes_.size()); }
    int road_count() const { return static_cast<int>(roads_.size()); }
    const std::vector<std::string>& node_names() const { return nodes_; }
    const std::string& node_name(int node) const { return nodes_.at(node); }
    const std::vector<Road>& roads() const { return roads_; }
    const Road& road(int id) const { return roads_.at(id); }
    Road& road(int id) { return roads_.at(id); }
    const std::vector<int>& out_roads(int node) const { return out_.at(node); }
    const std::vector<int>& in_roads(int node) const { return in_.at(node); }

    std::optional<int> find_node(std::string_view name) const;
    /// Accepts "BC", "B-C", "B>C" or a decimal road index.
    std::optional<int> find_road(std::string_view name) const;
    std::optional<int> road_between(int from, int to) const;

    bool strongly_connected() const;
    int total_occupancy() const;

private:
    std::vector<std::string> nodes_;
    std::vector<Road> roads_;
    std::vector<std::vector<int>> out_;
    std::vector<std::vector<int>> in_;
};

}  // namespace hare::traffic
