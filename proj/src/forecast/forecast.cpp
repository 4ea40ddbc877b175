#include "forecast/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "traffic/physics.hpp"

namespace hare::forecast {

std::string_view to_string(Status s) {
    switch (s) {
        case Status::None: return "none";
        case Status::Yellow: return "yellow";
        case Status::Red: return "red";
    }
    return "?";
}

Status parse_status(std::string_view text) {
    if (text == "red") return Status::Red;
    if (text == "yellow") return Status::Yellow;
    if (text == "none") return Status::None;
    throw std::invalid_argument("unknown status");
}

Status classify(double peak, int capacity, double yellow_fraction) {
    if (peak > capacity) return Status::Red;
    if (peak >= yellow_fraction * capacity) return Status::Yellow;
    return Status::None;
}

ChoiceModel::ChoiceModel(const traffic::RoadNetwork& net, double window_seconds)
    : net_(&net), window_(window_seconds), counts_(net.road_count(), 0) {}

void ChoiceModel::observe(int road, double time) {
    events_.emplace_back(time, road);
    ++counts_.at(road);
}

void ChoiceModel::expire(double now) {
    while (!events_.empty() && events_.front().first < now - window_) {
        --counts_[events_.front().second];
        events_.pop_front();
    }
}

std::vector<double> ChoiceModel::fractions(int node) const {
    const auto& out = net_->out_roads(node);
    std::vector<double> f(out.size(), 0.0);
    if (out.empty()) return f;
    int total = 0;
    for (int id : out) total += counts_[id];
    for (std::size_t i = 0; i < out.size(); ++i)
        f[i] = total > 0 ? static_cast<double>(counts_[out[i]]) / total : 1.0 / static_cast<double>(out.size());
    return f;
}

nlohmann::json ForecastReport::to_json(const traffic::RoadNetwork& net) const {
    nlohmann::json roads_json = nlohmann::json::array();
    for (std::size_t i = 0; i < roads.size(); ++i)
        roads_json.push_back(
            {{"road", net.road(static_cast<int>(i)).name}, {"peak", roads[i].peak}, {"status", to_string(roads[i].status)}});
    return {{"issued_tick", issued_tick}, {"horizon", horizon}, {"roads", roads_json}};
}

namespace {

struct Cohort {
    int road;
    double position;
    double mass;
};

struct Lookahead {
    std::vector<double> peak;
    double final_mass = 0.0;
};

Lookahead run_lookahead(const traffic::RoadNetwork& net, const traffic::TrafficSnapshot& snap,
                        const ChoiceModel& choices, const ForecastParams& params) {
    const int roads = net.road_count();
    std::vector<std::vector<double>> split(net.node_count());
    for (int n = 0; n < net.node_count(); ++n) split[n] = choices.fractions(n);

    std::vector<Cohort> cohorts;
    std::vector<double> node_mass(net.node_count(), 0.0);
    // Index cars by road; cars standing at nodes are released immediately.
    for (const auto& car : snap.cars) {
        if (car.road >= 0) cohorts.push_back({car.road, car.progress, 1.0});
        else if (car.node >= 0) node_mass[car.node] += 1.0;
    }
    const auto release = [&](std::vector<double>& pending_by_road) {
        for (int n = 0; n < net.node_count(); ++n) {
            if (node_mass[n] == 0.0) continue;
            const auto& out = net.out_roads(n);
            for (std::size_t i = 0; i < out.size(); ++i) pending_by_road[out[i]] += node_mass[n] * split[n][i];
            if (out.empty()) continue;
            node_mass[n] = 0.0;
        }
    };

    std::vector<double> mass(roads, 0.0);
    for (const auto& c : cohorts) mass[c.road] += c.mass;
    // Occupancy without positions (count-only snapshots) enters at the road head.
    for (int r = 0; r < roads; ++r) {
        const double missing = static_cast<double>(snap.occupancy[r]) - mass[r];
        if (missing > 0.0) {
            cohorts.push_back({r, 0.0, missing});
            mass[r] += missing;
        }
    }
    {
        std::vector<double> departing(roads, 0.0);
        release(departing);
        for (int r = 0; r < roads; ++r) {
            if (departing[r] > 0.0) {
                cohorts.push_back({r, 0.0, departing[r]});
                mass[r] += departing[r];
            }
        }
    }
    std::vector<double> peak = mass;

    const int steps = static_cast<int>(std::ceil(params.horizon / params.step - 1e-9));
    std::vector<double> incoming(roads, 0.0);
    for (int s = 0; s < steps; ++s) {
        std::vector<double> speed(roads);
        for (int r = 0; r < roads; ++r) {
            const auto& road = net.road(r);
            speed[r] = traffic::road_speed(mass[r], road.capacity, road.max_speed);
        }
        std::fill(incoming.begin(), incoming.end(), 0.0);
        std::vector<Cohort> next;
        next.reserve(cohorts.size() + roads);
        for (auto& c : cohorts) {
            const auto& road = net.road(c.road);
            c.position += speed[c.road] * params.step / road.length;
            if (c.position >= 1.0) node_mass[road.to] += c.mass;
            else next.push_back(c);
        }
        release(incoming);
        for (int r = 0; r < roads; ++r)
            if (incoming[r] > 0.0) next.push_back({r, 0.0, incoming[r]});
        cohorts = std::move(next);

        std::fill(mass.begin(), mass.end(), 0.0);
        for (const auto& c : cohorts) mass[c.road] += c.mass;
        for (int r = 0; r < roads; ++r) peak[r] = std::max(peak[r], mass[r]);
    }

    Lookahead out;
    out.peak = std::move(peak);
    for (const auto& c : cohorts) out.final_mass += c.mass;
    for (double m : node_mass) out.final_mass += m;
    return out;
}

}  // namespace

ForecastReport forecast(const traffic::RoadNetwork& net, const traffic::TrafficSnapshot& snapshot,
                        const ChoiceModel& choices, const ForecastParams& params) {
    const auto look = run_lookahead(net, snapshot, choices, params);
    ForecastReport report;
    report.issued_tick = snapshot.tick;
    report.horizon = params.horizon;
    for (int r = 0; r < net.road_count(); ++r)
        report.roads.push_back({look.peak[r], classify(look.peak[r], net.road(r).capacity, params.yellow_fraction)});
    return report;
}

double forecast_final_mass(const traffic::RoadNetwork& net, const traffic::TrafficSnapshot& snapshot,
                           const ChoiceModel& choices, const ForecastParams& params) {
    return run_lookahead(net, snapshot, choices, params).final_mass;
}

AccuracyResult accuracy(std::span<const ForecastReport> reports, const RealizedSeries& realized,
                        std::span<const int> capacities, double dt, double yellow_fraction) {
    std::map<std::int64_t, std::size_t> by_tick;
    for (std::size_t i = 0; i < realized.ticks.size(); ++i) by_tick[realized.ticks[i]] = i;

    AccuracyResult result;
    for (const auto& report : reports) {
        const auto target = report.issued_tick + std::llround(report.horizon / dt);
        const auto it = by_tick.find(target);
        if (it == by_tick.end()) continue;
        const auto& occ = realized.occupancy[it->second];
        const auto now = by_tick.find(report.issued_tick);
        for (std::size_t r = 0; r < report.roads.size(); ++r) {
            const auto actual = classify(occ.at(r), capacities[r], yellow_fraction);
            const bool hit = actual == report.roads[r].status;
            ++result.comparisons;
            if (hit) ++result.matches;
            if (now == by_tick.end()) continue;
            if (classify(realized.occupancy[now->second].at(r), capacities[r], yellow_fraction) == actual) continue;
            ++result.change_comparisons;
            if (hit) ++result.change_matches;
        }
    }
    if (result.comparisons == 0) throw std::invalid_argument("run shorter than the forecast horizon");
    result.accuracy = static_cast<double>(result.matches) / static_cast<double>(result.comparisons);
    result.change_accuracy = result.change_comparisons > 0 ? static_cast<double>(result.change_matches) /
                                                                 static_cast<double>(result.change_comparisons)
                                                           : std::numeric_limits<double>::quiet_NaN();
    return result;
}

}  // namespace hare::forecast
