#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>

#include "oracles/oracles.hpp"
#include "traffic/physics.hpp"

namespace hare::oracles {

std::vector<std::vector<int>> cycles_through(const traffic::RoadNetwork& net, int node) {
    std::vector<std::vector<int>> cycles;
    std::vector<char> visited(net.node_count(), 0);
    std::vector<int> roads;
    std::function<void(int)> dfs = [&](int at) {
        for (int id : net.out_roads(at)) {
            const int next = net.road(id).to;
            if (next == node) {
                roads.push_back(id);
                cycles.push_back(roads);
                roads.pop_back();
            } else if (!visited[next]) {
                visited[next] = 1;
                roads.push_back(id);
                dfs(next);
                roads.pop_back();
                visited[next] = 0;
            }
        }
    };
    visited[node] = 1;
    dfs(node);
    return cycles;
}

CycleSteadyState cycle_steady_state(const traffic::RoadNetwork& net, const std::vector<std::vector<int>>& cycles,
                                    const std::vector<double>& cars_per_cycle) {
    const int roads = net.road_count();
    CycleSteadyState st;
    st.cycle_flow.assign(cycles.size(), 0.0);
    st.road_occupancy.assign(roads, 0.0);

    std::vector<double> time(roads);
    const auto traversal_times = [&](const std::vector<double>& occ) {
        for (int r = 0; r < roads; ++r) {
            const auto& road = net.road(r);
            time[r] = road.length / traffic::road_speed(occ[r], road.capacity, road.max_speed);
        }
    };
    const auto propagate = [&](std::vector<double>& flow, std::vector<double>& occ) {
        std::fill(occ.begin(), occ.end(), 0.0);
        for (std::size_t k = 0; k < cycles.size(); ++k) {
            double loop = 0.0;
            for (int r : cycles[k]) loop += time[r];
            flow[k] = cars_per_cycle[k] / loop;
            for (int r : cycles[k]) occ[r] += flow[k] * time[r];
        }
    };

    std::vector<double> occ(roads, 0.0);
    std::vector<double> next(roads, 0.0);
    traversal_times(occ);
    propagate(st.cycle_flow, occ);
    // Damped fixed point on occupancies; cars are conserved at every iterate.
    for (int iter = 0; iter < 1000; ++iter) {
        traversal_times(occ);
        propagate(st.cycle_flow, next);
        double change = 0.0;
        for (int r = 0; r < roads; ++r) {
            change = std::max(change, std::fabs(next[r] - occ[r]));
            occ[r] = 0.5 * occ[r] + 0.5 * next[r];
        }
        if (change < 1e-9) {
            st.converged = true;
            break;
        }
    }
    traversal_times(occ);
    propagate(st.cycle_flow, st.road_occupancy);
    st.throughput = 0.0;
    for (double f : st.cycle_flow) st.throughput += f;
    return st;
}

namespace {

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

void for_each_composition(int parts, int total, const std::function<void(const std::vector<int>&)>& visit) {
    std::vector<int> current(parts, 0);
    std::function<void(int, int)> rec = [&](int index, int left) {
        if (index == parts - 1) {
            current[index] = left;
            visit(current);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            current[index] = v;
            rec(index + 1, left - v);
        }
    };
    rec(0, total);
}

}  // namespace

OracleResult optimal_throughput(const traffic::RoadNetwork& net, int sink, int car_count) {
    const auto started = std::chrono::steady_clock::now();
    OracleResult result;
    result.method = "cycle-assignment grid search + pairwise local search";
    const auto cycles = cycles_through(net, sink);
    const int k = static_cast<int>(cycles.size());
    if (k == 0 || car_count <= 0) {
        result.certificate = {{"cycles", nlohmann::json::array()}, {"cars", nlohmann::json::array()}};
        return result;
    }

    int grid = 1;
    while (grid < 40 && binomial(grid + 1 + k - 1, k - 1) <= 20000.0) ++grid;

    std::vector<double> best_cars(k, 0.0);
    double best = -1.0;
    const auto evaluate = [&](const std::vector<double>& cars) {
        return cycle_steady_state(net, cycles, cars).throughput;
    };
    for_each_composition(k, grid, [&](const std::vector<int>& parts) {
        std::vector<double> cars(k);
        for (int i = 0; i < k; ++i) cars[i] = static_cast<double>(car_count) * parts[i] / grid;
        const double value = evaluate(cars);
        if (value > best) {
            best = value;
            best_cars = cars;
        }
    });

    // Pairwise transfers with a shrinking step.
    for (double step = static_cast<double>(car_count) / grid / 2.0; step > 1e-3; step /= 2.0) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (int from = 0; from < k; ++from) {
                for (int to = 0; to < k; ++to) {
                    if (from == to || best_cars[from] < step) continue;
                    auto cars = best_cars;
                    cars[from] -= step;
                    cars[to] += step;
                    const double value = evaluate(cars);
                    if (value > best + 1e-12) {
                        best = value;
                        best_cars = std::move(cars);
                        improved = true;
                    }
                }
            }
        }
    }

    const auto st = cycle_steady_state(net, cycles, best_cars);
    nlohmann::json cyc = nlohmann::json::array();
    for (const auto& c : cycles) {
        nlohmann::json names = nlohmann::json::array();
        for (int r : c) names.push_back(net.road(r).name);
        cyc.push_back(names);
    }
    nlohmann::json occ = nlohmann::json::object();
    for (int r = 0; r < net.road_count(); ++r) occ[net.road(r).name] = st.road_occupancy[r];
    result.objective = st.throughput;
    result.certificate = {{"cycles", cyc}, {"cars", best_cars}, {"flows", st.cycle_flow}, {"occupancy", occ}};
    result.compute_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return result;
}

double evaluate_throughput_certificate(const traffic::RoadNetwork& net, const nlohmann::json& certificate) {
    std::vector<std::vector<int>> cycles;
    for (const auto& c : certificate.at("cycles")) {
        std::vector<int> ids;
        for (const auto& name : c) ids.push_back(*net.find_road(name.get<std::string>()));
        cycles.push_back(ids);
    }
    const auto cars = certificate.at("cars").get<std::vector<double>>();
    return cycle_steady_state(net, cycles, cars).throughput;
}

double optimal_throughput_for(const SimConfig& config) {
    static std::mutex mutex;
    static std::map<std::string, double> cache;
    const auto key = oracle_key_hash(config);
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    const auto net = traffic::RoadNetwork::from_spec(config.traffic.network);
    const double value = optimal_throughput(net, *net.find_node(config.traffic.network.sink), config.traffic.car_count).objective;
    std::lock_guard lock(mutex);
    cache[key] = value;
    return value;
}

}  // namespace hare::oracles
