#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "kernel/config.hpp"
#include "traffic/network.hpp"
#include "water/tenant.hpp"

namespace hare::oracles {

/// Objective plus a certificate that re-evaluates to it. These are explicit
/// stand-in definitions of "optimal"; `method` says which.
struct OracleResult {
    double objective = 0.0;
    nlohmann::json certificate;
    std::string method;
    double compute_ms = 0.0;
};

/// Simple directed cycles through `node`, each as a list of road ids.
std::vector<std::vector<int>> cycles_through(const traffic::RoadNetwork& net, int node);

/// Steady state of a fixed cycle assignment: per-cycle flow (cars/s) and
/// per-road occupancy, with speeds from road_speed at those occupancies.
struct CycleSteadyState {
    std::vector<double> cycle_flow;
    std::vector<double> road_occupancy;
    double throughput = 0.0;  // sum of cycle flows: each cycle visits the sink once
    bool converged = false;
};

CycleSteadyState cycle_steady_state(const traffic::RoadNetwork& net, const std::vector<std::vector<int>>& cycles,
                                    const std::vector<double>& cars_per_cycle);

/// Maximum steady-state transit rate through `sink` when `car_count` cars
/// circulate on cycles through it. Grid search over assignment fractions,
/// refined by pairwise local search.
OracleResult optimal_throughput(const traffic::RoadNetwork& net, int sink, int car_count);

/// Re-evaluates a throughput certificate (its "cycles" and "cars").
double evaluate_throughput_certificate(const traffic::RoadNetwork& net, const nlohmann::json& certificate);

/// Cached optimal_throughput for a resolved traffic config.
double optimal_throughput_for(const SimConfig& config);

struct WelfareInstance {
    std::vector<std::vector<water::Activity>> activities;  // [tenant][home - 1]
    std::vector<int> refill;
    int capacity = 0;
    int initial_level = 0;
    int days = 1;
};

/// Maximum total value of activities executed in their home periods over
/// `days` identical days, subject to tank dynamics (consume, then refill,
/// clamp). Exact DP over (period, level). Certificate: executed tenants per
/// day and period.
OracleResult optimal_welfare(const WelfareInstance& instance);

/// Builds a WelfareInstance from a JSON activity table; rejects non-integer
/// sizes with std::invalid_argument.
WelfareInstance welfare_instance_from_json(const nlohmann::json& doc);

/// Replays a welfare certificate through the tank; returns its value or
/// throws std::invalid_argument if it is infeasible.
double evaluate_welfare_certificate(const WelfareInstance& instance, const nlohmann::json& certificate);

/// Cached value-only optimum over `days` consecutive days of the activity
/// table a water run with `seed` uses, starting from a full tank.
double optimal_welfare_for(const SimConfig& config, std::uint64_t seed, int days);

/// The activity table a water run with this config and seed uses.
std::vector<std::vector<water::Activity>> activity_table_for(const SimConfig& config, std::uint64_t seed);

/// Golden file support: the oracle-relevant subset of a config and its hash.
nlohmann::json oracle_key(const SimConfig& config);
std::string oracle_key_hash(const SimConfig& config);

}  // namespace hare::oracles
