// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "harness/harness.hpp"
#include "oracles/oracles.hpp"
#include "reference.hpp"
#include "sim/simulation.hpp"
#include "traffic/car.hpp"
#include "traffic/physics.hpp"
#include "water/tenant.hpp"

using namespace hare;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

json load(const std::string& name) {
    std::ifstream in(std::string(HARE_SOURCE_DIR) + "/configs/" + name);
    if (!in) throw std::runtime_error("missing config " + name);
    return json::parse(in);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Records kept from earlier criteria for the replay check.
std::vector<RunRecord> replay_pool;

Outcome budget_arithmetic() {
    const auto t0 = std::chrono::steady_clock::now();
    auto doc = load("traffic_default.json");
    doc["power"] = "limited";
    Simulation sim(parse_config(doc), 1);
    sim.run_to_end();
    const double elapsed = seconds_since(t0);
    const auto mills = sim.metrics()["budget_mills"].get<std::int64_t>();
    const bool none = sim.record().events_of("intervention").empty();
    return {mills == 10800 && none && elapsed < 5.0,
            "budget " + std::to_string(mills) + " mills (want 10800), " + fmt("%.2f s", elapsed)};
}

Outcome ordering(const std::string& config_name, std::size_t seeds, double limit_seconds) {
    const auto t0 = std::chrono::steady_clock::now();
    auto doc = load(config_name);
    doc["matrix"] = {{"adaptivity", {"simple", "adaptive"}}, {"power", {"none"}}, {"seed_count", seeds}};
    const auto matrix = parse_matrix(doc);
    MatrixOptions options;
    std::vector<RunRecord> kept;
    std::mutex mutex;
    options.runner = [&](const SimConfig& c, std::uint64_t seed) {
        auto record = run_headless(c, seed);
        if (seed <= 2) {
            std::lock_guard lock(mutex);
            kept.push_back(record);
        }
        return record;
    };
    const auto result = run_matrix(matrix, options);
    const double elapsed = seconds_since(t0);
    for (auto& r : kept) replay_pool.push_back(std::move(r));
    const auto metric = primary_metric(matrix.base.scenario);
    const auto simple = result.cells.at(0).values(metric);
    const auto adaptive = result.cells.at(1).values(metric);
    if (simple.size() != seeds || adaptive.size() != seeds) return {false, "some runs failed"};
    const auto w = welch_greater(adaptive, simple);
    const auto ms = describe(simple), ma = describe(adaptive);
    return {ma.mean > ms.mean && w.p < 0.05 && elapsed < limit_seconds,
            metric + fmt(" adaptive %.2f vs simple %.2f, Welch p = %.2g, ", ma.mean, ms.mean, w.p) +
                fmt("%.1f s", elapsed)};
}

Outcome day_one_equivalence() {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto doc = load("water_default.json");
        doc["duration"] = 1;
        doc["adaptivity"] = "simple";
        Simulation simple(parse_config(doc), seed);
        doc["adaptivity"] = "adaptive";
        Simulation adaptive(parse_config(doc), seed);
        simple.run_to_end();
        adaptive.run_to_end();
        if (simple.water()->consumption_by_day() != adaptive.water()->consumption_by_day() ||
            simple.water()->level_history() != adaptive.water()->level_history())
            return {false, "seed " + std::to_string(seed) + " differs on day 1"};
    }
    return {true, "10 seeds, identical day-1 consumption and levels"};
}

Outcome road_physics() {
    using Big = boost::multiprecision::cpp_bin_float_50;
    double worst = 0.0;
    SeededRng rng(501, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const double c = static_cast<double>(rng.between(1, 200));
        const double s = rng.uniform(0.1, 10.0);
        worst = std::max(worst, std::fabs(traffic::road_speed(c, c, s) - 0.6 / 1.1 * s));
        Big prev = traffic::road_speed_as<Big>(Big(0), Big(c), Big(s));
        double prev_d = traffic::road_speed(0, c, s);
        for (int step = 1; step <= 3 * static_cast<int>(c) * 8; ++step) {
            const double n = step * 0.125;
            const Big cur = traffic::road_speed_as<Big>(Big(n), Big(c), Big(s));
            const double cur_d = traffic::road_speed(n, c, s);
            if (!(cur < prev) || cur_d > prev_d)
                return {false, fmt("not decreasing at N = %.3f, C = %.0f", n, c)};
            prev = cur;
            prev_d = cur_d;
        }
    }
    return {worst < 1e-9, fmt("max |v(C) - 0.6S/1.1| = %.2g; strictly decreasing on 100 (C,S) grids", worst)};
}

Outcome rl_update() {
    SeededRng rng(601, 0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.uniform(0.01, 500), a = rng.uniform01(), z = rng.uniform(0.01, 500);
        worst = std::max(worst, std::fabs(traffic::learn_link_cost(x, a, z) - (a * x + (1 - a) * z)));
        if (traffic::learn_link_cost(x, 1.0, z) != x || traffic::learn_link_cost(x, 0.0, z) != z)
            return {false, "degenerate alpha not exact"};
    }
    return {worst < 1e-12, fmt("max error %.2g over 1000 triples; alpha 0 and 1 exact", worst)};
}

Outcome planner_equivalence() {
    SeededRng rng(701, 0);
    int networks = 0, compared = 0;
    while (networks < 200) {
        const bool ties = networks % 2 == 1;
        const int n = static_cast<int>(rng.between(2, 5));
        NetworkSpec spec;
        for (int i = 0; i < n; ++i) spec.nodes.push_back(std::string(1, static_cast<char>('A' + i)));
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (a != b && rng.uniform01() < 0.5) spec.roads.push_back({spec.nodes[a], spec.nodes[b], 1.0, 10, 1.0});
        spec.sink = spec.nodes.back();
        auto net = traffic::RoadNetwork::from_spec(spec, false);
        std::vector<ref::Edge> edges;
        std::vector<double> x;
        for (int id = 0; id < net.road_count(); ++id) {
            auto& road = net.road(id);
            road.toll = ties ? Cents{0} : Cents{static_cast<std::int64_t>(rng.between(0, 99))};
            x.push_back(ties ? static_cast<double>(rng.between(1, 3)) : rng.uniform(0.5, 20.0));
            edges.push_back({road.from, road.to, x.back(), road.toll.as_double()});
        }
        ++networks;
        const double y = ties ? 1.0 : 0.079;
        for (int origin = 0; origin < n; ++origin) {
            std::vector<double> values;
            for (int g = 0; g < n; ++g) values.push_back(ties ? static_cast<double>(rng.between(0, 4)) : rng.normal(1.2, 0.5));
            const auto want = ref::brute_force_plan(n, edges, origin, values, y);
            if (!want) continue;
            const auto got = traffic::plan(net, origin, values, x, y);
            if (got.destination != want->destination || got.route.nodes != want->nodes ||
                got.expected_utility != want->utility)
                return {false, "mismatch on network " + std::to_string(networks)};
            ++compared;
        }
    }
    return {compared > 0, std::to_string(networks) + " networks, " + std::to_string(compared) + " plans, exact match"};
}

Outcome shift_equivalence() {
    SeededRng rng(801, 0);
    for (int trial = 0; trial < 500; ++trial) {
        const bool ties = trial % 2 == 0;
        std::vector<water::Activity> acts;
        std::vector<ref::ShiftActivity> mirror;
        for (int h = 1; h <= 6; ++h) {
            water::Activity a;
            a.home = h;
            a.window_start = h;
            a.window_end = h + 1;
            a.size = static_cast<int>(rng.between(1, 12));
            a.value = ties ? static_cast<double>(rng.between(0, 6)) : rng.uniform(0.0, 12.0);
            acts.push_back(a);
            mirror.push_back({a.size, a.value});
        }
        std::vector<double> level, price_d;
        std::vector<Tenths> price;
        for (int h = 0; h < 6; ++h) {
            level.push_back(ties ? static_cast<double>(rng.between(0, 3) * 4) : rng.uniform(0.0, 20.0));
            price.push_back(Tenths{rng.between(0, 20)});
            price_d.push_back(price.back().as_double());
        }
        if (water::choose_shift(acts, level, price) != ref::reference_shift(mirror, level, price_d))
            return {false, "mismatch on instance " + std::to_string(trial)};
    }
    return {true, "500 instances, exact match"};
}

Outcome welfare_equivalence() {
    SeededRng rng(901, 0);
    for (int trial = 0; trial < 50; ++trial) {
        oracles::WelfareInstance in;
        in.capacity = static_cast<int>(rng.between(5, 40));
        in.initial_level = static_cast<int>(rng.between(0, in.capacity));
        for (int h = 0; h < 3; ++h) in.refill.push_back(static_cast<int>(rng.between(0, 25)));
        std::vector<ref::WelfareItem> items;
        for (int t = 0; t < 4; ++t) {
            std::vector<water::Activity> row;
            for (int h = 0; h < 3; ++h) {
                water::Activity a;
                a.size = static_cast<int>(rng.between(1, 15));
                a.value = static_cast<double>(rng.between(0, 20));
                row.push_back(a);
                items.push_back({0, h, a.size, a.value});
            }
            in.activities.push_back(row);
        }
        const auto got = oracles::optimal_welfare(in).objective;
        const auto want = ref::exhaustive_welfare(items, in.refill, in.capacity, in.initial_level, 1);
        if (got != want) return {false, fmt("instance %.0f: DP %.3f vs enumeration %.3f", trial, got, want)};
    }
    return {true, "50 instances, exact match"};
}

Outcome forecast_accuracy() {
    std::vector<double> acc;
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        auto record = run_headless(parse_config(load("traffic_forecast.json")), seed);
        acc.push_back(record.summary()["forecast_accuracy"].get<double>());
        if (seed == 1) replay_pool.push_back(std::move(record));
    }
    const double mean = describe(acc).mean;

    bool identical = true;
    for (auto mode : {"simple", "adaptive"}) {
        auto doc = load("traffic_default.json");
        doc["adaptivity"] = mode;
        doc["duration"] = 600;
        const auto off = run_headless(parse_config(doc), 4).events_of("sample");
        doc["forecast"] = {{"enabled", true}};
        const auto on = run_headless(parse_config(doc), 4).events_of("sample");
        identical = identical && off.size() == on.size();
        for (std::size_t i = 0; identical && i < off.size(); ++i) identical = off[i].dump() == on[i].dump();
    }
    return {mean >= 0.70 && identical,
            fmt("mean accuracy %.3f over 12 seeds (>= 0.70); ", mean) +
                (identical ? "on/off trajectories bitwise identical" : "on/off trajectories differ")};
}

Outcome replay() {
    auto policy = load("traffic_default.json");
    policy["power"] = "limited";
    policy["duration"] = 600;
    policy["adaptivity"] = "adaptive";
    policy["policy"] = {{"name", "greedy-congestion"}, {"cadence", 2}};
    replay_pool.push_back(run_headless(parse_config(policy), 3));
    auto water = load("water_default.json");
    water["power"] = "unlimited";
    water["policy"] = {{"name", "peak-pricing"}, {"cadence", 1}};
    replay_pool.push_back(run_headless(parse_config(water), 3));

    std::size_t samples = 0;
    for (const auto& record : replay_pool) {
        // Round-trip through the on-disk text form, as a replay from file would.
        const auto report = replay_check(RunRecord::parse(record.to_jsonl()));
        if (!report.ok)
            return {false, "diverged at tick " + std::to_string(report.first_divergent_tick) + ": " + report.detail};
        samples += report.samples_compared;
    }
    return {true, std::to_string(replay_pool.size()) + " records, " + std::to_string(samples) +
                      " samples bitwise identical on this platform (second platform not available here)"};
}

Outcome conservation() {
    auto traffic_doc = load("traffic_default.json");
    traffic_doc["adaptivity"] = "adaptive";
    Simulation sim(parse_config(traffic_doc), 5);
    const int cars = sim.config().traffic.car_count;
    while (!sim.done()) {
        sim.step();
        const auto* w = sim.traffic();
        if (w->cars_on_roads() + w->cars_at_nodes() != cars || w->network().total_occupancy() != w->cars_on_roads())
            return {false, "car count changed at tick " + std::to_string(sim.clock().tick_index)};
    }
    const auto ticks = sim.clock().tick_index;

    for (auto mode : {"simple", "adaptive"}) {
        auto doc = load("water_default.json");
        doc["adaptivity"] = mode;
        Simulation water(parse_config(doc), 5);
        const int capacity = water.config().water.tank_capacity;
        while (!water.done()) {
            water.step();
            const int level = water.water()->tank().level;
            if (level < 0 || level > capacity) return {false, "tank level out of range"};
        }
        for (const auto& day : water.water()->level_history())
            for (int level : day)
                if (level < 0 || level > capacity) return {false, "recorded level out of range"};
    }

    const auto config = parse_config(load("water_default.json"));
    const int supply = std::accumulate(config.water.refill.begin(), config.water.refill.end(), 0);
    SeededRng rng(config.seed, streams::kSetup);
    int demand = 0;
    for (const auto& tenant : water::generate_activities(config.water, rng))
        for (const auto& a : tenant) demand += a.size;
    return {demand == 300 && supply == 180 && demand > supply,
            std::to_string(cars) + " cars held for " + std::to_string(ticks) + " ticks; tank in [0, cap] for 30 days; "
                "demand " + std::to_string(demand) + " > supply " + std::to_string(supply)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> check;
    };
    const std::vector<Criterion> criteria{
        {"budget arithmetic", budget_arithmetic},
        {"traffic ordering, no regulation", [] { return ordering("traffic_default.json", 12, 600.0); }},
        {"water ordering, no regulation", [] { return ordering("water_default.json", 10, 120.0); }},
        {"day-1 water equivalence", day_one_equivalence},
        {"road physics", road_physics},
        {"link cost update", rl_update},
        {"planner vs brute force", planner_equivalence},
        {"shift vs independent evaluator", shift_equivalence},
        {"welfare DP vs enumeration", welfare_equivalence},
        {"forecast accuracy and purity", forecast_accuracy},
        {"determinism and replay", replay},
        {"conservation", conservation},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%-4s %2zu %-34s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
