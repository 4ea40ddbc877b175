#include <doctest.h>

#include "kernel/config.hpp"
#include "regulator/regulator.hpp"
#include "sim/simulation.hpp"

using namespace hare;

namespace {

Intervention toll(int road, std::int64_t cents) {
    Intervention iv;
    iv.kind = InterventionKind::TollChange;
    iv.target = road;
    iv.delta = cents;
    return iv;
}

Intervention price(int period, std::int64_t tenths) {
    Intervention iv;
    iv.kind = InterventionKind::PriceChange;
    iv.target = period;
    iv.delta = tenths;
    return iv;
}

SimClock at_tick(std::int64_t k, double dt) {
    SimClock c;
    c.dt = dt;
    c.tick_index = k;
    return c;
}

}  // namespace

TEST_CASE("power none rejects everything") {
    Regulator reg(parse_config({{"power", "none"}}));
    const auto v = reg.validate(toll(0, 1), {50, 0, 99}, at_tick(0, 0.1));
    CHECK_FALSE(v.accepted);
    CHECK(v.reason == RejectReason::Power);
}

TEST_CASE("limited traffic budget") {
    auto config = parse_config({{"power", "limited"}, {"traffic", {{"budget_initial", 0.05}, {"budget_rate", 0.0}}}});
    Regulator reg(config);
    const auto clock = at_tick(0, 0.1);
    CHECK(reg.balance(clock) == Mills{50});
    const auto v = reg.validate(toll(0, 10), {50, 0, 99}, clock);
    CHECK_FALSE(v.accepted);
    CHECK(v.reason == RejectReason::Budget);
    CHECK(reg.validate(toll(0, -5), {50, 0, 99}, clock).accepted);
}

TEST_CASE("absolute value is spent") {
    Regulator reg(parse_config({{"power", "limited"}}));
    const auto clock = at_tick(0, 0.1);
    CHECK(reg.balance(clock) == Mills{300});
    REQUIRE(reg.validate(toll(0, -1), {50, 0, 99}, clock).accepted);
    reg.apply(toll(0, -1), clock);
    CHECK(reg.balance(clock) == Mills{290});
}

TEST_CASE("ten rapid clicks cost ten cents") {
    auto config = parse_config({{"power", "limited"}});
    Simulation sim(config, 1);
    for (int i = 0; i < 50; ++i) sim.step();
    const auto before = sim.regulator().balance(sim.clock());
    for (int i = 0; i < 10; ++i) CHECK(sim.submit(toll(i % 3, i % 2 == 0 ? 1 : -1)).accepted);
    CHECK(before - sim.regulator().balance(sim.clock()) == Mills{100});
}

TEST_CASE("bounds and increments") {
    Regulator reg(parse_config({{"power", "unlimited"}}));
    const auto clock = at_tick(0, 0.1);
    CHECK(reg.validate(toll(0, 1), {99, 0, 99}, clock).reason == RejectReason::Bounds);
    CHECK(reg.validate(toll(0, -1), {0, 0, 99}, clock).reason == RejectReason::Bounds);
    CHECK(reg.validate(toll(0, 0), {10, 0, 99}, clock).reason == RejectReason::Increment);
    CHECK(reg.validate(toll(0, 49), {50, 0, 99}, clock).accepted);

    auto coarse = parse_config({{"power", "unlimited"}, {"traffic", {{"toll_increment", 0.05}}}});
    Regulator reg5(coarse);
    CHECK(reg5.validate(toll(0, 3), {50, 0, 99}, clock).reason == RejectReason::Increment);
    CHECK(reg5.validate(toll(0, 10), {50, 0, 99}, clock).accepted);
}

TEST_CASE("budget accrual is exact") {
    Regulator reg(parse_config({{"power", "limited"}}));
    for (std::int64_t k = 0; k <= 15000; ++k) {
        const auto expected = 300 + (7 * k) / 10;  // 7 mills per second at dt = 0.1
        REQUIRE(reg.balance(at_tick(k, 0.1)).units == expected);
    }
    CHECK(reg.balance(at_tick(15000, 0.1)) == Mills{10800});
}

TEST_CASE("untouched 1500 s game ends with 10.80") {
    auto config = parse_config({{"power", "limited"}, {"duration", 1500}});
    Simulation sim(config, 3);
    sim.run_to_end();
    CHECK(sim.metrics()["budget_mills"] == 10800);
    CHECK(sim.metrics()["budget"].get<double>() == doctest::Approx(10.80));
}

TEST_CASE("water daily quota") {
    auto config = parse_config({{"scenario", "water"}, {"power", "limited"}, {"duration", 3}});
    Regulator reg(config);
    const auto day1 = at_tick(1, 1.0);
    const TargetState state{10, 0, 20};
    for (int i = 0; i < 3; ++i) {
        REQUIRE(reg.validate(price(2, 1), state, day1).accepted);
        reg.apply(price(2, 1), day1);
    }
    const auto fourth = reg.validate(price(2, 1), state, day1);
    CHECK_FALSE(fourth.accepted);
    CHECK(fourth.reason == RejectReason::Quota);
    CHECK(reg.changes_used_today(day1) == 3);

    const auto day2 = at_tick(6, 1.0);
    CHECK(reg.changes_used_today(day2) == 0);
    CHECK(reg.validate(price(2, 1), state, day2).accepted);
    CHECK(reg.validate(price(2, 2), state, day2).reason == RejectReason::Increment);
}

TEST_CASE("intervention rate") {
    CHECK(interventions_per_second({}, 0, 1500).per_second == 0.0);
    std::vector<AppliedIntervention> h;
    for (int i = 0; i < 90; ++i) h.push_back({toll(0, i % 2 ? 1 : -1), i * 16.0});
    const auto r = interventions_per_second(h, 0, 1500);
    CHECK(r.per_second == doctest::Approx(0.06));
    CHECK(r.count == 90);
    CHECK(r.total_abs_delta == 90);
    CHECK_THROWS(interventions_per_second(h, 5, 5));
}

TEST_CASE("scripted policy at a known cadence") {
    auto config = parse_config({{"power", "unlimited"}, {"policy", {{"name", "random-walk"}, {"cadence", 10}}}});
    Simulation sim(config, 6);
    sim.run_to_end();
    const auto m = sim.metrics();
    CHECK(m["interventions"] == 150);
    CHECK(m["interventions_per_second"].get<double>() == doctest::Approx(0.1));
}

TEST_CASE("no accepted sequence breaks budget or toll bounds") {
    auto config = parse_config({{"power", "limited"}, {"duration", 60}});
    SeededRng rng(99, 0);
    for (int game = 0; game < 3; ++game) {
        Simulation sim(config, static_cast<std::uint64_t>(game + 1));
        while (!sim.done()) {
            for (int i = 0; i < 3; ++i) {
                const int road = static_cast<int>(rng.below(10));
                sim.submit(toll(road, rng.between(-60, 60)));
            }
            sim.step();
            REQUIRE(sim.regulator().balance(sim.clock()).units >= 0);
            for (const auto& road : sim.traffic()->network().roads()) {
                REQUIRE(road.toll.units >= 0);
                REQUIRE(road.toll.units <= 99);
            }
        }
    }
}
