#include <doctest.h>

#include <cmath>
#include <set>

#include "kernel/clock.hpp"
#include "kernel/config.hpp"
#include "kernel/errors.hpp"
#include "kernel/money.hpp"
#include "kernel/rng.hpp"
#include "kernel/run_record.hpp"

using namespace hare;

TEST_CASE("rng streams are reproducible and independent") {
    SeededRng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    bool differs_stream = false, differs_seed = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        differs_stream |= x != c.next_u64();
        differs_seed |= x != d.next_u64();
    }
    CHECK(differs_stream);
    CHECK(differs_seed);
}

TEST_CASE("rng distributions stay in range") {
    SeededRng rng(1, 0);
    std::set<std::int64_t> seen;
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        const auto k = rng.between(-2, 2);
        REQUIRE(k >= -2);
        REQUIRE(k <= 2);
        seen.insert(k);
        REQUIRE(rng.below(3) < 3);
        const double z = rng.standard_normal();
        sum += z;
        sq += z * z;
    }
    CHECK(seen.size() == 5);
    CHECK(std::fabs(sum / n) < 0.01);
    CHECK(std::fabs(sq / n - 1.0) < 0.02);
}

TEST_CASE("shuffle is a permutation") {
    SeededRng rng(3, 1);
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
    rng.shuffle(std::span<int>(v));
    std::set<int> s(v.begin(), v.end());
    CHECK(s.size() == 8);
}

TEST_CASE("money grids") {
    CHECK(Cents::from_double(0.5).units == 50);
    CHECK(Cents::from_double(0.99).units == 99);
    CHECK(Cents::from_double(-0.01).units == -1);
    CHECK(Tenths::from_double(0.3).units == 3);
    CHECK(to_mills(Cents{7}).units == 70);
    CHECK((Cents{30} - Cents{1}).units == 29);
    CHECK(Cents{-5}.abs().units == 5);
    CHECK(Mills{10800}.as_double() == doctest::Approx(10.8));
}

TEST_CASE("clock units") {
    SimClock clock;
    clock.dt = 0.1;
    CHECK(clock.ticks_per_unit() == 10);
    CHECK(clock.at_unit_boundary());
    clock.advance();
    CHECK_FALSE(clock.at_unit_boundary());
    for (int i = 0; i < 9; ++i) clock.advance();
    CHECK(clock.at_unit_boundary());
    CHECK(clock.elapsed() == doctest::Approx(1.0));
}

TEST_CASE("config defaults and round trip") {
    const auto c = parse_config(json::object());
    CHECK(c.scenario == Scenario::Traffic);
    CHECK(c.traffic.car_count == 300);
    CHECK(c.traffic.operating_cost == 0.079);
    CHECK(c.traffic.network.nodes.size() == 4);
    CHECK(c.traffic.network.roads.size() == 10);
    CHECK(c.total_ticks() == 15000);

    const auto resolved = to_json(c);
    CHECK(to_json(parse_config(resolved)) == resolved);
    CHECK(config_hash(parse_config(resolved)) == config_hash(c));

    auto other = json{{"traffic", {{"car_count", 299}}}};
    CHECK(config_hash(parse_config(other)) != config_hash(c));

    const auto w = parse_config({{"scenario", "water"}, {"duration", 30}});
    CHECK(w.water.refill == std::vector<int>{0, 40, 50, 60, 30, 0});
    CHECK(w.total_ticks() == 180);
    CHECK(to_json(parse_config(to_json(w))) == to_json(w));
}

namespace {

std::string error_path(const json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "";
}

}  // namespace

TEST_CASE("config errors name the field") {
    CHECK(error_path({{"traffic", {{"car_count", 0}}}}) == "/traffic/car_count");
    CHECK(error_path({{"traffic", {{"car_count", "many"}}}}) == "/traffic/car_count");
    CHECK(error_path({{"scenario", "ocean"}}) == "/scenario");
    CHECK(error_path({{"dt", 0.3}}) == "/dt");
    CHECK(error_path({{"duratoin", 10}}) == "/duratoin");
    CHECK(error_path({{"water", {{"tank", {{"capacity", 10}, {"initial", 11}}}}}, {"scenario", "water"}}) ==
          "/water/tank/initial");
    CHECK(error_path({{"water", {{"prices", {{"initial", 0.35}}}}}, {"scenario", "water"}}) != "");
    CHECK(error_path({{"policy", {{"name", "greedy-congestion"}}}}) == "/policy");
    CHECK(error_path({{"power", "limited"}, {"policy", {{"name", "nope"}}}}) == "/policy/name");
    CHECK(error_path({{"traffic", {{"network", {{"nodes", {"A", "B"}}, {"roads", json::array({{{"from", "A"}, {"to", "B"}}})}, {"sink", "B"}}}}}}) ==
          "/traffic/network/roads");
    CHECK(error_path({{"traffic", {{"network", {{"roads", json::array({{{"from", "A"}, {"to", "Q"}}})}}}}}}) ==
          "/traffic/network/roads/0/to");
}

TEST_CASE("run record parse") {
    RunRecord r(json{{"type", "header"}, {"seed", 1}});
    r.append({{"type", "sample"}, {"tick", 0}});
    r.append({{"type", "summary"}, {"metrics", {{"x", 1}}}});
    const auto back = RunRecord::parse(r.to_jsonl());
    CHECK(back.header() == r.header());
    CHECK(back.events().size() == 2);
    CHECK(back.summary()["x"] == 1);
    CHECK(back.events_of("sample").size() == 1);

    auto line_of = [](const std::string& text) -> std::size_t {
        try {
            RunRecord::parse(text);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    CHECK(line_of("") == 1);
    CHECK(line_of("{\"type\":\"sample\"}\n") == 1);
    CHECK(line_of("{\"type\":\"header\"}\n{oops\n") == 2);
    CHECK(line_of("{\"type\":\"header\"}\n{}\n") == 2);
    CHECK(line_of("{\"type\":\"header\"}\n{\"type\":\"sample\"}") == 2);
}
