#include "kernel/config.hpp"

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <set>

#include "kernel/errors.hpp"

namespace hare {

namespace {

// Typed field access with path-qualified errors.
class Reader {
public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected object");
    }

    bool has(const char* key) const { return node_.contains(key) && !node_.at(key).is_null(); }
    std::string child(const char* key) const { return path_ + "/" + key; }
    const json& at(const char* key) const { return node_.at(key); }

    double number(const char* key, double fallback) const {
        if (!has(key)) return fallback;
        const auto& v = node_.at(key);
        if (!v.is_number()) throw ConfigError(child(key), "expected number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(child(key), "must be finite");
        return d;
    }

    int integer(const char* key, int fallback) const {
        if (!has(key)) return fallback;
        const auto& v = node_.at(key);
        if (!v.is_number_integer()) throw ConfigError(child(key), "expected integer");
        return v.get<int>();
    }

    std::uint64_t unsigned64(const char* key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        const auto& v = node_.at(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
            throw ConfigError(child(key), "expected non-negative integer");
        return v.get<std::uint64_t>();
    }

    bool boolean(const char* key, bool fallback) const {
        if (!has(key)) return fallback;
        const auto& v = node_.at(key);
        if (!v.is_boolean()) throw ConfigError(child(key), "expected boolean");
        return v.get<bool>();
    }

    std::string string(const char* key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        const auto& v = node_.at(key);
        if (!v.is_string()) throw ConfigError(child(key), "expected string");
        return v.get<std::string>();
    }

    const std::string& path() const { return path_; }

    /// Rejects any key not in `known`.
    void allow(std::initializer_list<const char*> known) const {
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            bool ok = false;
            for (const char* k : known) ok = ok || it.key() == k;
            if (!ok) throw ConfigError(path_ + "/" + it.key(), "unknown field");
        }
    }

private:
    const json& node_;
    std::string path_;
};

void require(bool ok, const std::string& path, const std::string& what) {
    if (!ok) throw ConfigError(path, what);
}

NetworkSpec parse_network(const Reader& r) {
    r.allow({"nodes", "roads", "initial_toll", "sink", "layout"});
    NetworkSpec net;
    if (r.has("nodes")) {
        const auto& nodes = r.at("nodes");
        require(nodes.is_array(), r.child("nodes"), "expected array");
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const auto p = r.child("nodes") + "/" + std::to_string(i);
            if (nodes[i].is_string()) {
                net.nodes.push_back(nodes[i].get<std::string>());
            } else {
                Reader n(nodes[i], p);
                n.allow({"id", "x", "y"});
                const auto id = n.string("id", "");
                require(!id.empty(), p + "/id", "node id required");
                net.nodes.push_back(id);
                if (n.has("x") || n.has("y")) net.layout[id] = {n.number("x", 0.0), n.number("y", 0.0)};
            }
        }
    } else {
        net = default_network();
    }
    if (r.has("roads")) {
        net.roads.clear();
        const auto& roads = r.at("roads");
        require(roads.is_array(), r.child("roads"), "expected array");
        for (std::size_t i = 0; i < roads.size(); ++i) {
            Reader rr(roads[i], r.child("roads") + "/" + std::to_string(i));
            rr.allow({"from", "to", "length", "capacity", "max_speed", "bidirectional"});
            RoadSpec road;
            road.from = rr.string("from", "");
            road.to = rr.string("to", "");
            road.length = rr.number("length", road.length);
            road.capacity = rr.integer("capacity", road.capacity);
            road.max_speed = rr.number("max_speed", road.max_speed);
            require(road.length > 0, rr.child("length"), "must be > 0");
            require(road.capacity >= 1, rr.child("capacity"), "must be >= 1");
            require(road.max_speed > 0, rr.child("max_speed"), "must be > 0");
            net.roads.push_back(road);
            if (rr.has("bidirectional") && rr.at("bidirectional").is_boolean() && rr.at("bidirectional").get<bool>())
                net.roads.push_back(RoadSpec{road.to, road.from, road.length, road.capacity, road.max_speed});
        }
    }
    net.initial_toll = r.number("initial_toll", net.initial_toll);
    net.sink = r.string("sink", net.sink);
    if (r.has("layout")) {
        const auto& layout = r.at("layout");
        require(layout.is_object(), r.child("layout"), "expected object");
        for (auto it = layout.begin(); it != layout.end(); ++it) {
            require(it->is_array() && it->size() == 2, r.child("layout") + "/" + it.key(), "expected [x, y]");
            net.layout[it.key()] = {(*it)[0].get<double>(), (*it)[1].get<double>()};
        }
    }

    const std::string np = r.path();
    require(!net.nodes.empty(), np + "/nodes", "at least one node required");
    std::set<std::string> names(net.nodes.begin(), net.nodes.end());
    require(names.size() == net.nodes.size(), np + "/nodes", "duplicate node id");
    for (std::size_t i = 0; i < net.roads.size(); ++i) {
        const auto& road = net.roads[i];
        const auto p = np + "/roads/" + std::to_string(i);
        require(names.count(road.from) == 1, p + "/from", "unknown node '" + road.from + "'");
        require(names.count(road.to) == 1, p + "/to", "unknown node '" + road.to + "'");
        require(road.from != road.to, p, "self-loop");
    }
    require(names.count(net.sink) == 1, np + "/sink", "unknown node '" + net.sink + "'");
    // Strongly connected iff every node is reachable from the first node both
    // along and against road direction.
    for (const bool forward : {true, false}) {
        std::set<std::string> seen{net.nodes.front()};
        std::vector<std::string> stack{net.nodes.front()};
        while (!stack.empty()) {
            const auto at = stack.back();
            stack.pop_back();
            for (const auto& road : net.roads) {
                const auto& from = forward ? road.from : road.to;
                const auto& to = forward ? road.to : road.from;
                if (from == at && seen.insert(to).second) stack.push_back(to);
            }
        }
        require(seen.size() == names.size(), np + "/roads", "network must be strongly connected");
    }
    require(net.initial_toll >= 0.0 && net.initial_toll <= 0.99, np + "/initial_toll", "must be in [0.00, 0.99]");
    return net;
}

void parse_traffic(const Reader& r, TrafficParams& t) {
    r.allow({"network", "car_count", "operating_cost", "default_bias", "destination_bias", "value_spread",
             "toll_increment", "budget_initial", "budget_rate"});
    if (r.has("network")) {
        t.network = parse_network(Reader(r.at("network"), r.child("network")));
    }
    t.car_count = r.integer("car_count", t.car_count);
    require(t.car_count > 0, r.child("car_count"), "must be > 0");
    t.operating_cost = r.number("operating_cost", t.operating_cost);
    require(t.operating_cost >= 0, r.child("operating_cost"), "must be >= 0");
    t.default_bias = r.number("default_bias", t.default_bias);
    if (r.has("destination_bias")) {
        const auto& b = r.at("destination_bias");
        require(b.is_object(), r.child("destination_bias"), "expected object");
        t.destination_bias.clear();
        for (auto it = b.begin(); it != b.end(); ++it) {
            require(it->is_number(), r.child("destination_bias") + "/" + it.key(), "expected number");
            t.destination_bias[it.key()] = it->get<double>();
        }
    }
    const auto spread = r.string("value_spread", t.value_spread == ValueSpread::StdDev ? "stddev" : "variance");
    if (spread == "stddev") t.value_spread = ValueSpread::StdDev;
    else if (spread == "variance") t.value_spread = ValueSpread::Variance;
    else throw ConfigError(r.child("value_spread"), "expected \"stddev\" or \"variance\"");
    t.toll_increment = r.number("toll_increment", t.toll_increment);
    require(t.toll_increment > 0 && t.toll_increment <= 0.99, r.child("toll_increment"), "must be in (0, 0.99]");
    t.budget_initial = r.number("budget_initial", t.budget_initial);
    t.budget_rate = r.number("budget_rate", t.budget_rate);
    require(t.budget_initial >= 0, r.child("budget_initial"), "must be >= 0");
    require(t.budget_rate >= 0, r.child("budget_rate"), "must be >= 0");
}

void parse_water(const Reader& r, WaterParams& w) {
    r.allow({"tenants", "refill", "tank", "prices", "activities", "max_daily_changes", "seconds_per_period"});
    w.tenants = r.integer("tenants", w.tenants);
    require(w.tenants > 0, r.child("tenants"), "must be > 0");
    if (r.has("refill")) {
        const auto& v = r.at("refill");
        require(v.is_array() && !v.empty(), r.child("refill"), "expected non-empty array");
        w.refill.clear();
        for (const auto& x : v) {
            require(x.is_number_integer() && x.get<int>() >= 0, r.child("refill"), "expected non-negative integers");
            w.refill.push_back(x.get<int>());
        }
    }
    if (r.has("tank")) {
        Reader tank(r.at("tank"), r.child("tank"));
        tank.allow({"capacity", "initial"});
        w.tank_capacity = tank.integer("capacity", w.tank_capacity);
        w.initial_level = tank.integer("initial", w.initial_level);
        require(w.tank_capacity > 0, tank.child("capacity"), "must be > 0");
        require(w.initial_level >= 0 && w.initial_level <= w.tank_capacity, tank.child("initial"),
                "must be in [0, capacity]");
    }
    if (r.has("prices")) {
        Reader p(r.at("prices"), r.child("prices"));
        p.allow({"initial", "increment", "min", "max"});
        w.initial_price = p.number("initial", w.initial_price);
        w.price_increment = p.number("increment", w.price_increment);
        w.price_min = p.number("min", w.price_min);
        w.price_max = p.number("max", w.price_max);
        require(w.price_increment > 0, p.child("increment"), "must be > 0");
        require(w.price_min >= 0 && w.price_min <= w.price_max, p.child("min"), "must satisfy 0 <= min <= max");
        require(w.initial_price >= w.price_min && w.initial_price <= w.price_max, p.child("initial"),
                "must lie in [min, max]");
        const auto on_grid = [](double x) { return std::fabs(x * 10.0 - std::round(x * 10.0)) < 1e-9; };
        require(on_grid(w.price_increment) && on_grid(w.initial_price) && on_grid(w.price_min) && on_grid(w.price_max),
                p.path(), "prices must lie on the 0.1 grid");
    }
    if (r.has("activities")) {
        Reader a(r.at("activities"), r.child("activities"));
        a.allow({"size_min", "size_max", "daily_total", "value_noise", "value_means", "table"});
        w.size_min = a.integer("size_min", w.size_min);
        w.size_max = a.integer("size_max", w.size_max);
        w.daily_total = a.integer("daily_total", w.daily_total);
        w.value_noise = a.number("value_noise", w.value_noise);
        require(w.size_min >= 1 && w.size_min <= w.size_max, a.child("size_min"), "need 1 <= size_min <= size_max");
        require(w.daily_total >= w.tenants * w.periods(), a.child("daily_total"), "too small for one unit per activity");
        require(w.value_noise >= 0 && w.value_noise < 1, a.child("value_noise"), "must be in [0, 1)");
        if (a.has("value_means")) {
            const auto& v = a.at("value_means");
            require(v.is_array(), a.child("value_means"), "expected array");
            w.value_means.clear();
            for (const auto& x : v) {
                require(x.is_number(), a.child("value_means"), "expected numbers");
                w.value_means.push_back(x.get<double>());
            }
        }
        if (a.has("table")) {
            const auto& tab = a.at("table");
            require(tab.is_array(), a.child("table"), "expected array");
            std::vector<ActivitySpec> table;
            for (std::size_t i = 0; i < tab.size(); ++i) {
                Reader e(tab[i], a.child("table") + "/" + std::to_string(i));
                e.allow({"tenant", "home", "window_start", "window_end", "size", "value"});
                ActivitySpec act;
                act.tenant = e.integer("tenant", 0);
                act.home = e.integer("home", 1);
                act.window_start = e.integer("window_start", act.home);
                act.window_end = e.integer("window_end", act.home + 1);
                if (!e.at("size").is_number_integer()) throw ConfigError(e.child("size"), "size must be an integer");
                act.size = e.integer("size", 1);
                act.value = e.number("value", 0.0);
                require(act.tenant >= 0, e.child("tenant"), "must be >= 0");
                require(act.home >= 1, e.child("home"), "must be >= 1");
                require(act.window_start < act.window_end, e.child("window_start"), "need t_s < t_f");
                require(act.size > 0, e.child("size"), "must be > 0");
                require(act.value >= 0, e.child("value"), "must be >= 0");
                table.push_back(act);
            }
            w.table = std::move(table);
        }
    }
    require(static_cast<int>(w.value_means.size()) == w.periods(), r.child("activities") + "/value_means",
            "needs one mean per period");
    if (w.table) {
        std::set<std::pair<int, int>> seen;
        for (std::size_t i = 0; i < w.table->size(); ++i) {
            const auto& act = (*w.table)[i];
            const auto p = r.child("activities") + "/table/" + std::to_string(i);
            require(act.tenant < w.tenants, p + "/tenant", "tenant index out of range");
            require(act.home <= w.periods(), p + "/home", "period out of range");
            require(seen.insert({act.tenant, act.home}).second, p, "duplicate (tenant, home) activity");
        }
        require(static_cast<int>(seen.size()) == w.tenants * w.periods(), r.child("activities") + "/table",
                "need exactly one activity per tenant per period");
    }
    w.max_daily_changes = r.integer("max_daily_changes", w.max_daily_changes);
    require(w.max_daily_changes >= 0, r.child("max_daily_changes"), "must be >= 0");
    w.seconds_per_period = r.number("seconds_per_period", w.seconds_per_period);
    require(w.seconds_per_period > 0, r.child("seconds_per_period"), "must be > 0");
}

void parse_forecast(const Reader& r, ForecastParams& f) {
    r.allow({"enabled", "horizon", "window", "step", "refresh", "yellow_fraction"});
    f.enabled = r.boolean("enabled", f.enabled);
    f.horizon = r.number("horizon", f.horizon);
    f.window = r.number("window", f.window);
    f.step = r.number("step", f.step);
    f.refresh = r.number("refresh", f.refresh);
    f.yellow_fraction = r.number("yellow_fraction", f.yellow_fraction);
    require(f.horizon > 0, r.child("horizon"), "must be > 0");
    require(f.window > 0, r.child("window"), "must be > 0");
    require(f.step > 0 && f.step <= f.horizon, r.child("step"), "must be in (0, horizon]");
    require(f.refresh > 0, r.child("refresh"), "must be > 0");
    require(f.yellow_fraction > 0 && f.yellow_fraction < 1, r.child("yellow_fraction"), "must be in (0, 1)");
}

}  // namespace

NetworkSpec default_network() {
    NetworkSpec net;
    net.nodes = {"A", "B", "C", "D"};
    net.layout = {{"A", {0.0, 0.0}}, {"B", {4.0, 3.0}}, {"C", {4.0, -3.0}}, {"D", {8.0, 0.0}}};
    const RoadSpec edges[] = {
        {"A", "B", 5.0, 60, 1.0}, {"A", "C", 5.0, 80, 1.0}, {"B", "C", 6.0, 40, 1.0},
        {"B", "D", 5.0, 60, 1.0}, {"C", "D", 5.0, 80, 1.0},
    };
    for (const auto& e : edges) {
        net.roads.push_back(e);
        net.roads.push_back(RoadSpec{e.to, e.from, e.length, e.capacity, e.max_speed});
    }
    return net;
}

std::int64_t SimConfig::total_ticks() const {
    if (scenario == Scenario::Water) return static_cast<std::int64_t>(std::llround(duration)) * water.periods();
    return std::llround(duration / dt);
}

std::string_view to_string(Scenario s) { return s == Scenario::Traffic ? "traffic" : "water"; }

std::string_view to_string(Adaptivity a) {
    switch (a) {
        case Adaptivity::Simple: return "simple";
        case Adaptivity::Adaptive: return "adaptive";
        case Adaptivity::Random: return "random";
    }
    return "?";
}

std::string_view to_string(PowerLevel p) {
    switch (p) {
        case PowerLevel::None: return "none";
        case PowerLevel::Limited: return "limited";
        case PowerLevel::Unlimited: return "unlimited";
    }
    return "?";
}

Adaptivity parse_adaptivity(std::string_view text, const std::string& path) {
    if (text == "simple") return Adaptivity::Simple;
    if (text == "adaptive") return Adaptivity::Adaptive;
    if (text == "random") return Adaptivity::Random;
    throw ConfigError(path, "expected simple | adaptive | random");
}

PowerLevel parse_power(std::string_view text, const std::string& path) {
    if (text == "none") return PowerLevel::None;
    if (text == "limited") return PowerLevel::Limited;
    if (text == "unlimited") return PowerLevel::Unlimited;
    throw ConfigError(path, "expected none | limited | unlimited");
}

SimConfig parse_config(const json& doc) {
    Reader r(doc, "");
    r.allow({"scenario", "adaptivity", "power", "seed", "duration", "dt", "frame_rate", "pacing_speed", "traffic",
             "water", "forecast", "policy"});
    SimConfig c;
    const auto scenario = r.string("scenario", "traffic");
    if (scenario == "traffic") c.scenario = Scenario::Traffic;
    else if (scenario == "water") c.scenario = Scenario::Water;
    else throw ConfigError("/scenario", "expected traffic | water");

    c.adaptivity = parse_adaptivity(r.string("adaptivity", "simple"), "/adaptivity");
    c.power = parse_power(r.string("power", "none"), "/power");
    c.seed = r.unsigned64("seed", c.seed);
    c.duration = r.number("duration", c.scenario == Scenario::Traffic ? 1500.0 : 30.0);
    require(c.duration > 0, "/duration", "must be > 0");
    c.dt = r.number("dt", c.scenario == Scenario::Traffic ? 0.1 : 1.0);
    require(c.dt > 0, "/dt", "must be > 0");
    const double per = 1.0 / c.dt;
    require(std::fabs(per - std::round(per)) < 1e-9, "/dt", "1/dt must be an integer");
    if (c.scenario == Scenario::Water) {
        require(c.dt == 1.0, "/dt", "water ticks are whole periods (dt = 1)");
        require(c.duration == std::floor(c.duration), "/duration", "water duration is a whole number of days");
    }
    c.frame_rate = r.number("frame_rate", c.frame_rate);
    require(c.frame_rate > 0, "/frame_rate", "must be > 0");
    c.pacing_speed = r.number("pacing_speed", c.pacing_speed);
    require(c.pacing_speed > 0, "/pacing_speed", "must be > 0");

    if (r.has("traffic")) parse_traffic(Reader(r.at("traffic"), "/traffic"), c.traffic);
    if (c.traffic.network.nodes.empty()) c.traffic.network = default_network();
    if (r.has("water")) parse_water(Reader(r.at("water"), "/water"), c.water);
    if (r.has("forecast")) parse_forecast(Reader(r.at("forecast"), "/forecast"), c.forecast);
    if (r.has("policy")) {
        const auto& p = r.at("policy");
        if (p.is_string()) {
            c.policy.name = p.get<std::string>();
        } else {
            Reader pr(p, "/policy");
            pr.allow({"name", "cadence"});
            c.policy.name = pr.string("name", c.policy.name);
            c.policy.cadence = pr.number("cadence", c.policy.cadence);
        }
        require(c.policy.cadence > 0, "/policy/cadence", "must be > 0");
        static const std::set<std::string> known{"none", "random-walk", "greedy-congestion", "peak-pricing"};
        require(known.count(c.policy.name) == 1, "/policy/name", "unknown policy '" + c.policy.name + "'");
        require(!(c.policy.name == "greedy-congestion" && c.scenario != Scenario::Traffic), "/policy/name",
                "greedy-congestion is a traffic policy");
        require(!(c.policy.name == "peak-pricing" && c.scenario != Scenario::Water), "/policy/name",
                "peak-pricing is a water policy");
    }
    require(!(c.power == PowerLevel::None && c.policy.name != "none"), "/policy",
            "power=none forces policy=none");
    return c;
}

json to_json(const SimConfig& c) {
    json net;
    net["nodes"] = c.traffic.network.nodes;
    json roads = json::array();
    for (const auto& r : c.traffic.network.roads)
        roads.push_back({{"from", r.from}, {"to", r.to}, {"length", r.length}, {"capacity", r.capacity},
                         {"max_speed", r.max_speed}});
    net["roads"] = roads;
    json layout = json::object();
    for (const auto& [id, xy] : c.traffic.network.layout) layout[id] = {xy.first, xy.second};
    net["layout"] = layout;
    net["initial_toll"] = c.traffic.network.initial_toll;
    net["sink"] = c.traffic.network.sink;

    json bias = json::object();
    for (const auto& [k, v] : c.traffic.destination_bias) bias[k] = v;

    json water{{"tenants", c.water.tenants},
               {"refill", c.water.refill},
               {"tank", {{"capacity", c.water.tank_capacity}, {"initial", c.water.initial_level}}},
               {"prices",
                {{"initial", c.water.initial_price},
                 {"increment", c.water.price_increment},
                 {"min", c.water.price_min},
                 {"max", c.water.price_max}}},
               {"max_daily_changes", c.water.max_daily_changes},
               {"seconds_per_period", c.water.seconds_per_period}};
    json acts{{"size_min", c.water.size_min},
              {"size_max", c.water.size_max},
              {"daily_total", c.water.daily_total},
              {"value_means", c.water.value_means},
              {"value_noise", c.water.value_noise}};
    if (c.water.table) {
        json tab = json::array();
        for (const auto& a : *c.water.table)
            tab.push_back({{"tenant", a.tenant}, {"home", a.home}, {"window_start", a.window_start},
                           {"window_end", a.window_end}, {"size", a.size}, {"value", a.value}});
        acts["table"] = tab;
    }
    water["activities"] = acts;

    return json{
        {"scenario", to_string(c.scenario)},
        {"adaptivity", to_string(c.adaptivity)},
        {"power", to_string(c.power)},
        {"seed", c.seed},
        {"duration", c.duration},
        {"dt", c.dt},
        {"frame_rate", c.frame_rate},
        {"pacing_speed", c.pacing_speed},
        {"traffic",
         {{"network", net},
          {"car_count", c.traffic.car_count},
          {"operating_cost", c.traffic.operating_cost},
          {"default_bias", c.traffic.default_bias},
          {"destination_bias", bias},
          {"value_spread", c.traffic.value_spread == ValueSpread::StdDev ? "stddev" : "variance"},
          {"toll_increment", c.traffic.toll_increment},
          {"budget_initial", c.traffic.budget_initial},
          {"budget_rate", c.traffic.budget_rate}}},
        {"water", water},
        {"forecast",
         {{"enabled", c.forecast.enabled},
          {"horizon", c.forecast.horizon},
          {"window", c.forecast.window},
          {"step", c.forecast.step},
          {"refresh", c.forecast.refresh},
          {"yellow_fraction", c.forecast.yellow_fraction}}},
        {"policy", {{"name", c.policy.name}, {"cadence", c.policy.cadence}}},
    };
}

std::string config_hash(const SimConfig& config) {
    const auto text = to_json(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace hare
