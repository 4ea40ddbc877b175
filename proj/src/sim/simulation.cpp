#include "sim/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "kernel/errors.hpp"
#include "oracles/oracles.hpp"
#include "sim/policy.hpp"

namespace hare {

namespace {

traffic::DriveMode drive_mode(Adaptivity a) {
    switch (a) {
        case Adaptivity::Simple: return traffic::DriveMode::Simple;
        case Adaptivity::Adaptive: return traffic::DriveMode::Adaptive;
        case Adaptivity::Random: return traffic::DriveMode::Random;
    }
    return traffic::DriveMode::Simple;
}

water::DeviceMode device_mode(Adaptivity a) {
    switch (a) {
        case Adaptivity::Simple: return water::DeviceMode::Simple;
        case Adaptivity::Adaptive: return water::DeviceMode::Adaptive;
        case Adaptivity::Random: return water::DeviceMode::Random;
    }
    return water::DeviceMode::Simple;
}

std::int64_t ticks_for(double seconds, double dt) { return std::max<std::int64_t>(1, std::llround(seconds / dt)); }

}  // namespace

json record_header(const SimConfig& config, std::uint64_t seed) {
    return {{"type", "header"}, {"config", to_json(config)}, {"seed", seed}, {"config_hash", config_hash(config)},
            {"format", 1}};
}

Simulation::Simulation(SimConfig config, std::uint64_t seed, std::optional<Adaptivity> mode_override,
                       bool with_policy)
    : config_(std::move(config)),
      seed_(seed),
      total_ticks_(config_.total_ticks()),
      regulator_(config_),
      policy_rng_(seed, streams::kPolicy),
      record_(record_header(config_, seed)) {
    const Adaptivity mode = mode_override.value_or(config_.adaptivity);
    if (config_.scenario == Scenario::Traffic) {
        clock_.dt = config_.dt;
        traffic_ = std::make_unique<traffic::TrafficWorld>(config_, seed, drive_mode(mode));
        if (config_.forecast.enabled)
            choices_ = std::make_unique<forecast::ChoiceModel>(traffic_->network(), config_.forecast.window);
    } else {
        clock_.dt = 1.0;
        water_ = std::make_unique<water::WaterWorld>(config_, seed, device_mode(mode));
    }
    if (with_policy) policy_ = make_policy(config_.policy.name);
}

Simulation::~Simulation() = default;

int Simulation::resolve_target(const std::string& name) const {
    if (traffic_) {
        if (auto id = traffic_->network().find_road(name)) return *id;
        throw ProtocolError("unknown road " + name);
    }
    try {
        std::size_t used = 0;
        const int period = std::stoi(name, &used);
        if (used == name.size() && period >= 1 && period <= water_->periods()) return period;
    } catch (const std::logic_error&) {
    }
    throw ProtocolError("unknown period " + name);
}

TargetState Simulation::target_state(const Intervention& iv) const {
    if (traffic_) {
        if (iv.kind != InterventionKind::TollChange) throw ProtocolError("traffic accepts only toll changes");
        if (iv.target < 0 || iv.target >= traffic_->network().road_count())
            throw ProtocolError("unknown road " + std::to_string(iv.target));
        return {traffic_->network().road(iv.target).toll.units, 0, 99};
    }
    if (iv.kind != InterventionKind::PriceChange) throw ProtocolError("water accepts only price changes");
    if (iv.target < 1 || iv.target > water_->periods())
        throw ProtocolError("unknown period " + std::to_string(iv.target));
    return {water_->prices()[iv.target - 1].units, water_->price_floor().units, water_->price_ceiling().units};
}

json Simulation::account() const {
    if (traffic_) {
        const auto balance = regulator_.balance(clock_);
        return {{"balance", balance.as_double()}, {"balance_mills", balance.units}};
    }
    return {{"changes_used", regulator_.changes_used_today(clock_)}, {"max", regulator_.max_daily_changes()}};
}

SubmitResult Simulation::submit(Intervention iv) {
    const auto target = target_state(iv);
    iv.issued_tick = clock_.tick_index;
    const auto verdict = regulator_.validate(iv, target, clock_);
    if (verdict.accepted) {
        regulator_.apply(iv, clock_);
        if (traffic_) traffic_->apply(iv);
        else water_->apply(iv);
    }
    SubmitResult result{verdict.accepted, verdict.reason, iv.client_tag, account()};
    json event{{"type", "intervention"},
               {"tick", iv.issued_tick},
               {"kind", to_string(iv.kind)},
               {"target", iv.target},
               {"delta", iv.delta},
               {"source", to_string(iv.source)},
               {"accepted", verdict.accepted},
               {"reason", to_string(verdict.reason)}};
    if (!iv.client_tag.empty()) event["client_tag"] = iv.client_tag;
    record_.append(std::move(event));
    return result;
}

std::vector<SubmitResult> Simulation::step(std::span<const Intervention> pending) {
    std::vector<SubmitResult> results;
    for (const auto& iv : pending) results.push_back(submit(iv));
    step();
    return results;
}

void Simulation::step() {
    if (policy_) {
        const auto cadence = traffic_ ? ticks_for(config_.policy.cadence, clock_.dt)
                                      : std::max<std::int64_t>(1, std::llround(config_.policy.cadence));
        if (clock_.tick_index % cadence == 0) policy_->act(*this, policy_rng_);
    }
    if (traffic_) traffic_->step(clock_);
    else water_->step(clock_);
    clock_.advance();
    after_tick();
}

void Simulation::after_tick() {
    const auto tick = clock_.tick_index;
    if (traffic_) {
        if (choices_) {
            for (const auto& d : traffic_->last_departures()) choices_->observe(d.road, clock_.elapsed());
            choices_->expire(clock_.elapsed());
        }
        if (clock_.at_unit_boundary()) {
            auto sample = traffic_->sample(tick);
            sample["budget_mills"] = regulator_.balance(clock_).units;
            record_.append(std::move(sample));
        }
        if (choices_ && tick % ticks_for(config_.forecast.refresh, clock_.dt) == 0) {
            auto report = forecast::forecast(traffic_->network(), traffic_->snapshot(tick), *choices_, config_.forecast);
            json event{{"type", "forecast"}};
            event.update(report.to_json(traffic_->network()));
            record_.append(std::move(event));
            reports_.push_back(std::move(report));
        }
        return;
    }
    const auto& last = water_->last_period();
    if (static_cast<int>(shed_by_period_.size()) < last.day) shed_by_period_.emplace_back(water_->periods(), 0.0);
    shed_by_period_[last.day - 1][last.period - 1] = last.shed.value;
    auto sample = water_->sample(tick);
    sample["changes_used"] = regulator_.changes_used_today(clock_);
    record_.append(std::move(sample));
}

void Simulation::run_to_end() {
    while (!done()) step();
    finish();
}

void Simulation::finish() {
    if (finished_) return;
    finished_ = true;
    record_.append({{"type", "summary"}, {"tick", clock_.tick_index}, {"metrics", metrics()}});
}

json Simulation::metrics() const {
    json m;
    m["scenario"] = to_string(config_.scenario);
    m["ticks"] = clock_.tick_index;
    const auto& history = regulator_.history();
    m["interventions"] = history.size();
    if (traffic_) {
        const double elapsed = clock_.elapsed();
        const double optimal = oracles::optimal_throughput_for(config_);
        const auto transits = traffic_->sink_transits();
        m["elapsed"] = elapsed;
        m["transits"] = transits;
        m["optimal_rate"] = optimal;
        m["oracle"] = "search-based steady-state cycle assignment (stand-in optimum)";
        m["throughput_pct"] = elapsed > 0 && optimal > 0 ? 100.0 * static_cast<double>(transits) / (optimal * elapsed) : 0.0;
        if (elapsed > 0) {
            const auto rate = interventions_per_second(history, 0.0, elapsed);
            m["interventions_per_second"] = rate.per_second;
            m["intervention_abs_delta_cents"] = rate.total_abs_delta;
        }
        const auto balance = regulator_.balance(clock_);
        m["budget"] = balance.as_double();
        m["budget_mills"] = balance.units;
        m["total_utility"] = traffic_->total_utility();
        m["cars_on_roads"] = traffic_->cars_on_roads();
        m["cars_at_nodes"] = traffic_->cars_at_nodes();
        if (choices_) {
            try {
                const auto acc = record_accuracy(record_);
                m["forecast_accuracy"] = acc.accuracy;
                m["forecast_comparisons"] = acc.comparisons;
                m["forecast_change_comparisons"] = acc.change_comparisons;
                if (acc.change_comparisons > 0) m["forecast_change_accuracy"] = acc.change_accuracy;
            } catch (const std::invalid_argument&) {
                m["forecast_accuracy"] = nullptr;
            }
        }
        return m;
    }
    const auto& utility = water_->utility_by_day();
    const auto& value = water_->value_by_day();
    m["days"] = utility.size();
    m["utility_by_day"] = utility;
    m["value_by_day"] = value;
    m["aggregate_utility"] = water_->aggregate_utility();
    m["shed_count"] = water_->shed_count();
    m["shed_value"] = water_->shed_value();
    const int days = static_cast<int>(utility.size());
    if (days > 0) {
        const int last = std::min(days, 30);
        const int first = std::max(1, last - 4);
        double u = 0.0, v = 0.0;
        for (int d = first; d <= last; ++d) {
            u += utility[d - 1];
            v += value[d - 1];
        }
        const double optimal = oracles::optimal_welfare_for(config_, seed_, last - first + 1);
        m["window"] = {first, last};
        m["window_utility"] = u;
        m["window_value"] = v;
        m["optimal_value"] = optimal;
        m["oracle"] = "value-only DP optimum over the window from a full tank (stand-in optimum)";
        m["utility_pct"] = optimal > 0 ? 100.0 * u / optimal : 0.0;
        m["value_pct"] = optimal > 0 ? 100.0 * v / optimal : 0.0;
        m["interventions_per_period"] = static_cast<double>(history.size()) / static_cast<double>(clock_.tick_index);
    }
    return m;
}

json Simulation::frame(bool include_cars) const {
    json f{{"tick", clock_.tick_index}, {"elapsed", clock_.elapsed()}, {"scenario", to_string(config_.scenario)},
           {"account", account()}, {"power", to_string(config_.power)}};
    if (traffic_) {
        f["view"] = traffic_->view(include_cars);
        f["view"]["budget"] = regulator_.balance(clock_).as_double();
        if (!reports_.empty()) f["forecast"] = reports_.back().to_json(traffic_->network());
    } else {
        const int periods = water_->periods();
        f["view"] = water_->view();
        f["view"]["day"] = clock_.tick_index / periods + 1;
        f["view"]["period"] = clock_.tick_index % periods + 1;
    }
    return f;
}

RunRecord run_headless(const SimConfig& config, std::uint64_t seed) {
    Simulation sim(config, seed);
    sim.run_to_end();
    return sim.take_record();
}

namespace {

Intervention intervention_from_event(const json& e) {
    Intervention iv;
    iv.kind = parse_intervention_kind(e.at("kind").get<std::string>());
    iv.target = e.at("target").get<int>();
    iv.delta = e.at("delta").get<std::int64_t>();
    iv.issued_tick = e.at("tick").get<std::int64_t>();
    iv.source = e.value("source", "human") == "scripted-policy" ? InterventionSource::ScriptedPolicy
                                                                 : InterventionSource::Human;
    iv.client_tag = e.value("client_tag", "");
    return iv;
}

}  // namespace

ReplayReport replay_check(const RunRecord& record) {
    const auto& header = record.header();
    const auto config = parse_config(header.at("config"));
    const auto seed = header.at("seed").get<std::uint64_t>();
    Simulation sim(config, seed, std::nullopt, false);

    std::vector<const json*> expected;
    std::vector<const json*> interventions;
    std::int64_t last_tick = 0;
    for (const auto& e : record.events()) {
        const auto type = e.at("type").get<std::string>();
        if (type == "sample") {
            expected.push_back(&e);
            last_tick = std::max(last_tick, e.at("tick").get<std::int64_t>());
        } else if (type == "intervention") {
            interventions.push_back(&e);
        }
    }

    ReplayReport report;
    std::size_t next_iv = 0;
    std::size_t next_sample = 0;
    std::size_t seen = 0;
    const auto fail = [&](std::int64_t tick, std::string detail) {
        report.ok = false;
        report.first_divergent_tick = tick;
        report.detail = std::move(detail);
        report.samples_compared = next_sample;
        return report;
    };
    while (sim.clock().tick_index < last_tick) {
        const auto tick = sim.clock().tick_index;
        while (next_iv < interventions.size() && interventions[next_iv]->at("tick").get<std::int64_t>() == tick) {
            const auto& e = *interventions[next_iv++];
            SubmitResult r;
            try {
                r = sim.submit(intervention_from_event(e));
            } catch (const ProtocolError& err) {
                return fail(tick, std::string("intervention rejected by protocol: ") + err.what());
            }
            if (r.accepted != e.value("accepted", true)) return fail(tick, "intervention verdict differs");
        }
        if (next_iv < interventions.size() && interventions[next_iv]->at("tick").get<std::int64_t>() < tick)
            return fail(interventions[next_iv]->at("tick").get<std::int64_t>(), "intervention out of order");
        sim.step();
        const auto& produced = sim.record().events();
        for (; seen < produced.size(); ++seen) {
            if (produced[seen].at("type") != "sample") continue;
            if (next_sample >= expected.size()) return fail(sim.clock().tick_index, "extra sample");
            const auto& want = *expected[next_sample];
            if (produced[seen].dump() != want.dump())
                return fail(want.at("tick").get<std::int64_t>(), "sample differs");
            ++next_sample;
        }
    }
    if (next_sample != expected.size()) return fail(sim.clock().tick_index, "missing samples");
    report.samples_compared = next_sample;
    return report;
}

std::vector<Intervention> record_interventions(const RunRecord& record) {
    std::vector<Intervention> out;
    for (const auto& e : record.events())
        if (e.at("type") == "intervention") out.push_back(intervention_from_event(e));
    return out;
}

ReplayReport compare_samples(const RunRecord& expected, const RunRecord& produced) {
    const auto want = expected.events_of("sample");
    const auto got = produced.events_of("sample");
    ReplayReport report;
    const auto n = std::min(want.size(), got.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (want[i].dump() != got[i].dump()) {
            report.ok = false;
            report.first_divergent_tick = want[i].at("tick").get<std::int64_t>();
            report.detail = "sample differs";
            report.samples_compared = i;
            return report;
        }
    }
    report.samples_compared = n;
    if (want.size() != got.size()) {
        report.ok = false;
        report.first_divergent_tick = n < want.size() ? want[n].at("tick").get<std::int64_t>()
                                                      : got[n].at("tick").get<std::int64_t>();
        report.detail = want.size() > got.size() ? "missing samples" : "extra samples";
    }
    return report;
}

forecast::AccuracyResult record_accuracy(const RunRecord& record) {
    const auto config = parse_config(record.header().at("config"));
    if (config.scenario != Scenario::Traffic) throw std::invalid_argument("accuracy applies to traffic runs");
    const auto net = traffic::RoadNetwork::from_spec(config.traffic.network);
    std::vector<forecast::ForecastReport> reports;
    forecast::RealizedSeries realized;
    for (const auto& e : record.events()) {
        const auto& type = e.at("type");
        if (type == "forecast") {
            forecast::ForecastReport r;
            r.issued_tick = e.at("issued_tick").get<std::int64_t>();
            r.horizon = e.at("horizon").get<double>();
            for (const auto& road : e.at("roads"))
                r.roads.push_back({road.at("peak").get<double>(), forecast::parse_status(road.at("status").get<std::string>())});
            reports.push_back(std::move(r));
        } else if (type == "sample") {
            realized.ticks.push_back(e.at("tick").get<std::int64_t>());
            realized.occupancy.push_back(e.at("occupancy").get<std::vector<int>>());
        }
    }
    if (reports.empty()) throw std::invalid_argument("record has no forecast events");
    std::vector<int> caps;
    for (const auto& r : net.roads()) caps.push_back(r.capacity);
    return forecast::accuracy(reports, realized, caps, config.dt, config.forecast.yellow_fraction);
}

}  // namespace hare
