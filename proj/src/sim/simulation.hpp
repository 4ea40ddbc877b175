#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "forecast/forecast.hpp"
#include "kernel/clock.hpp"
#include "kernel/config.hpp"
#include "kernel/intervention.hpp"
#include "kernel/rng.hpp"
#include "kernel/run_record.hpp"
#include "regulator/regulator.hpp"
#include "traffic/world.hpp"
#include "water/world.hpp"

namespace hare {

class Policy;

struct SubmitResult {
    bool accepted = false;
    RejectReason reason = RejectReason::None;
    std::string client_tag;
    json account;  // {"balance": ...} for traffic, {"changes_used": n, "max": m} for water
};

/// One running scenario: world, clock, regulator, optional forecaster and
/// scripted policy, and the run record everything is logged to.
///
/// Interventions submitted between two calls to step() are validated and
/// applied immediately, so the next tick's decisions already see them.
class Simulation {
public:
    /// `mode_override` replaces the configured adaptivity (training worlds).
    /// `with_policy` = false disables the scripted policy (replays).
    Simulation(SimConfig config, std::uint64_t seed, std::optional<Adaptivity> mode_override = std::nullopt,
               bool with_policy = true);
    ~Simulation();
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    const SimConfig& config() const { return config_; }
    std::uint64_t seed() const { return seed_; }
    const SimClock& clock() const { return clock_; }
    std::int64_t total_ticks() const { return total_ticks_; }
    bool done() const { return clock_.tick_index >= total_ticks_; }

    /// Resolves a target name ("BC", "B-C", road index, or period "1".."6").
    /// Throws ProtocolError for unknown targets.
    int resolve_target(const std::string& name) const;

    SubmitResult submit(Intervention intervention);
    /// Applies `pending` in order, then advances one tick. Throws
    /// ProtocolError when an intervention names an unknown target.
    std::vector<SubmitResult> step(std::span<const Intervention> pending);
    void step();
    /// Runs to the configured duration and appends the summary event.
    void run_to_end();
    /// Appends the summary event once; later calls are no-ops.
    void finish();

    json metrics() const;
    json account() const;
    /// Everything the console displays, taken from one consistent state.
    json frame(bool include_cars) const;

    const RunRecord& record() const { return record_; }
    RunRecord take_record() { return std::move(record_); }

    traffic::TrafficWorld* traffic() { return traffic_.get(); }
    const traffic::TrafficWorld* traffic() const { return traffic_.get(); }
    water::WaterWorld* water() { return water_.get(); }
    const water::WaterWorld* water() const { return water_.get(); }
    const Regulator& regulator() const { return regulator_; }
    const std::vector<forecast::ForecastReport>& forecasts() const { return reports_; }
    /// Per-day, per-period shed value (water).
    const std::vector<std::vector<double>>& shed_by_period() const { return shed_by_period_; }

private:
    TargetState target_state(const Intervention& iv) const;
    void after_tick();

    SimConfig config_;
    std::uint64_t seed_;
    SimClock clock_;
    std::int64_t total_ticks_;
    std::unique_ptr<traffic::TrafficWorld> traffic_;
    std::unique_ptr<water::WaterWorld> water_;
    Regulator regulator_;
    std::unique_ptr<forecast::ChoiceModel> choices_;
    std::vector<forecast::ForecastReport> reports_;
    std::unique_ptr<Policy> policy_;
    SeededRng policy_rng_;
    std::vector<std::vector<double>> shed_by_period_;
    RunRecord record_;
    bool finished_ = false;
};

/// Record header for a run.
json record_header(const SimConfig& config, std::uint64_t seed);

/// Headless run: no pacing, scripted policy from the config.
RunRecord run_headless(const SimConfig& config, std::uint64_t seed);

struct ReplayReport {
    bool ok = true;
    std::int64_t first_divergent_tick = -1;
    std::size_t samples_compared = 0;
    std::string detail;
};

/// Re-simulates from the record's config and seed, re-injecting its logged
/// interventions at their ticks, and compares every sample event.
ReplayReport replay_check(const RunRecord& record);

/// Logged interventions of a record, in order.
std::vector<Intervention> record_interventions(const RunRecord& record);

/// Compares the sample events of two records in order.
ReplayReport compare_samples(const RunRecord& expected, const RunRecord& produced);

/// Forecast accuracy recomputed from a record's forecast and sample events.
forecast::AccuracyResult record_accuracy(const RunRecord& record);

}  // namespace hare
