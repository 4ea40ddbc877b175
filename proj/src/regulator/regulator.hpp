#pragma once

#include <cstdint>
#include <vector>

#include "kernel/clock.hpp"
#include "kernel/config.hpp"
#include "kernel/intervention.hpp"
#include "kernel/money.hpp"

namespace hare {

struct Verdict {
    bool accepted = false;
    RejectReason reason = RejectReason::None;

    static Verdict accept() { return {true, RejectReason::None}; }
    static Verdict reject(RejectReason r) { return {false, r}; }
};

/// Grid position of the intervention's target before the change, and the
/// inclusive bounds it must stay within (cents for tolls, tenths for prices).
struct TargetState {
    std::int64_t current = 0;
    std::int64_t min = 0;
    std::int64_t max = 0;
};

struct AppliedIntervention {
    Intervention intervention;
    double elapsed = 0.0;  // simulated seconds (traffic) or periods (water)
};

struct InterventionRate {
    double per_second = 0.0;
    std::int64_t count = 0;
    std::int64_t total_abs_delta = 0;  // grid units
};

/// Enforces regulatory power: none forbids everything; limited traffic
/// spends a budget that accrues linearly in simulated time; limited water
/// allows a few single-increment changes per day; unlimited only checks
/// bounds.
class Regulator {
public:
    explicit Regulator(const SimConfig& config);

    PowerLevel power() const { return power_; }

    Verdict validate(const Intervention& intervention, const TargetState& target, const SimClock& clock) const;
    /// Must only be called after validate() accepted the intervention.
    void apply(const Intervention& intervention, const SimClock& clock);

    /// Initial fund plus accrual up to `clock`, minus every |delta| spent.
    Mills balance(const SimClock& clock) const;
    Mills accrued(const SimClock& clock) const;
    int changes_used_today(const SimClock& clock) const;
    int max_daily_changes() const { return max_daily_changes_; }

    const std::vector<AppliedIntervention>& history() const { return history_; }

private:
    std::int64_t day_of(const SimClock& clock) const;

    Scenario scenario_;
    PowerLevel power_;
    Mills initial_{};
    double rate_mills_per_second_ = 0.0;
    Mills spent_{};
    std::int64_t increment_ = 1;  // grid units per click
    int max_daily_changes_ = 3;
    int periods_per_day_ = 6;
    std::int64_t quota_day_ = -1;
    int quota_used_ = 0;
    std::vector<AppliedIntervention> history_;
};

/// Applied interventions per unit time in [start, end).
InterventionRate interventions_per_second(const std::vector<AppliedIntervention>& history, double start, double end);

}  // namespace hare
