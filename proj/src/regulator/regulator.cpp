#include "regulator/regulator.hpp"

#include <cmath>
#include <stdexcept>

namespace hare {

Regulator::Regulator(const SimConfig& config)
    : scenario_(config.scenario),
      power_(config.power),
      initial_(Mills::from_double(config.traffic.budget_initial)),
      rate_mills_per_second_(config.traffic.budget_rate * 1000.0),
      max_daily_changes_(config.water.max_daily_changes),
      periods_per_day_(config.water.periods()) {
    if (scenario_ == Scenario::Traffic)
        increment_ = Cents::from_double(config.traffic.toll_increment).units;
    else
        increment_ = Tenths::from_double(config.water.price_increment).units;
}

std::int64_t Regulator::day_of(const SimClock& clock) const { return clock.tick_index / periods_per_day_; }

Mills Regulator::accrued(const SimClock& clock) const {
    // Rounded down to the mill; the epsilon absorbs tick * dt representation error.
    return Mills{static_cast<std::int64_t>(std::floor(rate_mills_per_second_ * clock.elapsed() + 1e-6))};
}

Mills Regulator::balance(const SimClock& clock) const { return initial_ + accrued(clock) - spent_; }

int Regulator::changes_used_today(const SimClock& clock) const {
    return day_of(clock) == quota_day_ ? quota_used_ : 0;
}

Verdict Regulator::validate(const Intervention& iv, const TargetState& target, const SimClock& clock) const {
    if (power_ == PowerLevel::None) return Verdict::reject(RejectReason::Power);
    if (iv.delta == 0) return Verdict::reject(RejectReason::Increment);
    if (scenario_ == Scenario::Traffic && iv.delta % increment_ != 0) return Verdict::reject(RejectReason::Increment);
    const std::int64_t next = target.current + iv.delta;
    if (next < target.min || next > target.max) return Verdict::reject(RejectReason::Bounds);
    if (power_ == PowerLevel::Unlimited) return Verdict::accept();

    if (scenario_ == Scenario::Traffic) {
        const Mills cost = to_mills(Cents{iv.delta}).abs();
        if (cost > balance(clock)) return Verdict::reject(RejectReason::Budget);
        return Verdict::accept();
    }
    if (changes_used_today(clock) >= max_daily_changes_) return Verdict::reject(RejectReason::Quota);
    if (std::llabs(iv.delta) != increment_) return Verdict::reject(RejectReason::Increment);
    return Verdict::accept();
}

void Regulator::apply(const Intervention& iv, const SimClock& clock) {
    if (scenario_ == Scenario::Traffic) {
        if (power_ == PowerLevel::Limited) spent_ += to_mills(Cents{iv.delta}).abs();
    } else if (power_ == PowerLevel::Limited) {
        const auto day = day_of(clock);
        if (day != quota_day_) {
            quota_day_ = day;
            quota_used_ = 0;
        }
        ++quota_used_;
    }
    history_.push_back({iv, clock.elapsed()});
}

InterventionRate interventions_per_second(const std::vector<AppliedIntervention>& history, double start, double end) {
    if (!(end > start)) throw std::invalid_argument("window must have positive length");
    InterventionRate rate;
    for (const auto& h : history) {
        if (h.elapsed < start || h.elapsed >= end) continue;
        ++rate.count;
        rate.total_abs_delta += std::llabs(h.intervention.delta);
    }
    rate.per_second = static_cast<double>(rate.count) / (end - start);
    return rate;
}

}  // namespace hare
