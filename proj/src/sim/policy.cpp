#include "sim/policy.hpp"

#include <stdexcept>

#include "sim/simulation.hpp"

namespace hare {

namespace {

std::int64_t toll_step(const Simulation& sim) { return Cents::from_double(sim.config().traffic.toll_increment).units; }
std::int64_t price_step(const Simulation& sim) { return Tenths::from_double(sim.config().water.price_increment).units; }

Intervention make(const Simulation& sim, InterventionKind kind, int target, std::int64_t delta) {
    Intervention iv;
    iv.kind = kind;
    iv.target = target;
    iv.delta = delta;
    iv.issued_tick = sim.clock().tick_index;
    iv.source = InterventionSource::ScriptedPolicy;
    return iv;
}

/// One random single-increment change per activation, direction flipped at a bound.
class RandomWalk final : public Policy {
public:
    void act(Simulation& sim, SeededRng& rng) override {
        if (auto* t = sim.traffic()) {
            const auto& net = t->network();
            const int road = static_cast<int>(rng.below(static_cast<std::uint64_t>(net.road_count())));
            const auto step = toll_step(sim);
            std::int64_t delta = rng.uniform01() < 0.5 ? -step : step;
            const auto toll = net.road(road).toll.units;
            if (toll + delta < 0 || toll + delta > 99) delta = -delta;
            sim.submit(make(sim, InterventionKind::TollChange, road, delta));
        } else if (auto* w = sim.water()) {
            const int period = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(w->periods())));
            const auto step = price_step(sim);
            std::int64_t delta = rng.uniform01() < 0.5 ? -step : step;
            const auto price = w->prices()[period - 1].units;
            if (price + delta < w->price_floor().units || price + delta > w->price_ceiling().units) delta = -delta;
            sim.submit(make(sim, InterventionKind::PriceChange, period, delta));
        }
    }
};

/// Raises the toll on the most over-capacity road and lowers it on the least
/// loaded alternative leaving the same node.
class GreedyCongestion final : public Policy {
public:
    void act(Simulation& sim, SeededRng&) override {
        auto* t = sim.traffic();
        if (!t) return;
        const auto& net = t->network();
        int worst = -1;
        double worst_ratio = 1.0;
        for (const auto& r : net.roads()) {
            const double ratio = static_cast<double>(r.occupancy) / r.capacity;
            if (ratio > worst_ratio) {
                worst_ratio = ratio;
                worst = r.id;
            }
        }
        if (worst < 0) return;
        const auto step = toll_step(sim);
        if (net.road(worst).toll.units + step <= 99)
            sim.submit(make(sim, InterventionKind::TollChange, worst, step));
        int alt = -1;
        double alt_ratio = 0.0;
        for (int id : net.out_roads(net.road(worst).from)) {
            if (id == worst) continue;
            const auto& r = net.road(id);
            const double ratio = static_cast<double>(r.occupancy) / r.capacity;
            if (alt < 0 || ratio < alt_ratio) {
                alt = id;
                alt_ratio = ratio;
            }
        }
        if (alt >= 0 && net.road(alt).toll.units - step >= 0)
            sim.submit(make(sim, InterventionKind::TollChange, alt, -step));
    }
};

/// Raises the price of yesterday's most shed period and lowers the least shed one.
class PeakPricing final : public Policy {
public:
    void act(Simulation& sim, SeededRng&) override {
        auto* w = sim.water();
        if (!w) return;
        const auto& shed = sim.shed_by_period();
        const int periods = w->periods();
        const int day_index = static_cast<int>(sim.clock().tick_index / periods);
        if (day_index < 1 || static_cast<int>(shed.size()) < day_index) return;
        const auto& yesterday = shed[day_index - 1];
        int hi = 0, lo = 0;
        for (int h = 1; h < periods; ++h) {
            if (yesterday[h] > yesterday[hi]) hi = h;
            if (yesterday[h] < yesterday[lo]) lo = h;
        }
        if (hi == lo) return;
        const auto step = price_step(sim);
        if (w->prices()[hi].units + step <= w->price_ceiling().units)
            sim.submit(make(sim, InterventionKind::PriceChange, hi + 1, step));
        if (w->prices()[lo].units - step >= w->price_floor().units)
            sim.submit(make(sim, InterventionKind::PriceChange, lo + 1, -step));
    }
};

}  // namespace

std::unique_ptr<Policy> make_policy(const std::string& name) {
    if (name == "none") return nullptr;
    if (name == "random-walk") return std::make_unique<RandomWalk>();
    if (name == "greedy-congestion") return std::make_unique<GreedyCongestion>();
    if (name == "peak-pricing") return std::make_unique<PeakPricing>();
    throw std::invalid_argument("unknown policy " + name);
}

}  // namespace hare
