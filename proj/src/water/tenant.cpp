#include "water/tenant.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hare::water {

Decision simple_decide(const Activity& activity, Tenths price, int available) {
    const double u = activity.value - activity.size * price.as_double();
    if (u > 0.0 && activity.size <= available) return {true, u};
    return {false, 0.0};
}

double estimate_level(std::span<const std::vector<int>> history, int day, int period) {
    if (day < 2) throw std::invalid_argument("level estimate needs at least one finished day");
    if (static_cast<int>(history.size()) < day - 1) throw std::invalid_argument("history shorter than day - 1");
    double sum = 0.0;
    for (int d = 0; d < day - 1; ++d) sum += history[d].at(period - 1);
    return sum / (day - 1);
}

int choose_shift(std::span<const Activity> activities, std::span<const double> level_estimate,
                 std::span<const Tenths> price_estimate) {
    const int periods = static_cast<int>(activities.size());
    int best_shift = 0;
    double best = -1.0;
    for (int t = 0; t < periods; ++t) {
        double total = 0.0;
        for (int tau = 1; tau <= periods; ++tau) {
            const int home = tau - t;
            if (home < 1) continue;
            const auto& a = activities[home - 1];
            if (level_estimate[tau - 1] > a.size)
                total += std::max(0.0, a.value - a.size * price_estimate[tau - 1].as_double());
        }
        if (total > best) {
            best = total;
            best_shift = t;
        }
    }
    return best_shift;
}

std::vector<std::vector<Activity>> generate_activities(const WaterParams& params, SeededRng& rng) {
    const int periods = params.periods();
    const int n = params.tenants * periods;
    std::vector<std::int64_t> raw(n);
    for (auto& s : raw) s = rng.between(params.size_min, params.size_max);
    const std::int64_t raw_total = std::accumulate(raw.begin(), raw.end(), std::int64_t{0});

    // Largest-remainder rounding: the scaled sizes sum exactly to daily_total.
    std::vector<int> sizes(n);
    std::vector<std::pair<std::int64_t, int>> remainders;
    int assigned = 0;
    for (int i = 0; i < n; ++i) {
        const std::int64_t scaled = raw[i] * params.daily_total;
        sizes[i] = static_cast<int>(scaled / raw_total);
        remainders.push_back({scaled % raw_total, i});
        assigned += sizes[i];
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int k = 0; assigned < params.daily_total; ++k, ++assigned) ++sizes[remainders[k % n].second];
    // Sizes must stay positive; borrow from the largest activity.
    for (int i = 0; i < n; ++i) {
        while (sizes[i] < 1) {
            auto big = std::max_element(sizes.begin(), sizes.end());
            --*big;
            ++sizes[i];
        }
    }

    std::vector<std::vector<Activity>> table(params.tenants);
    for (int tenant = 0; tenant < params.tenants; ++tenant) {
        for (int h = 1; h <= periods; ++h) {
            Activity a;
            a.tenant = tenant;
            a.home = h;
            a.window_start = h;
            a.window_end = h + 1;
            a.size = sizes[tenant * periods + (h - 1)];
            a.value = params.value_means[h - 1] * (1.0 + rng.uniform(-params.value_noise, params.value_noise));
            table[tenant].push_back(a);
        }
    }
    return table;
}

std::vector<std::vector<Activity>> table_activities(const WaterParams& params) {
    std::vector<std::vector<Activity>> table(params.tenants, std::vector<Activity>(params.periods()));
    for (const auto& a : *params.table) table[a.tenant][a.home - 1] = a;
    return table;
}

}  // namespace hare::water
