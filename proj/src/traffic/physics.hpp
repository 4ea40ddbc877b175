#pragma once

#include <cmath>

namespace hare::traffic {

/// Speed on a road holding `cars` cars: S * (sigma + 0.1) / 1.1 with
/// sigma = 1 / (1 + exp(0.25 (N - C))). Free flow equals S; the crawl floor is
/// S / 11. Requires capacity >= 1, cars >= 0, max_speed > 0.
double road_speed(double cars, double capacity, double max_speed);

/// Same formula for any real type (extended precision in tests). In double the
/// sigmoid term underflows below the floor's resolution far past capacity, so
/// the double version is only non-increasing there.
template <typename Real>
Real road_speed_as(const Real& cars, const Real& capacity, const Real& max_speed) {
    using std::exp;
    const Real sigma = Real(1.0) / (Real(1.0) + exp(Real(0.25) * (cars - capacity)));
    return max_speed * (sigma + Real(0.1)) / Real(1.1);
}

/// Cars per unit time leaving a road with `cars` on it.
double road_flow(double cars, double capacity, double max_speed, double length);

}  // namespace hare::traffic
