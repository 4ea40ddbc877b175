#pragma once

#include <compare>
#include <cstdint>
#include <cstdlib>

namespace hare {

// Integer money on a fixed grid. Tag selects the grid; Scale is units per
// currency unit.
template <typename Tag, std::int64_t Scale>
struct Money {
    std::int64_t units = 0;

    static constexpr std::int64_t kScale = Scale;

    static constexpr Money from_double(double amount) {
        return Money{static_cast<std::int64_t>(amount * Scale + (amount >= 0 ? 0.5 : -0.5))};
    }
    constexpr double as_double() const { return static_cast<double>(units) / Scale; }
    constexpr Money abs() const { return Money{units < 0 ? -units : units}; }

    friend constexpr Money operator+(Money a, Money b) { return {a.units + b.units}; }
    friend constexpr Money operator-(Money a, Money b) { return {a.units - b.units}; }
    constexpr Money& operator+=(Money o) { units += o.units; return *this; }
    constexpr Money& operator-=(Money o) { units -= o.units; return *this; }
    friend constexpr auto operator<=>(Money, Money) = default;
};

struct CentsTag {};
struct MillsTag {};
struct TenthsTag {};

using Cents = Money<CentsTag, 100>;    // tolls
using Mills = Money<MillsTag, 1000>;   // toll-change budget (accrues 7 mills/s)
using Tenths = Money<TenthsTag, 10>;   // water prices

constexpr Mills to_mills(Cents c) { return Mills{c.units * 10}; }

}  // namespace hare
