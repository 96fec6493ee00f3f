#pragma once

#include <compare>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

namespace mobisim {

/// Fixed-point simulation time with microsecond resolution.
///
/// Used both for instants and for durations. Arithmetic is exact integer
/// arithmetic so timestamps compare exactly across platforms.
class SimTime {
public:
    using rep = std::int64_t;

    constexpr SimTime() = default;

    static constexpr SimTime from_us(rep us) { return SimTime{us}; }
    static constexpr SimTime from_ms(rep ms) { return SimTime{ms * 1000}; }
    static SimTime from_seconds(double s) { return SimTime{static_cast<rep>(std::llround(s * 1e6))}; }

    constexpr rep us() const { return us_; }
    constexpr double seconds() const { return static_cast<double>(us_) * 1e-6; }
    constexpr double ms() const { return static_cast<double>(us_) * 1e-3; }

    constexpr auto operator<=>(const SimTime&) const = default;

    constexpr SimTime& operator+=(SimTime o) { us_ += o.us_; return *this; }
    constexpr SimTime& operator-=(SimTime o) { us_ -= o.us_; return *this; }
    friend constexpr SimTime operator+(SimTime a, SimTime b) { return SimTime{a.us_ + b.us_}; }
    friend constexpr SimTime operator-(SimTime a, SimTime b) { return SimTime{a.us_ - b.us_}; }
    friend constexpr SimTime operator*(SimTime a, rep k) { return SimTime{a.us_ * k}; }
    friend constexpr SimTime operator*(rep k, SimTime a) { return SimTime{a.us_ * k}; }

    static constexpr SimTime zero() { return SimTime{0}; }
    static constexpr SimTime max() { return SimTime{INT64_MAX}; }

private:
    constexpr explicit SimTime(rep us) : us_(us) {}
    rep us_ = 0;
};

/// Milliseconds with three decimals, the format used by every CSV/trace column named `*_ms`.
std::string format_ms(SimTime t);
/// Inverse of format_ms; accepts up to three decimals. Throws std::invalid_argument.
SimTime parse_ms(std::string_view text);

namespace literals {
constexpr SimTime operator""_s(unsigned long long v) { return SimTime::from_us(static_cast<SimTime::rep>(v) * 1'000'000); }
constexpr SimTime operator""_ms(unsigned long long v) { return SimTime::from_us(static_cast<SimTime::rep>(v) * 1000); }
constexpr SimTime operator""_us(unsigned long long v) { return SimTime::from_us(static_cast<SimTime::rep>(v)); }
}  // namespace literals

}  // namespace mobisim
