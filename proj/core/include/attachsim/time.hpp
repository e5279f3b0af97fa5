#pragma once

#include <cmath>
#include <compare>
#include <cstdint>

namespace attachsim {

// Simulation time is kept in integer microseconds so that per-step latencies
// telescope exactly to the record span. Milliseconds are the external unit.
class Duration {
public:
  constexpr Duration() = default;

  static constexpr Duration from_us(std::int64_t us) { return Duration{us}; }
  static Duration from_ms(double ms) { return Duration{std::llround(ms * 1000.0)}; }

  constexpr std::int64_t us() const { return us_; }
  constexpr double ms() const { return static_cast<double>(us_) / 1000.0; }

  constexpr Duration operator+(Duration o) const { return Duration{us_ + o.us_}; }
  constexpr Duration operator-(Duration o) const { return Duration{us_ - o.us_}; }
  constexpr Duration& operator+=(Duration o) { us_ += o.us_; return *this; }
  constexpr auto operator<=>(const Duration&) const = default;

private:
  constexpr explicit Duration(std::int64_t us) : us_(us) {}
  std::int64_t us_ = 0;
};

class SimTime {
public:
  constexpr SimTime() = default;

  static constexpr SimTime from_us(std::int64_t us) { return SimTime{us}; }
  static SimTime from_ms(double ms) { return SimTime{std::llround(ms * 1000.0)}; }

  constexpr std::int64_t us() const { return us_; }
  constexpr double ms() const { return static_cast<double>(us_) / 1000.0; }

  constexpr SimTime operator+(Duration d) const { return SimTime{us_ + d.us()}; }
  constexpr SimTime operator-(Duration d) const { return SimTime{us_ - d.us()}; }
  constexpr Duration operator-(SimTime o) const { return Duration::from_us(us_ - o.us_); }
  constexpr auto operator<=>(const SimTime&) const = default;

private:
  constexpr explicit SimTime(std::int64_t us) : us_(us) {}
  std::int64_t us_ = 0;
};

}  // namespace attachsim
