#pragma once

#include <compare>
#include <string>

namespace dsnav {

/// Instant on the simulation's uniform time scale, stored as seconds past
/// the scenario reference epoch. Total ordering, no calendar semantics.
struct Epoch {
    double t = 0.0;  // [s]

    auto operator<=>(const Epoch&) const = default;
};

inline Epoch operator+(Epoch e, double dt_s) { return {e.t + dt_s}; }
inline Epoch operator-(Epoch e, double dt_s) { return {e.t - dt_s}; }
inline double operator-(Epoch a, Epoch b) { return a.t - b.t; }

/// Parse "YYYY-MM-DD[THH:MM:SS[.frac]]" to seconds since 1970-01-01T00:00:00
/// on a proleptic Gregorian calendar with no leap seconds (the simulator's
/// time scale is uniform, only differences matter). Throws ConfigError.
double iso8601_to_seconds(const std::string& text);

}  // namespace dsnav
