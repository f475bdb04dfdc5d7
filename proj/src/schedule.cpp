#include "dsnav/schedule.hpp"

#include <cmath>

#include "dsnav/errors.hpp"

namespace dsnav {

void TrackingSchedule::validate() const {
    if (segments.empty()) throw ConfigError("schedule: no segments");
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& s = segments[i];
        if (!(s.t_end > s.t_start))
            throw ConfigError("schedule: segment " + std::to_string(i) + " has non-positive duration");
        if (i > 0 && segments[i - 1].t_end.t != s.t_start.t)
            throw ConfigError("schedule: gap or overlap between segments " + std::to_string(i - 1) + " and " +
                              std::to_string(i));
        if (s.kind == SegmentKind::Track) {
            if (!(s.rate_hz > 0.0))
                throw ConfigError("schedule: track segment " + std::to_string(i) + " has non-positive rate");
            if (s.beacon_id.empty())
                throw ConfigError("schedule: track segment " + std::to_string(i) + " has no beacon");
        }
    }
}

std::vector<Epoch> measurement_epochs(const ScheduleSegment& segment) {
    std::vector<Epoch> epochs;
    if (segment.kind != SegmentKind::Track) return epochs;
    const double period = 1.0 / segment.rate_hz;
    const double length = segment.t_end - segment.t_start;
    const auto count = static_cast<long>(std::floor(length * segment.rate_hz + 1e-9)) + 1;
    epochs.reserve(count);
    for (long k = 0; k < count; ++k) epochs.push_back(segment.t_start + k * period);
    return epochs;
}

TrackingSchedule build_campaign_schedule(Epoch t_nav_start, const std::vector<std::string>& beacons,
                                         double window_s, double slew_s, double rate_hz, int cycles) {
    if (beacons.empty()) throw ConfigError("campaign schedule: no beacons");
    if (!(window_s > 0.0) || !(slew_s > 0.0)) throw ConfigError("campaign schedule: window and slew must be positive");
    if (!(slew_s < window_s)) throw ConfigError("campaign schedule: slew must be shorter than the beacon window");
    if (cycles < 1) throw ConfigError("campaign schedule: cycles must be >= 1");

    TrackingSchedule schedule;
    Epoch t = t_nav_start;
    bool first = true;
    for (int cycle = 0; cycle < cycles; ++cycle) {
        for (const auto& beacon : beacons) {
            const Epoch slot_end = t + window_s;
            if (!first) {
                schedule.segments.push_back({t, t + slew_s, SegmentKind::Slew, {}, 0.0});
                t = t + slew_s;
            }
            schedule.segments.push_back({t, slot_end, SegmentKind::Track, beacon, rate_hz});
            t = slot_end;
            first = false;
        }
    }
    // Single beacon, single cycle: one track segment and no slews.
    schedule.validate();
    return schedule;
}

std::string phase_tag(const ScheduleSegment& segment) {
    switch (segment.kind) {
        case SegmentKind::Coast:
            return "coast";
        case SegmentKind::Slew:
            return "slew";
        case SegmentKind::Track:
            return "track:" + segment.beacon_id;
    }
    return "coast";
}

}  // namespace dsnav
