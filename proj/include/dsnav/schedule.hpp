#pragma once

#include <string>
#include <vector>

#include "dsnav/epoch.hpp"

namespace dsnav {

enum class SegmentKind { Coast, Slew, Track };

struct ScheduleSegment {
    Epoch t_start;
    Epoch t_end;
    SegmentKind kind = SegmentKind::Coast;
    std::string beacon_id;  // track segments only
    double rate_hz = 0.0;   // track segments only
};

/// Contiguous, non-overlapping, time-ordered tiling of the simulation span.
struct TrackingSchedule {
    std::vector<ScheduleSegment> segments;

    Epoch start() const { return segments.front().t_start; }
    Epoch end() const { return segments.back().t_end; }
    /// Throws ConfigError on gaps, overlaps or bad track segments.
    void validate() const;
};

/// Measurement epochs of a track segment: t_start + k/rate for
/// k = 0..floor(length*rate); the fencepost at t_start is included.
std::vector<Epoch> measurement_epochs(const ScheduleSegment& segment);

/// One-at-a-time beacon campaign. Each beacon owns a `window`-long slot;
/// the first slot of the campaign is tracked end to end, every later slot
/// starts with a `slew` dead time before its track segment. `cycles` repeats
/// the full beacon rotation. Throws ConfigError on an empty beacon list or
/// slew >= window.
TrackingSchedule build_campaign_schedule(Epoch t_nav_start, const std::vector<std::string>& beacons,
                                         double window_s, double slew_s, double rate_hz, int cycles);

std::string phase_tag(const ScheduleSegment& segment);

}  // namespace dsnav
