#pragma once

#include <cstdint>
#include <string>

#include "dsnav/ephemeris.hpp"
#include "dsnav/rng.hpp"
#include "dsnav/vec3.hpp"

namespace dsnav {

/// Unit line-of-sight direction (||u|| = 1 within 1e-12).
struct LosUnitVector {
    Vec3 u;
};

/// One azimuth/elevation observation of a beacon.
struct LosMeasurement {
    Epoch epoch;
    std::string beacon_id;
    double theta = 0.0;  // azimuth, (-pi, pi]
    double phi = 0.0;    // elevation, [-pi/2, pi/2]
};

/// Angular LOS noise budget: per-axis 1-sigma, applied in the plane
/// orthogonal to the true direction.
struct NoiseModel {
    double sigma_los_rad = 0.0;
    std::uint64_t seed = 0;
};

struct AzEl {
    double theta = 0.0;
    double phi = 0.0;
    bool degenerate = false;  // polar case, azimuth undefined
};

/// Unit vector from observer toward the apparent body position.
/// Throws DegenerateGeometryError on zero separation.
LosUnitVector los_from_apparent(const Vec3& observer_r, const Vec3& apparent_body_r);

/// theta = four-quadrant azimuth of (u_x, u_y), phi = asin(u_z).
/// At the poles azimuth is undefined: theta = 0 and the degenerate flag set.
AzEl az_el_from_los(const LosUnitVector& los);

/// (cos phi cos theta, cos phi sin theta, sin phi); inverse of az_el_from_los
/// away from the poles.
LosUnitVector los_from_az_el(double theta, double phi);

/// Apply two independent zero-mean small-angle deviations (1-sigma each)
/// along an orthonormal transverse basis, then renormalize. sigma = 0
/// returns the input unchanged.
LosUnitVector perturb_los(const LosUnitVector& los, const NoiseModel& noise, Rng& rng);

struct SynthesizedMeasurement {
    LosMeasurement measurement;
    double true_delta_t_s = 0.0;  // light-time delay of the underlying geometry
};

/// Truth pipeline: light-time solve, apparent LOS, noise, az/el encoding.
SynthesizedMeasurement synthesize_measurement(const StateVector& truth_sc, const Body& beacon, Epoch t,
                                              const NoiseModel& noise, Rng& rng,
                                              double c = constants::c_light_km_s);

}  // namespace dsnav
