#include "dsnav/measurement.hpp"

#include <algorithm>
#include <cmath>

#include "dsnav/errors.hpp"

namespace dsnav {

LosUnitVector los_from_apparent(const Vec3& observer_r, const Vec3& apparent_body_r) {
    const Vec3 d = apparent_body_r - observer_r;
    const double dn = norm(d);
    if (!(dn > 0.0)) throw DegenerateGeometryError("los_from_apparent: observer coincides with body");
    return {d / dn};
}

AzEl az_el_from_los(const LosUnitVector& los) {
    const Vec3& u = los.u;
    const double phi = std::asin(std::clamp(u.z, -1.0, 1.0));
    if (u.x == 0.0 && u.y == 0.0) {
        return {0.0, phi, true};
    }
    double theta = std::atan2(u.y, u.x);
    if (theta == -constants::pi) theta = constants::pi;  // keep theta in (-pi, pi]
    return {theta, phi, false};
}

LosUnitVector los_from_az_el(double theta, double phi) {
    const double cp = std::cos(phi);
    return {{cp * std::cos(theta), cp * std::sin(theta), std::sin(phi)}};
}

namespace {

// Orthonormal transverse pair: cross with the axis least aligned with u.
void transverse_basis(const Vec3& u, Vec3& e1, Vec3& e2) {
    const double ax = std::abs(u.x), ay = std::abs(u.y), az = std::abs(u.z);
    Vec3 a{1.0, 0.0, 0.0};
    if (ay <= ax && ay <= az) {
        a = {0.0, 1.0, 0.0};
    } else if (az <= ax && az <= ay) {
        a = {0.0, 0.0, 1.0};
    }
    e1 = unit(cross(u, a));
    e2 = cross(u, e1);
}

}  // namespace

LosUnitVector perturb_los(const LosUnitVector& los, const NoiseModel& noise, Rng& rng) {
    if (noise.sigma_los_rad <= 0.0) return los;
    Vec3 e1, e2;
    transverse_basis(los.u, e1, e2);
    const double a1 = noise.sigma_los_rad * rng.gaussian();
    const double a2 = noise.sigma_los_rad * rng.gaussian();
    return {unit(los.u + a1 * e1 + a2 * e2)};
}

SynthesizedMeasurement synthesize_measurement(const StateVector& truth_sc, const Body& beacon, Epoch t,
                                              const NoiseModel& noise, Rng& rng, double c) {
    const LightTimeSolution lt = solve_light_time(truth_sc.r, t, beacon, c);
    if (lt.degenerate) throw DegenerateGeometryError("synthesize_measurement: zero range to beacon '" + beacon.id + "'");
    const LosUnitVector los = los_from_apparent(truth_sc.r, lt.apparent.r);
    const AzEl ae = az_el_from_los(perturb_los(los, noise, rng));
    return {{t, beacon.id, ae.theta, ae.phi}, lt.delta_t_s};
}

}  // namespace dsnav
