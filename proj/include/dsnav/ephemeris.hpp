#pragma once

#include <string>

#include "dsnav/constants.hpp"
#include "dsnav/epoch.hpp"
#include "dsnav/vec3.hpp"

namespace dsnav {

/// Heliocentric position/velocity at some epoch.
struct StateVector {
    Vec3 r;  // [km]
    Vec3 v;  // [km/s]

    bool operator==(const StateVector&) const = default;
};

/// Catalogued body on a Sun-only conic: epoch state plus the central GM.
struct Body {
    std::string id;
    Epoch epoch0;
    StateVector state0;
    double mu_central = constants::mu_sun_km3_s2;  // [km^3/s^2]
};

/// Exact two-body propagation by dt seconds (universal-variable formulation,
/// all eccentricities, safeguarded Newton on the universal anomaly).
/// Throws PropagationError on non-convergence.
StateVector kepler_propagate(const StateVector& state0, double dt_s, double mu);

/// Conic state of a catalogued body at epoch t.
StateVector body_state(const Body& body, Epoch t);

struct LightTimeSolution {
    double delta_t_s = 0.0;   // light-time delay from emission to reception
    StateVector apparent;     // body state at the emission epoch t_k - delta_t
    bool degenerate = false;  // observer on top of the body
    int iterations = 0;
};

/// Solve delta_t = ||r_body(t_k - delta_t) - observer_r|| / c by fixed-point
/// iteration from the geometric distance (contraction ~v/c). Converged
/// residual is far below 1e-9 s; throws PropagationError if 20 iterations
/// are exceeded (never expected for Solar-System geometry).
LightTimeSolution solve_light_time(const Vec3& observer_r, Epoch t_k, const Body& body,
                                   double c = constants::c_light_km_s);

}  // namespace dsnav
