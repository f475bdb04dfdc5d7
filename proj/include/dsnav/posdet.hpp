#pragma once

#include <optional>
#include <vector>

#include "dsnav/ephemeris.hpp"
#include "dsnav/measurement.hpp"
#include "dsnav/vec3.hpp"

namespace dsnav {

/// Snapshot position-fix problem: one epoch, n apparent LOS directions to
/// catalogued beacons. Unknowns are the observer position and the n
/// light-time delays.
struct PosDetObservation {
    Body beacon;
    LosUnitVector rho_hat;
};

struct PosDetProblem {
    Epoch t_k;
    std::vector<PosDetObservation> observations;
    double c = constants::c_light_km_s;
};

struct PosDetSolution {
    Vec3 r;                       // [km]
    std::vector<double> delta_t;  // [s], one per observation
    double cost = 0.0;            // [km^2]
    int iterations = 0;
    bool converged = false;
    bool well_posed = true;    // n >= 3
    double grad_norm = 0.0;    // scaled-unit gradient norm at exit
};

struct PosDetGuess {
    Vec3 r;
    std::vector<double> delta_t;
};

struct PosDetOptions {
    double step_tol_r_km = 1e-6;
    double step_tol_dt_s = 1e-9;
    double grad_tol = 1e-8;  // scaled units (km and c*s blocks)
    int max_iterations = 50;
};

/// Per-beacon residual: r - [r_i(t_k - dt) - c dt rho_hat].
Vec3 residual(const Vec3& r, double delta_t_s, const LosUnitVector& rho_hat, const Body& beacon, Epoch t_k,
              double c = constants::c_light_km_s);

/// Sum of squared residual norms [km^2].
double cost(const PosDetProblem& problem, const Vec3& r, const std::vector<double>& delta_t);

/// Analytic gradient, length 3+n: d/dr = 2 sum eps_i,
/// d/d(dt_i) = 2 [v_i(t_k - dt_i) + c rho_hat_i]^T eps_i.
std::vector<double> cost_gradient(const PosDetProblem& problem, const Vec3& r, const std::vector<double>& delta_t);

/// Scale-correct starting point: beacon centroid direction pushed to 1 au,
/// delays from the geometric ranges.
PosDetGuess default_guess(const PosDetProblem& problem);

/// Damped Gauss-Newton on the stacked residual, unknowns scaled to km and
/// c*s. Throws UnderDeterminedError for n < 2 and RankDeficiencyError when
/// the normal matrix stays singular under damping; a run that merely hits
/// the iteration cap comes back with converged = false.
PosDetSolution solve_position(const PosDetProblem& problem, const std::optional<PosDetGuess>& initial = {},
                              const PosDetOptions& options = {});

}  // namespace dsnav
