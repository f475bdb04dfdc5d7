#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "dsnav/ephemeris.hpp"
#include "dsnav/mat.hpp"
#include "dsnav/measurement.hpp"

namespace dsnav {

/// Piecewise-constant low-thrust acceleration profile. Empty = pure coast.
struct ThrustArc {
    Epoch t_start;
    Epoch t_end;
    Vec3 accel_km_s2;
};

struct ThrustProfile {
    std::vector<ThrustArc> arcs;

    /// Throws ConfigError if arcs overlap or are out of order.
    void validate() const;
    Vec3 accel_at(Epoch t) const;
};

/// Augmented estimate [r (km), v (km/s), dt_1..dt_n (s)] with covariance.
struct FilterState {
    std::vector<double> x;  // 6+n
    Mat P;                  // (6+n)^2
    Epoch t;

    std::size_t beacon_count() const { return x.size() - 6; }
};

struct FilterSettings {
    double sigma_r_km = 1e5;
    double sigma_v_km_s = 1e-1;
    double sigma_dt_s = 1e5 / constants::c_light_km_s;
    Mat Q;  // (6+n)^2 continuous-time process-noise density
    Mat R;  // 2x2 measurement covariance [rad^2]
    double step_coast_s = 60.0;   // Riccati step outside tracking windows
    bool check_health = true;     // per-step covariance symmetry/PSD guard
    double pos_bound_km = 1000.0;     // convergence/summary thresholds
    double vel_bound_km_s = 2e-3;
};

/// Everything the filter's process/measurement functions need besides the
/// state: the beacon catalog (order fixes the delta-t slots), thrust, GM, c.
struct EkfModel {
    std::vector<Body> beacons;
    ThrustProfile thrust;
    double mu = constants::mu_sun_km3_s2;
    double c = constants::c_light_km_s;
    double min_radius_km = 0.05 * constants::au_km;  // singularity guard
};

/// State derivative [v, a, dt_rates]: Sun point-mass gravity (+ thrust), and
/// per-beacon delay rates (v_i(t - dt_i) - v)^T rho_hat_i / c with rho_hat_i
/// recomputed from the current estimate.
std::vector<double> dynamics(const EkfModel& model, std::span<const double> x, Epoch t);

/// Analytic Jacobian of dynamics(); every block validated against central
/// finite differences in the test suite.
Mat state_jacobian(const EkfModel& model, std::span<const double> x, Epoch t);

/// Predicted (theta, phi) for one beacon, using the estimated delay from x
/// rather than a fresh light-time solve.
std::array<double, 2> measurement_model(const EkfModel& model, std::span<const double> x, Epoch t,
                                        std::size_t beacon_index);

/// 2 x (6+n) measurement Jacobian: nonzero only in the position block and
/// the tracked beacon's delay column.
Mat measurement_jacobian(const EkfModel& model, std::span<const double> x, Epoch t, std::size_t beacon_index);

/// Generic continuous-discrete pieces, also used by the tests to plug in
/// stub dynamics and toy measurement geometries.
struct OdeModel {
    std::function<std::vector<double>(std::span<const double>, Epoch)> f;
    std::function<Mat(std::span<const double>, Epoch)> jacobian;
};

/// Joint fixed-step RK4 of the state and the covariance ODE
/// P' = F P + P F^T + Q over [fs.t, t_to], sub-stepped at <= max_step_s.
/// Covariance is re-symmetrized each step; with check_health the PSD guard
/// throws NumericalHealthError instead of letting a run silently rot.
void propagate_core(const OdeModel& ode, FilterState& fs, Epoch t_to, const Mat& Q, double max_step_s,
                    bool check_health);

/// Kalman measurement update x += K nu, P = (I - K H) P for an arbitrary
/// measurement dimension. Throws UpdateSkipError if the innovation
/// covariance cannot be factorized.
void update_core(FilterState& fs, const std::vector<double>& innovation, const Mat& H, const Mat& R,
                 bool check_health);

/// propagate_core bound to the deep-space model.
FilterState propagate(const EkfModel& model, const FilterState& fs, Epoch t_to, const Mat& Q, double max_step_s,
                      bool check_health = true);

/// update_core bound to one az/el measurement; the azimuth innovation is
/// wrapped across the +-pi seam.
FilterState update(const EkfModel& model, const FilterState& fs, const LosMeasurement& y, const Mat& R,
                   bool check_health = true);

}  // namespace dsnav
