#include "dsnav/ekf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dsnav/errors.hpp"
#include "dsnav/kernels.hpp"

namespace dsnav {

void ThrustProfile::validate() const {
    for (std::size_t i = 0; i < arcs.size(); ++i) {
        if (!(arcs[i].t_end > arcs[i].t_start))
            throw ConfigError("thrust arc " + std::to_string(i) + " has non-positive duration");
        if (i > 0 && arcs[i].t_start < arcs[i - 1].t_end)
            throw ConfigError("thrust arcs overlap or are out of order at arc " + std::to_string(i));
    }
}

Vec3 ThrustProfile::accel_at(Epoch t) const {
    for (const auto& arc : arcs) {
        if (t >= arc.t_start && t < arc.t_end) return arc.accel_km_s2;
    }
    return {};
}

namespace {

Vec3 position_of(std::span<const double> x) { return {x[0], x[1], x[2]}; }
Vec3 velocity_of(std::span<const double> x) { return {x[3], x[4], x[5]}; }

void check_state(const EkfModel& model, std::span<const double> x) {
    const double rn = norm(position_of(x));
    if (rn < model.min_radius_km)
        throw PropagationError("ekf dynamics: heliocentric radius " + std::to_string(rn) +
                               " km inside the singularity guard");
}

struct BeaconGeometry {
    StateVector emit;  // beacon state at t - dt
    Vec3 d;            // emit.r - r
    double dn;
    Vec3 u;            // unit(d)
};

BeaconGeometry beacon_geometry(const EkfModel& model, std::span<const double> x, Epoch t, std::size_t i) {
    const double dt = x[6 + i];
    BeaconGeometry g;
    g.emit = body_state(model.beacons[i], t - dt);
    g.d = g.emit.r - position_of(x);
    g.dn = norm(g.d);
    if (!(g.dn > 0.0))
        throw DegenerateGeometryError("ekf: estimate coincides with beacon '" + model.beacons[i].id + "'");
    g.u = g.d / g.dn;
    return g;
}

}  // namespace

std::vector<double> dynamics(const EkfModel& model, std::span<const double> x, Epoch t) {
    check_state(model, x);
    const std::size_t n = x.size() - 6;
    const Vec3 r = position_of(x);
    const Vec3 v = velocity_of(x);
    const double rn = norm(r);
    const Vec3 a = (-model.mu / (rn * rn * rn)) * r + model.thrust.accel_at(t);

    std::vector<double> f(x.size());
    f[0] = v.x;
    f[1] = v.y;
    f[2] = v.z;
    f[3] = a.x;
    f[4] = a.y;
    f[5] = a.z;
    for (std::size_t i = 0; i < n; ++i) {
        const BeaconGeometry g = beacon_geometry(model, x, t, i);
        f[6 + i] = dot(g.emit.v - v, g.u) / model.c;
    }
    return f;
}

Mat state_jacobian(const EkfModel& model, std::span<const double> x, Epoch t) {
    check_state(model, x);
    const std::size_t n = x.size() - 6;
    const Vec3 r = position_of(x);
    const Vec3 v = velocity_of(x);
    const double rn = norm(r);
    const double rn3 = rn * rn * rn;
    const double rn5 = rn3 * rn * rn;

    Mat F(6 + n, 6 + n);
    F(0, 3) = F(1, 4) = F(2, 5) = 1.0;

    // Point-mass gravity gradient: -mu (I/r^3 - 3 r r^T / r^5).
    const double rc[3] = {r.x, r.y, r.z};
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            const double kron = i == j ? 1.0 : 0.0;
            F(3 + i, j) = -model.mu * (kron / rn3 - 3.0 * rc[i] * rc[j] / rn5);
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        const BeaconGeometry g = beacon_geometry(model, x, t, i);
        const Vec3 w = g.emit.v - v;
        const double w_dot_u = dot(w, g.u);
        // Transverse part of w: w - (w.u) u = w (I - u u^T).
        const Vec3 wt = w - w_dot_u * g.u;

        // d(dt_rate)/dr = -(w^T (I - u u^T)) / (c |d|)
        F(6 + i, 0) = -wt.x / (model.c * g.dn);
        F(6 + i, 1) = -wt.y / (model.c * g.dn);
        F(6 + i, 2) = -wt.z / (model.c * g.dn);
        // d(dt_rate)/dv = -u^T / c
        F(6 + i, 3) = -g.u.x / model.c;
        F(6 + i, 4) = -g.u.y / model.c;
        F(6 + i, 5) = -g.u.z / model.c;
        // d(dt_rate)/d(dt_i): emission state recedes along the beacon orbit.
        const double en = norm(g.emit.r);
        const Vec3 a_i = (-model.mu / (en * en * en)) * g.emit.r;
        const Vec3 vi_t = g.emit.v - dot(g.emit.v, g.u) * g.u;  // (I - u u^T) v_i
        F(6 + i, 6 + i) = (-dot(a_i, g.u) - dot(wt, vi_t) / g.dn) / model.c;
    }
    return F;
}

std::array<double, 2> measurement_model(const EkfModel& model, std::span<const double> x, Epoch t,
                                        std::size_t beacon_index) {
    const BeaconGeometry g = beacon_geometry(model, x, t, beacon_index);
    const AzEl ae = az_el_from_los({g.u});
    return {ae.theta, ae.phi};
}

Mat measurement_jacobian(const EkfModel& model, std::span<const double> x, Epoch t, std::size_t beacon_index) {
    const std::size_t n = x.size() - 6;
    const BeaconGeometry g = beacon_geometry(model, x, t, beacon_index);
    const Vec3& u = g.u;

    const double uxy2 = u.x * u.x + u.y * u.y;
    if (uxy2 <= 0.0) throw DegenerateGeometryError("measurement_jacobian: polar line of sight, azimuth undefined");
    const double cos_phi = std::sqrt(uxy2);  // sqrt(1 - uz^2) on the unit sphere

    // Gradients of theta and phi with respect to the unit direction, already
    // projected onto the tangent plane of the sphere.
    const Vec3 q_theta = Vec3{-u.y, u.x, 0.0} / uxy2;
    const Vec3 q_phi = Vec3{-u.z * u.x, -u.z * u.y, uxy2} / cos_phi;

    // d = r_i(t - dt_i) - r, so d(d)/dr = -I and d(d)/d(dt_i) = -v_i.
    Mat H(2, 6 + n);
    H(0, 0) = -q_theta.x / g.dn;
    H(0, 1) = -q_theta.y / g.dn;
    H(0, 2) = -q_theta.z / g.dn;
    H(1, 0) = -q_phi.x / g.dn;
    H(1, 1) = -q_phi.y / g.dn;
    H(1, 2) = -q_phi.z / g.dn;
    H(0, 6 + beacon_index) = -dot(q_theta, g.emit.v) / g.dn;
    H(1, 6 + beacon_index) = -dot(q_phi, g.emit.v) / g.dn;
    return H;
}

namespace {

void health_check(const Mat& p, const char* where) {
    const double tr = trace(p);
    if (!std::isfinite(tr)) throw NumericalHealthError(std::string(where) + ": covariance trace not finite");
    Mat shifted = p;
    const double shift = 1e-9 * std::max(tr, 0.0) + 1e-30;
    for (std::size_t i = 0; i < shifted.rows(); ++i) shifted(i, i) += shift;
    Mat lower;
    if (!cholesky(shifted, lower))
        throw NumericalHealthError(std::string(where) + ": covariance lost positive semi-definiteness");
}

// P' = F P + P F^T + Q evaluated as M + M^T + Q with M = F P.
Mat riccati_rhs(const Mat& f, const Mat& p, const Mat& q) {
    Mat m = f * p;
    Mat rhs = q;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) rhs(i, j) += m(i, j) + m(j, i);
    return rhs;
}

}  // namespace

void propagate_core(const OdeModel& ode, FilterState& fs, Epoch t_to, const Mat& Q, double max_step_s,
                    bool check_health) {
    if (t_to < fs.t) throw Error("propagate_core: target epoch precedes state epoch");
    const double span = t_to - fs.t;
    if (span == 0.0) return;
    const int steps = std::max(1, static_cast<int>(std::ceil(span / max_step_s - 1e-12)));
    const double h = span / steps;

    const std::size_t dim = fs.x.size();
    std::vector<double> x2(dim), x3(dim), x4(dim), xn(dim);
    const auto& kop = kernels::ops();

    for (int s = 0; s < steps; ++s) {
        const Epoch t0 = fs.t;
        const Epoch tm = t0 + 0.5 * h;
        const Epoch t1 = t0 + h;

        const std::vector<double> k1 = ode.f(fs.x, t0);
        const Mat k1p = riccati_rhs(ode.jacobian(fs.x, t0), fs.P, Q);

        x2 = fs.x;
        kop.axpy(0.5 * h, k1.data(), x2.data(), dim);
        Mat p2 = fs.P;
        kop.axpy(0.5 * h, k1p.data(), p2.data(), p2.size());
        const std::vector<double> k2 = ode.f(x2, tm);
        const Mat k2p = riccati_rhs(ode.jacobian(x2, tm), p2, Q);

        x3 = fs.x;
        kop.axpy(0.5 * h, k2.data(), x3.data(), dim);
        Mat p3 = fs.P;
        kop.axpy(0.5 * h, k2p.data(), p3.data(), p3.size());
        const std::vector<double> k3 = ode.f(x3, tm);
        const Mat k3p = riccati_rhs(ode.jacobian(x3, tm), p3, Q);

        x4 = fs.x;
        kop.axpy(h, k3.data(), x4.data(), dim);
        Mat p4 = fs.P;
        kop.axpy(h, k3p.data(), p4.data(), p4.size());
        const std::vector<double> k4 = ode.f(x4, t1);
        const Mat k4p = riccati_rhs(ode.jacobian(x4, t1), p4, Q);

        const double w = h / 6.0;
        kop.axpy(w, k1.data(), fs.x.data(), dim);
        kop.axpy(2.0 * w, k2.data(), fs.x.data(), dim);
        kop.axpy(2.0 * w, k3.data(), fs.x.data(), dim);
        kop.axpy(w, k4.data(), fs.x.data(), dim);

        kop.axpy(w, k1p.data(), fs.P.data(), fs.P.size());
        kop.axpy(2.0 * w, k2p.data(), fs.P.data(), fs.P.size());
        kop.axpy(2.0 * w, k3p.data(), fs.P.data(), fs.P.size());
        kop.axpy(w, k4p.data(), fs.P.data(), fs.P.size());

        symmetrize(fs.P);
        fs.t = s + 1 == steps ? t_to : t1;
        if (check_health) health_check(fs.P, "propagate");
    }
}

void update_core(FilterState& fs, const std::vector<double>& innovation, const Mat& H, const Mat& R,
                 bool check_health) {
    const std::size_t dim = fs.x.size();
    const std::size_t m = innovation.size();
    if (H.rows() != m || H.cols() != dim || R.rows() != m || R.cols() != m)
        throw Error("update_core: dimension mismatch");

    const Mat hp = H * fs.P;
    Mat s = mul_bt(hp, H);
    s += R;
    Mat lower;
    if (!cholesky(s, lower)) {
        std::string diag = "update skipped: singular innovation covariance, diag =";
        for (std::size_t i = 0; i < m; ++i) diag += " " + std::to_string(s(i, i));
        throw UpdateSkipError(diag);
    }

    // K = P H^T S^{-1}; solve S K^T = (P H^T)^T instead of forming S^{-1}.
    const Mat pht = mul_bt(fs.P, H);
    const Mat k = transpose(cholesky_solve_mat(lower, transpose(pht)));

    const std::vector<double> dx = mul_vec(k, innovation);
    kernels::ops().axpy(1.0, dx.data(), fs.x.data(), dim);

    Mat ikh = Mat::identity(dim);
    const Mat kh = k * H;
    kernels::ops().axpy(-1.0, kh.data(), ikh.data(), ikh.size());
    fs.P = ikh * fs.P;
    symmetrize(fs.P);
    if (check_health) health_check(fs.P, "update");
}

FilterState propagate(const EkfModel& model, const FilterState& fs, Epoch t_to, const Mat& Q, double max_step_s,
                      bool check_health) {
    FilterState out = fs;
    const OdeModel ode{
        [&model](std::span<const double> x, Epoch t) { return dynamics(model, x, t); },
        [&model](std::span<const double> x, Epoch t) { return state_jacobian(model, x, t); },
    };
    propagate_core(ode, out, t_to, Q, max_step_s, check_health);
    return out;
}

FilterState update(const EkfModel& model, const FilterState& fs, const LosMeasurement& y, const Mat& R,
                   bool check_health) {
    if (std::abs(fs.t - y.epoch) > 1e-6)
        throw Error("update: state epoch does not match measurement epoch");
    std::size_t index = model.beacons.size();
    for (std::size_t i = 0; i < model.beacons.size(); ++i) {
        if (model.beacons[i].id == y.beacon_id) {
            index = i;
            break;
        }
    }
    if (index == model.beacons.size()) throw Error("update: unknown beacon '" + y.beacon_id + "'");

    FilterState out = fs;
    const std::array<double, 2> pred = measurement_model(model, out.x, out.t, index);
    const std::vector<double> innovation{
        std::remainder(y.theta - pred[0], 2.0 * constants::pi),  // azimuth wraps across +-pi
        y.phi - pred[1],
    };
    const Mat H = measurement_jacobian(model, out.x, out.t, index);
    update_core(out, innovation, H, R, check_health);
    return out;
}

}  // namespace dsnav
