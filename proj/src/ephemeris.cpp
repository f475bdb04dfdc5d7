#include "dsnav/ephemeris.hpp"

#include <cmath>
#include <string>

#include "dsnav/errors.hpp"

namespace dsnav {
namespace {

// Stumpff functions C(z), S(z) with series fallback near z = 0 where the
// closed forms cancel catastrophically.
struct Stumpff {
    double c2;
    double c3;
};

Stumpff stumpff(double z) {
    if (std::abs(z) < 1e-4) {
        // c2 = 1/2 - z/24 + z^2/720 - z^3/40320, c3 = 1/6 - z/120 + z^2/5040 - z^3/362880
        const double c2 = 0.5 - z / 24.0 + z * z / 720.0 - z * z * z / 40320.0;
        const double c3 = 1.0 / 6.0 - z / 120.0 + z * z / 5040.0 - z * z * z / 362880.0;
        return {c2, c3};
    }
    if (z > 0.0) {
        const double s = std::sqrt(z);
        return {(1.0 - std::cos(s)) / z, (s - std::sin(s)) / (z * s)};
    }
    const double s = std::sqrt(-z);
    return {(std::cosh(s) - 1.0) / (-z), (std::sinh(s) - s) / (-z * s)};
}

}  // namespace

StateVector kepler_propagate(const StateVector& state0, double dt_s, double mu) {
    const double r0n = norm(state0.r);
    if (!(r0n > 0.0)) throw PropagationError("kepler_propagate: zero initial radius");
    if (!(mu > 0.0)) throw PropagationError("kepler_propagate: non-positive mu");
    if (dt_s == 0.0) return state0;

    const double sqrt_mu = std::sqrt(mu);
    const double sigma0 = dot(state0.r, state0.v) / sqrt_mu;
    const double alpha = 2.0 / r0n - norm2(state0.v) / mu;  // 1/a [1/km]
    const double target = sqrt_mu * dt_s;

    // Universal Kepler equation F(chi) = 0. F'(chi) equals the orbit radius,
    // so F is strictly increasing and a sign-change bracket plus Newton with
    // bisection fallback cannot miss the root.
    const auto eval = [&](double chi) {
        const double z = alpha * chi * chi;
        const Stumpff st = stumpff(z);
        const double chi2 = chi * chi;
        const double f = sigma0 * chi2 * st.c2 + (1.0 - r0n * alpha) * chi2 * chi * st.c3 + r0n * chi - target;
        const double fp = sigma0 * chi * (1.0 - z * st.c3) + (1.0 - r0n * alpha) * chi2 * st.c2 + r0n;
        return std::pair<double, double>{f, fp};
    };

    // Initial guess (Vallado): elliptic uses sqrt(mu) dt alpha; hyperbolic a
    // log-based start; near-parabolic the linear-term estimate.
    double chi;
    if (alpha > 1e-12) {
        chi = target * alpha;
    } else if (alpha < -1e-12) {
        const double a = 1.0 / alpha;
        const double sgn = dt_s >= 0.0 ? 1.0 : -1.0;
        const double num = -2.0 * mu * alpha * dt_s;
        const double den = dot(state0.r, state0.v) + sgn * std::sqrt(-mu * a) * (1.0 - r0n * alpha);
        chi = (num / den > 0.0) ? sgn * std::sqrt(-a) * std::log(num / den) : target / r0n;
    } else {
        chi = target / r0n;
    }

    // Bracket the root: F(0) = -target, and F grows without bound.
    double lo, hi;
    {
        double span = std::max(std::abs(chi), std::abs(target) / r0n);
        if (!(span > 0.0)) span = 1.0;
        if (dt_s > 0.0) {
            lo = 0.0;
            hi = span;
            int guard = 0;
            while (eval(hi).first < 0.0) {
                hi *= 1.6;
                if (++guard > 200)
                    throw PropagationError("kepler_propagate: failed to bracket universal anomaly (dt=" +
                                           std::to_string(dt_s) + " s)");
            }
        } else {
            hi = 0.0;
            lo = -span;
            int guard = 0;
            while (eval(lo).first > 0.0) {
                lo *= 1.6;
                if (++guard > 200)
                    throw PropagationError("kepler_propagate: failed to bracket universal anomaly (dt=" +
                                           std::to_string(dt_s) + " s)");
            }
        }
    }

    if (chi < lo || chi > hi) chi = 0.5 * (lo + hi);

    bool converged = false;
    for (int it = 0; it < 50; ++it) {
        const auto [f, fp] = eval(chi);
        if (f > 0.0) {
            hi = chi;
        } else {
            lo = chi;
        }
        double step = -f / fp;
        double next = chi + step;
        if (!(next > lo) || !(next < hi)) {
            next = 0.5 * (lo + hi);  // bisection fallback
            step = next - chi;
        }
        chi = next;
        if (std::abs(step) <= 1e-12 * std::max(1.0, std::abs(chi))) {
            // One polishing iteration: the quadratic tail drives the anomaly
            // to machine accuracy, which the composition property needs.
            const auto [f2, fp2] = eval(chi);
            chi -= f2 / fp2;
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw PropagationError("kepler_propagate: universal anomaly solve did not converge (dt=" +
                               std::to_string(dt_s) + " s, alpha=" + std::to_string(alpha) + ")");
    }

    const double z = alpha * chi * chi;
    const Stumpff st = stumpff(z);
    const double chi2 = chi * chi;

    const double f = 1.0 - chi2 * st.c2 / r0n;
    const double g = dt_s - chi2 * chi * st.c3 / sqrt_mu;
    const Vec3 r = f * state0.r + g * state0.v;
    const double rn = norm(r);
    const double fdot = sqrt_mu / (rn * r0n) * chi * (z * st.c3 - 1.0);
    const double gdot = 1.0 - chi2 * st.c2 / rn;
    const Vec3 v = fdot * state0.r + gdot * state0.v;
    return {r, v};
}

StateVector body_state(const Body& body, Epoch t) {
    return kepler_propagate(body.state0, t - body.epoch0, body.mu_central);
}

LightTimeSolution solve_light_time(const Vec3& observer_r, Epoch t_k, const Body& body, double c) {
    const StateVector geometric = body_state(body, t_k);
    const double d0 = norm(geometric.r - observer_r);
    if (d0 < 1e-9) {
        return {0.0, geometric, true, 0};
    }
    double dt = d0 / c;
    for (int it = 1; it <= 20; ++it) {
        const StateVector apparent = body_state(body, t_k - dt);
        const double dt_next = norm(apparent.r - observer_r) / c;
        if (std::abs(dt_next - dt) < 1e-9) {
            // Re-evaluate at the accepted delay so the returned pair is
            // self-consistent to the contraction-squashed residual.
            return {dt_next, body_state(body, t_k - dt_next), false, it};
        }
        dt = dt_next;
    }
    throw PropagationError("solve_light_time: fixed point did not converge for body '" + body.id + "'");
}

}  // namespace dsnav
