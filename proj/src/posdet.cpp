#include "dsnav/posdet.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "dsnav/errors.hpp"
#include "dsnav/kernels.hpp"
#include "dsnav/mat.hpp"

namespace dsnav {

Vec3 residual(const Vec3& r, double delta_t_s, const LosUnitVector& rho_hat, const Body& beacon, Epoch t_k,
              double c) {
    const StateVector emit = body_state(beacon, t_k - delta_t_s);
    return r - (emit.r - (c * delta_t_s) * rho_hat.u);
}

double cost(const PosDetProblem& problem, const Vec3& r, const std::vector<double>& delta_t) {
    double j = 0.0;
    for (std::size_t i = 0; i < problem.observations.size(); ++i) {
        const auto& ob = problem.observations[i];
        j += norm2(residual(r, delta_t[i], ob.rho_hat, ob.beacon, problem.t_k, problem.c));
    }
    return j;
}

std::vector<double> cost_gradient(const PosDetProblem& problem, const Vec3& r, const std::vector<double>& delta_t) {
    const std::size_t n = problem.observations.size();
    std::vector<double> g(3 + n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& ob = problem.observations[i];
        const StateVector emit = body_state(ob.beacon, problem.t_k - delta_t[i]);
        const Vec3 eps = r - (emit.r - (problem.c * delta_t[i]) * ob.rho_hat.u);
        g[0] += 2.0 * eps.x;
        g[1] += 2.0 * eps.y;
        g[2] += 2.0 * eps.z;
        g[3 + i] = 2.0 * dot(emit.v + problem.c * ob.rho_hat.u, eps);
    }
    return g;
}

PosDetGuess default_guess(const PosDetProblem& problem) {
    Vec3 centroid{};
    for (const auto& ob : problem.observations) centroid += body_state(ob.beacon, problem.t_k).r;
    centroid = centroid / static_cast<double>(problem.observations.size());
    const double cn = norm(centroid);
    const Vec3 r = cn > 0.0 ? (constants::au_km / cn) * centroid : Vec3{constants::au_km, 0.0, 0.0};
    PosDetGuess guess{r, {}};
    guess.delta_t.reserve(problem.observations.size());
    for (const auto& ob : problem.observations) {
        guess.delta_t.push_back(norm(body_state(ob.beacon, problem.t_k).r - r) / problem.c);
    }
    return guess;
}

namespace {

// Stacked residual (3n) and Jacobian (3n x (3+n)) in scaled unknowns
// p = [r (km), s_i = c*dt_i (km)]. d eps_i / d r = I3,
// d eps_i / d s_i = v_i(t_k - dt_i)/c + rho_hat_i.
void build_system(const PosDetProblem& problem, const Vec3& r, const std::vector<double>& delta_t,
                  std::vector<double>& e, Mat& jac) {
    const std::size_t n = problem.observations.size();
    e.assign(3 * n, 0.0);
    jac = Mat(3 * n, 3 + n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& ob = problem.observations[i];
        const StateVector emit = body_state(ob.beacon, problem.t_k - delta_t[i]);
        const Vec3 eps = r - (emit.r - (problem.c * delta_t[i]) * ob.rho_hat.u);
        e[3 * i + 0] = eps.x;
        e[3 * i + 1] = eps.y;
        e[3 * i + 2] = eps.z;
        const Vec3 col = emit.v / problem.c + ob.rho_hat.u;
        for (std::size_t k = 0; k < 3; ++k) jac(3 * i + k, k) = 1.0;
        jac(3 * i + 0, 3 + i) = col.x;
        jac(3 * i + 1, 3 + i) = col.y;
        jac(3 * i + 2, 3 + i) = col.z;
    }
}

std::string condition_diagnostics(const Mat& normal) {
    const std::vector<double> ev = symmetric_eigenvalues(normal);
    return "normal matrix eigenvalue range [" + std::to_string(ev.front()) + ", " + std::to_string(ev.back()) + "]";
}

}  // namespace

PosDetSolution solve_position(const PosDetProblem& problem, const std::optional<PosDetGuess>& initial,
                              const PosDetOptions& options) {
    const std::size_t n = problem.observations.size();
    if (n < 2) {
        throw UnderDeterminedError("solve_position: " + std::to_string(n) +
                                   " observation(s) cannot determine 3+" + std::to_string(n) + " unknowns");
    }
    {
        std::set<std::string> ids;
        for (const auto& ob : problem.observations) {
            if (!ids.insert(ob.beacon.id).second)
                throw DegenerateGeometryError("solve_position: duplicate beacon '" + ob.beacon.id + "'");
        }
    }

    const PosDetGuess guess = initial ? *initial : default_guess(problem);
    Vec3 r = guess.r;
    std::vector<double> delta_t = guess.delta_t;
    if (delta_t.size() != n) throw Error("solve_position: initial guess delay count mismatch");

    PosDetSolution sol;
    sol.well_posed = n >= 3;

    std::vector<double> e;
    Mat jac;
    build_system(problem, r, delta_t, e, jac);
    double current_cost = kernels::ops().dot(e.data(), e.data(), e.size());

    double lambda = 0.0;
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        Mat normal = mul_at(jac, jac);
        const std::vector<double> half_g = mul_tvec(jac, e);  // J^T e = grad/2
        sol.grad_norm = 2.0 * vec_norm(half_g);
        if (sol.grad_norm < options.grad_tol) {
            sol.converged = true;
            break;
        }

        double diag_max = 0.0;
        for (std::size_t k = 0; k < normal.rows(); ++k) diag_max = std::max(diag_max, normal(k, k));

        // Damped normal-equation step; raise lambda until the factorization
        // succeeds and the cost decreases.
        bool accepted = false;
        for (int raise = 0; raise < 24 && !accepted; ++raise) {
            Mat damped = normal;
            for (std::size_t k = 0; k < damped.rows(); ++k) damped(k, k) += lambda;
            Mat lower;
            if (!cholesky(damped, lower)) {
                lambda = lambda == 0.0 ? 1e-12 * diag_max : lambda * 10.0;
                if (lambda > 1e8 * std::max(diag_max, 1.0))
                    throw RankDeficiencyError("solve_position: singular normal matrix; " +
                                              condition_diagnostics(normal));
                continue;
            }
            std::vector<double> step = cholesky_solve(lower, half_g);
            for (double& s : step) s = -s;

            const Vec3 r_try = r + Vec3{step[0], step[1], step[2]};
            std::vector<double> dt_try(n);
            for (std::size_t i = 0; i < n; ++i) dt_try[i] = delta_t[i] + step[3 + i] / problem.c;

            std::vector<double> e_try;
            Mat jac_try;
            build_system(problem, r_try, dt_try, e_try, jac_try);
            const double cost_try = kernels::ops().dot(e_try.data(), e_try.data(), e_try.size());
            if (cost_try <= current_cost) {
                r = r_try;
                delta_t = std::move(dt_try);
                e = std::move(e_try);
                jac = std::move(jac_try);
                current_cost = cost_try;
                lambda *= 0.25;
                if (lambda < 1e-14 * diag_max) lambda = 0.0;
                accepted = true;

                const double step_r = std::sqrt(step[0] * step[0] + step[1] * step[1] + step[2] * step[2]);
                double step_dt = 0.0;
                for (std::size_t i = 0; i < n; ++i) step_dt += step[3 + i] * step[3 + i];
                step_dt = std::sqrt(step_dt) / problem.c;
                if (step_r < options.step_tol_r_km && step_dt < options.step_tol_dt_s) {
                    const std::vector<double> g_final = mul_tvec(jac, e);
                    sol.grad_norm = 2.0 * vec_norm(g_final);
                    sol.converged = true;
                    ++iter;
                    break;
                }
            } else {
                lambda = lambda == 0.0 ? 1e-8 * diag_max : lambda * 10.0;
                if (lambda > 1e8 * std::max(diag_max, 1.0)) break;  // stalled; report non-converged
            }
        }
        if (sol.converged || !accepted) break;
    }

    sol.r = r;
    sol.delta_t = std::move(delta_t);
    sol.cost = current_cost;
    sol.iterations = iter;
    return sol;
}

}  // namespace dsnav
