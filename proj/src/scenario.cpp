#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "dsnav/errors.hpp"
#include "dsnav/rng.hpp"
#include "dsnav/scenario.hpp"

namespace dsnav {

namespace {

// Fixed-step RK4 for the point-mass + constant-thrust truth dynamics.
StateVector rk4_span(const StateVector& s0, double span, double mu, const Vec3& accel, double max_step) {
    const int steps = std::max(1, static_cast<int>(std::ceil(span / max_step - 1e-12)));
    const double h = span / steps;
    StateVector s = s0;
    const auto deriv = [&](const StateVector& y) -> StateVector {
        const double rn = norm(y.r);
        return {y.v, (-mu / (rn * rn * rn)) * y.r + accel};
    };
    for (int i = 0; i < steps; ++i) {
        const StateVector k1 = deriv(s);
        const StateVector k2 = deriv({s.r + 0.5 * h * k1.r, s.v + 0.5 * h * k1.v});
        const StateVector k3 = deriv({s.r + 0.5 * h * k2.r, s.v + 0.5 * h * k2.v});
        const StateVector k4 = deriv({s.r + h * k3.r, s.v + h * k3.v});
        s.r += (h / 6.0) * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r);
        s.v += (h / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    }
    return s;
}

}  // namespace

TruthTrajectory::TruthTrajectory(StateVector state0, ThrustProfile thrust, double mu, double thrust_step_s)
    : mu_(mu), step_(thrust_step_s) {
    thrust.validate();
    // Nodes at epoch 0 and at every arc boundary; states filled sequentially.
    nodes_.push_back({Epoch{0.0}, state0, false, {}});
    for (const auto& arc : thrust.arcs) {
        if (arc.t_end.t <= 0.0) continue;  // arcs entirely before the reference epoch never apply
        const Epoch start = arc.t_start.t > 0.0 ? arc.t_start : Epoch{0.0};
        if (start.t > nodes_.back().t.t) {
            const StateVector s = kepler_propagate(nodes_.back().state, start - nodes_.back().t, mu_);
            nodes_.push_back({start, s, false, {}});
        }
        Node& enter = nodes_.back();
        enter.thrusting = true;
        enter.accel = arc.accel_km_s2;
        const StateVector s_end = rk4_span(enter.state, arc.t_end - enter.t, mu_, arc.accel_km_s2, step_);
        nodes_.push_back({arc.t_end, s_end, false, {}});
    }
}

StateVector TruthTrajectory::state_at(Epoch t) const {
    // Last node at or before t; queries before the first node coast backward.
    std::size_t i = 0;
    while (i + 1 < nodes_.size() && nodes_[i + 1].t <= t) ++i;
    const Node& node = nodes_[i];
    const double span = t - node.t;
    if (span == 0.0) return node.state;
    if (node.thrusting) return rk4_span(node.state, span, mu_, node.accel, step_);
    return kepler_propagate(node.state, span, mu_);
}

TruthTrajectory run_truth(const ScenarioConfig& config) {
    return {config.truth_state0, config.thrust, config.mu};
}

std::vector<MeasurementRow> synthesize_schedule_measurements(const ScenarioConfig& config,
                                                             std::optional<std::uint64_t> seed) {
    const TrackingSchedule schedule = config.assemble_schedule();
    const TruthTrajectory truth = run_truth(config);
    NoiseModel noise = config.noise;
    if (seed) noise.seed = *seed;
    Rng rng = Rng::for_stream(noise.seed, 1);  // stream 1: measurement noise

    std::vector<MeasurementRow> rows;
    for (const auto& seg : schedule.segments) {
        if (seg.kind != SegmentKind::Track) continue;
        const Body& beacon = config.body(seg.beacon_id);
        for (const Epoch e : measurement_epochs(seg)) {
            const SynthesizedMeasurement m = synthesize_measurement(truth.state_at(e), beacon, e, noise, rng, config.c);
            rows.push_back({e, beacon.id, m.measurement.theta, m.measurement.phi, m.true_delta_t_s, true});
        }
    }
    return rows;
}

// --- EKF run -----------------------------------------------------------------

namespace {

FilterRecord make_record(const ScenarioConfig& config, const TruthTrajectory& truth, const FilterState& fs,
                         const std::string& phase) {
    const std::size_t dim = fs.x.size();
    FilterRecord rec;
    rec.t = fs.t;
    rec.xhat = fs.x;
    rec.phase = phase;
    rec.sigma3.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) rec.sigma3[i] = 3.0 * std::sqrt(std::max(0.0, fs.P(i, i)));
    const StateVector ts = truth.state_at(fs.t);
    rec.err.resize(dim);
    rec.err[0] = fs.x[0] - ts.r.x;
    rec.err[1] = fs.x[1] - ts.r.y;
    rec.err[2] = fs.x[2] - ts.r.z;
    rec.err[3] = fs.x[3] - ts.v.x;
    rec.err[4] = fs.x[4] - ts.v.y;
    rec.err[5] = fs.x[5] - ts.v.z;
    for (std::size_t i = 6; i < dim; ++i) {
        const double true_dt = solve_light_time(ts.r, fs.t, config.bodies[i - 6], config.c).delta_t_s;
        rec.err[i] = fs.x[i] - true_dt;
    }
    return rec;
}

}  // namespace

FilterRunResult run_filter(const ScenarioConfig& config, const EkfRunOptions& options) {
    const TrackingSchedule schedule = config.assemble_schedule();
    const TruthTrajectory truth = run_truth(config);
    const EkfModel model = config.ekf_model();
    const FilterSettings settings = config.filter_settings();
    const std::size_t n = config.bodies.size();

    NoiseModel noise = config.noise;
    if (options.seed) noise.seed = *options.seed;
    Rng meas_rng = Rng::for_stream(noise.seed, 1);  // stream 1: measurement noise

    FilterRunResult result;
    for (const auto& b : config.bodies) result.beacon_ids.push_back(b.id);

    // Initialization per the filter equations: x0+ = E[x0] (the truth state,
    // unbiased) under the configured prior covariance; the delay states come
    // from light-time solves at the initial position estimate.
    const Epoch t0 = schedule.start();
    const StateVector truth0 = truth.state_at(t0);
    FilterState fs;
    fs.t = t0;
    fs.x.resize(6 + n);
    fs.x[0] = truth0.r.x;
    fs.x[1] = truth0.r.y;
    fs.x[2] = truth0.r.z;
    fs.x[3] = truth0.v.x;
    fs.x[4] = truth0.v.y;
    fs.x[5] = truth0.v.z;
    const Vec3 r0_hat{fs.x[0], fs.x[1], fs.x[2]};
    for (std::size_t i = 0; i < n; ++i) {
        fs.x[6 + i] = solve_light_time(r0_hat, t0, config.bodies[i], config.c).delta_t_s;
    }
    fs.P = Mat(6 + n, 6 + n);
    for (int i = 0; i < 3; ++i) fs.P(i, i) = settings.sigma_r_km * settings.sigma_r_km;
    for (int i = 3; i < 6; ++i) fs.P(i, i) = settings.sigma_v_km_s * settings.sigma_v_km_s;
    for (std::size_t i = 6; i < 6 + n; ++i) fs.P(i, i) = settings.sigma_dt_s * settings.sigma_dt_s;

    double min_eig_ratio = std::numeric_limits<double>::infinity();
    const auto record = [&](const std::string& phase) {
        result.records.push_back(make_record(config, truth, fs, phase));
        if (options.audit_eigenvalues) {
            const std::vector<double> ev = symmetric_eigenvalues(fs.P);
            min_eig_ratio = std::min(min_eig_ratio, ev.front() / std::max(trace(fs.P), 1e-300));
        }
    };

    record(phase_tag(schedule.segments.front()));
    for (const auto& seg : schedule.segments) {
        if (seg.kind == SegmentKind::Track) {
            const Body& beacon = config.body(seg.beacon_id);
            const double period = 1.0 / seg.rate_hz;
            for (const Epoch e : measurement_epochs(seg)) {
                if (e > fs.t) {
                    fs = propagate(model, fs, e, settings.Q, period, settings.check_health);
                }
                const SynthesizedMeasurement m =
                    synthesize_measurement(truth.state_at(e), beacon, e, noise, meas_rng, config.c);
                result.measurements.push_back(
                    {e, beacon.id, m.measurement.theta, m.measurement.phi, m.true_delta_t_s, true});
                fs = update(model, fs, m.measurement, settings.R, settings.check_health);
                record(phase_tag(seg));
            }
            if (fs.t < seg.t_end) {
                fs = propagate(model, fs, seg.t_end, settings.Q, period, settings.check_health);
                record(phase_tag(seg));
            }
        } else {
            while (fs.t < seg.t_end) {
                const Epoch next{std::min(fs.t.t + settings.step_coast_s, seg.t_end.t)};
                fs = propagate(model, fs, next, settings.Q, settings.step_coast_s, settings.check_health);
                record(phase_tag(seg));
            }
        }
    }

    result.summary = compute_ekf_summary(result.records, settings.pos_bound_km, settings.vel_bound_km_s);
    result.summary.updates = result.measurements.size();
    result.audit_min_eig_ratio = options.audit_eigenvalues ? min_eig_ratio : 0.0;
    return result;
}

EkfRunSummary compute_ekf_summary(const std::vector<FilterRecord>& records, double pos_bound_km,
                                  double vel_bound_km_s) {
    EkfRunSummary s;
    s.records = records.size();
    if (records.empty()) return s;

    const auto within_bounds = [&](const FilterRecord& r) {
        for (int i = 0; i < 3; ++i) {
            if (!(r.sigma3[i] < pos_bound_km)) return false;
        }
        for (int i = 3; i < 6; ++i) {
            if (!(r.sigma3[i] < vel_bound_km_s)) return false;
        }
        return true;
    };

    std::size_t conv_index = records.size();
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (within_bounds(records[i])) {
            conv_index = i;
            break;
        }
    }
    s.converged = conv_index < records.size();
    s.convergence_t_s = s.converged ? records[conv_index].t.t : -1.0;

    const FilterRecord& last = records.back();
    s.final_sigma3 = last.sigma3;
    s.final_abs_err.resize(last.err.size());
    for (std::size_t i = 0; i < last.err.size(); ++i) s.final_abs_err[i] = std::abs(last.err[i]);
    s.final_within_bounds = within_bounds(last);

    if (s.converged) {
        std::size_t inside = 0;
        std::size_t total = 0;
        for (std::size_t i = conv_index; i < records.size(); ++i) {
            const FilterRecord& r = records[i];
            for (int k = 0; k < 3; ++k) {
                s.max_post_sigma3_pos_km = std::max(s.max_post_sigma3_pos_km, r.sigma3[k]);
                s.max_post_sigma3_vel_km_s = std::max(s.max_post_sigma3_vel_km_s, r.sigma3[3 + k]);
            }
            for (int k = 0; k < 6; ++k) {
                ++total;
                if (std::abs(r.err[k]) <= r.sigma3[k]) ++inside;
            }
        }
        s.coverage_pos_vel = static_cast<double>(inside) / static_cast<double>(total);
    }
    return s;
}

// --- posdet run --------------------------------------------------------------

namespace {

PosDetProblem problem_from_rows(const ScenarioConfig& config, const std::vector<MeasurementRow>& rows,
                                std::size_t begin, std::size_t end) {
    PosDetProblem problem;
    problem.c = config.c;
    problem.t_k = rows[begin].epoch;
    for (std::size_t i = begin; i < end; ++i) {
        if (rows[i].epoch.t != problem.t_k.t)
            throw Error("posdet: observation set mixes epochs " + std::to_string(problem.t_k.t) + " and " +
                        std::to_string(rows[i].epoch.t));
        problem.observations.push_back({config.body(rows[i].beacon_id), los_from_az_el(rows[i].theta, rows[i].phi)});
    }
    return problem;
}

PosDetTrialRow solve_trial(const ScenarioConfig& config, const std::vector<MeasurementRow>& rows, std::size_t begin,
                           std::size_t end, int trial) {
    const PosDetProblem problem = problem_from_rows(config, rows, begin, end);
    const PosDetSolution sol = solve_position(problem);
    return {trial, sol.r, sol.delta_t, sol.cost, sol.iterations, sol.converged};
}

}  // namespace

PosDetRunResult run_posdet(const ScenarioConfig& config, const PosDetRunOptions& options) {
    const int trials = options.trials.value_or(config.posdet.trials);
    if (trials < 1) throw ConfigError("posdet: trials must be >= 1");
    const std::uint64_t seed = options.seed.value_or(config.noise.seed);
    const Epoch t = config.posdet.snapshot_epoch;
    const TruthTrajectory truth = run_truth(config);
    const StateVector truth_state = truth.state_at(t);

    PosDetRunResult result;
    for (const auto& b : config.bodies) result.beacon_ids.push_back(b.id);

    // Streams 2+i: one generator per trial, so --jobs cannot change results.
    const std::size_t n = config.bodies.size();
    result.measurements.resize(static_cast<std::size_t>(trials) * n);
    result.solutions.resize(trials);

    std::atomic<int> next{0};
    const auto worker = [&]() {
        for (int trial = next.fetch_add(1); trial < trials; trial = next.fetch_add(1)) {
            Rng rng = Rng::for_stream(seed, 2 + static_cast<std::uint64_t>(trial));
            const std::size_t base = static_cast<std::size_t>(trial) * n;
            for (std::size_t i = 0; i < n; ++i) {
                const SynthesizedMeasurement m =
                    synthesize_measurement(truth_state, config.bodies[i], t, config.noise, rng, config.c);
                result.measurements[base + i] = {t, config.bodies[i].id, m.measurement.theta, m.measurement.phi,
                                                 m.true_delta_t_s, true};
            }
            result.solutions[trial] = solve_trial(config, result.measurements, base, base + n, trial);
        }
    };

    const int jobs = std::max(1, options.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    result.summary = compute_posdet_summary(config, result.solutions);
    return result;
}

PosDetRunResult run_posdet_from_measurements(const ScenarioConfig& config, const std::vector<MeasurementRow>& rows) {
    if (rows.empty()) throw Error("posdet: measurement log is empty");
    PosDetRunResult result;
    for (const auto& b : config.bodies) result.beacon_ids.push_back(b.id);
    result.measurements = rows;

    // Greedy grouping: a solve set closes when a beacon id repeats.
    std::size_t begin = 0;
    int trial = 0;
    std::vector<std::string> seen;
    for (std::size_t i = 0; i <= rows.size(); ++i) {
        const bool flush = i == rows.size() ||
                           std::find(seen.begin(), seen.end(), rows[i].beacon_id) != seen.end();
        if (flush) {
            result.solutions.push_back(solve_trial(config, rows, begin, i, trial++));
            begin = i;
            seen.clear();
        }
        if (i < rows.size()) seen.push_back(rows[i].beacon_id);
    }
    result.summary = compute_posdet_summary(config, result.solutions);
    return result;
}

PosDetRunSummary compute_posdet_summary(const ScenarioConfig& config, const std::vector<PosDetTrialRow>& rows) {
    PosDetRunSummary s;
    s.trials = rows.size();
    if (rows.empty()) return s;

    const TruthTrajectory truth = run_truth(config);
    const Epoch t = config.posdet.snapshot_epoch;
    const StateVector truth_state = truth.state_at(t);
    std::vector<double> true_dt(config.bodies.size());
    for (std::size_t i = 0; i < config.bodies.size(); ++i) {
        true_dt[i] = solve_light_time(truth_state.r, t, config.bodies[i], config.c).delta_t_s;
    }

    std::vector<double> abs_pos_errors;
    std::vector<double> abs_dt_errors;
    std::size_t in_envelope = 0;
    double iter_sum = 0.0;
    for (const auto& row : rows) {
        const Vec3 dr = row.r - truth_state.r;
        const double comp[3] = {std::abs(dr.x), std::abs(dr.y), std::abs(dr.z)};
        bool inside = true;
        for (const double cmag : comp) {
            abs_pos_errors.push_back(cmag);
            s.max_abs_err_pos_km = std::max(s.max_abs_err_pos_km, cmag);
            inside = inside && cmag <= config.posdet.pos_envelope_km;
        }
        for (std::size_t i = 0; i < row.delta_t.size() && i < true_dt.size(); ++i) {
            const double derr = std::abs(row.delta_t[i] - true_dt[i]);
            abs_dt_errors.push_back(derr);
            s.max_abs_err_dt_s = std::max(s.max_abs_err_dt_s, derr);
            inside = inside && derr <= config.posdet.dt_envelope_s;
        }
        if (row.converged) ++s.converged;
        if (inside) ++in_envelope;
        iter_sum += row.iterations;
    }
    s.fraction_in_envelope = static_cast<double>(in_envelope) / static_cast<double>(rows.size());
    s.mean_iterations = iter_sum / static_cast<double>(rows.size());

    const auto p99 = [](std::vector<double>& v) {
        if (v.empty()) return 0.0;
        std::sort(v.begin(), v.end());
        const std::size_t idx = (v.size() * 99 + 99) / 100;  // ceil(0.99 n), 1-based
        return v[std::min(idx, v.size()) - 1];
    };
    s.p99_abs_err_pos_km = p99(abs_pos_errors);
    s.p99_abs_err_dt_s = p99(abs_dt_errors);
    return s;
}

}  // namespace dsnav
