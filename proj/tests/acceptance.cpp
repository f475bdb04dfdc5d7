// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Usage: acceptance <config-dir> <scratch-dir>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dsnav/csv.hpp"
#include "dsnav/ekf.hpp"
#include "dsnav/measurement.hpp"
#include "dsnav/posdet.hpp"
#include "dsnav/rng.hpp"
#include "dsnav/scenario.hpp"
#include "support/oracle.hpp"

using namespace dsnav;

namespace {

std::string g_config_dir;
std::string g_scratch_dir;
int g_failures = 0;

void report(int criterion, const char* title, bool pass, const std::string& detail) {
    std::printf("criterion %d: %-46s %s  (%s)\n", criterion, title, pass ? "PASS" : "FAIL", detail.c_str());
    if (!pass) ++g_failures;
}

struct FixStats {
    std::size_t trials = 0;
    std::size_t inside = 0;
    std::size_t converged = 0;
    double worst_pos = 0.0;
    double worst_dt = 0.0;
    double worst_pos_err_all = 0.0;  // max over all trials regardless of envelope
    double worst_dt_err_all = 0.0;
};

FixStats run_fix_trials(const ScenarioConfig& config, double sigma_rad, double pos_tol, double dt_tol) {
    const TruthTrajectory truth = run_truth(config);
    const Epoch t = config.posdet.snapshot_epoch;
    const StateVector truth_state = truth.state_at(t);
    std::vector<double> true_dt;
    for (const auto& b : config.bodies) true_dt.push_back(solve_light_time(truth_state.r, t, b).delta_t_s);

    const NoiseModel noise{sigma_rad, config.noise.seed};
    FixStats stats;
    stats.trials = 1000;
    for (std::size_t trial = 0; trial < stats.trials; ++trial) {
        Rng rng = Rng::for_stream(config.noise.seed, 2 + trial);
        PosDetProblem problem;
        problem.t_k = t;
        problem.c = config.c;
        for (const auto& b : config.bodies) {
            const SynthesizedMeasurement m = synthesize_measurement(truth_state, b, t, noise, rng, config.c);
            problem.observations.push_back({b, los_from_az_el(m.measurement.theta, m.measurement.phi)});
        }
        const PosDetSolution sol = solve_position(problem);
        if (sol.converged) ++stats.converged;
        const Vec3 dr = sol.r - truth_state.r;
        double pos_err = std::max({std::abs(dr.x), std::abs(dr.y), std::abs(dr.z)});
        double dt_err = 0.0;
        for (std::size_t i = 0; i < true_dt.size(); ++i)
            dt_err = std::max(dt_err, std::abs(sol.delta_t[i] - true_dt[i]));
        stats.worst_pos_err_all = std::max(stats.worst_pos_err_all, pos_err);
        stats.worst_dt_err_all = std::max(stats.worst_dt_err_all, dt_err);
        if (pos_err <= pos_tol && dt_err <= dt_tol && sol.converged) {
            ++stats.inside;
            stats.worst_pos = std::max(stats.worst_pos, pos_err);
            stats.worst_dt = std::max(stats.worst_dt, dt_err);
        }
    }
    return stats;
}

void criterion_1_and_2() {
    const ScenarioConfig config = load_config(g_config_dir + "/three_body_fix.cfg");

    const FixStats noisy =
        run_fix_trials(config, 5.0 * constants::arcsec_to_rad, 20000.0, 0.2);
    const double frac = static_cast<double>(noisy.inside) / static_cast<double>(noisy.trials);
    report(1, "three-object fix Monte-Carlo envelope", frac >= 0.99,
           std::to_string(noisy.inside) + "/1000 trials inside +-20000 km, +-0.2 s; worst |dr| " +
               std::to_string(noisy.worst_pos_err_all) + " km, worst |ddt| " +
               std::to_string(noisy.worst_dt_err_all) + " s");

    const FixStats clean = run_fix_trials(config, 0.0, 1e-3, 1e-8);
    report(2, "noiseless oracle recovery", clean.inside == clean.trials,
           std::to_string(clean.inside) + "/1000 trials within 1e-3 km and 1e-8 s; worst |dr| " +
               std::to_string(clean.worst_pos_err_all) + " km, worst |ddt| " +
               std::to_string(clean.worst_dt_err_all) + " s");
}

void criterion_3() {
    const ScenarioConfig config = load_config(g_config_dir + "/beacon_campaign.cfg");
    const int runs = 20;
    bool all_final_ok = true;
    bool all_converged = true;
    std::size_t inside = 0, total = 0;
    double worst_sig3_pos = 0.0, worst_sig3_vel = 0.0;
    for (int s = 0; s < runs; ++s) {
        EkfRunOptions options;
        options.seed = 9000 + 131 * static_cast<std::uint64_t>(s);
        const FilterRunResult run = run_filter(config, options);
        all_converged = all_converged && run.summary.converged;
        all_final_ok = all_final_ok && run.summary.final_within_bounds;
        for (int k = 0; k < 3; ++k) {
            worst_sig3_pos = std::max(worst_sig3_pos, run.summary.final_sigma3[k]);
            worst_sig3_vel = std::max(worst_sig3_vel, run.summary.final_sigma3[3 + k]);
        }
        if (!run.summary.converged) continue;
        bool started = false;
        for (const auto& rec : run.records) {
            if (!started) {
                bool ok = true;
                for (int i = 0; i < 3; ++i) ok = ok && rec.sigma3[i] < config.pos_bound_km;
                for (int i = 3; i < 6; ++i) ok = ok && rec.sigma3[i] < config.vel_bound_km_s;
                if (!ok) continue;
                started = true;
            }
            for (int k = 0; k < 6; ++k) {
                ++total;
                if (std::abs(rec.err[k]) <= rec.sigma3[k]) ++inside;
            }
        }
    }
    const double coverage = total > 0 ? static_cast<double>(inside) / static_cast<double>(total) : 0.0;
    const bool pass = all_converged && all_final_ok && coverage >= 0.99;
    char detail[256];
    std::snprintf(detail, sizeof(detail),
                  "20 runs; worst final 3-sigma: pos %.1f km (<1000), vel %.3f m/s (<2); post-convergence coverage %.4f",
                  worst_sig3_pos, 1000.0 * worst_sig3_vel, coverage);
    report(3, "EKF convergence bounds and 3-sigma coverage", pass, detail);
}

void criterion_4() {
    const ScenarioConfig config = load_config(g_config_dir + "/beacon_campaign.cfg");
    const TrackingSchedule campaign = build_campaign_schedule(
        Epoch{config.nav_start_s}, config.schedule_beacons, config.window_s, config.slew_s, config.rate_hz,
        config.cycles);
    bool pass = campaign.segments.size() >= 3;
    if (pass) {
        pass = campaign.segments[0].kind == SegmentKind::Track && campaign.segments[0].beacon_id == "Earth" &&
               campaign.segments[0].t_start.t == 7.00 * 86400.0 && campaign.segments[0].t_end.t == 7.05 * 86400.0 &&
               campaign.segments[1].kind == SegmentKind::Slew && campaign.segments[1].t_end.t == 7.06 * 86400.0 &&
               campaign.segments[2].kind == SegmentKind::Track && campaign.segments[2].beacon_id == "Mars" &&
               campaign.segments[2].t_end.t == 7.10 * 86400.0;
    }
    report(4, "schedule boundaries at days 7.0/7.05/7.06/7.1", pass,
           pass ? "segment edges exact in seconds (604800, 609120, 609984, 613440)" : "boundary mismatch");
}

void criterion_5() {
    const ScenarioConfig config = load_config(g_config_dir + "/beacon_campaign.cfg");
    const EkfModel model = config.ekf_model();
    Rng rng(0xACCE5);
    int bad_f = 0, bad_h = 0, bad_g = 0;
    double worst_f = 0.0, worst_h = 0.0, worst_g = 0.0;

    for (int probe = 0; probe < 100; ++probe) {
        const Epoch t{(rng.uniform() - 0.5) * 20.0 * 86400.0};
        const StateVector sc = oracle::random_heliocentric_state(rng, config.mu);
        std::vector<double> x{sc.r.x, sc.r.y, sc.r.z, sc.v.x, sc.v.y, sc.v.z};
        for (const auto& b : model.beacons)
            x.push_back(solve_light_time(sc.r, t, b, config.c).delta_t_s * (0.9 + 0.2 * rng.uniform()));

        std::vector<double> steps(x.size());
        for (int i = 0; i < 3; ++i) steps[i] = 1.0;
        for (int i = 3; i < 6; ++i) steps[i] = 1e-6;
        for (std::size_t i = 6; i < x.size(); ++i) steps[i] = 1.0;

        // F
        {
            const Mat analytic = state_jacobian(model, x, t);
            const Mat fd = oracle::central_difference_jacobian(
                [&](const std::vector<double>& p) { return dynamics(model, p, t); }, x, steps);
            std::vector<double> f_scale;
            for (const double v : dynamics(model, x, t)) f_scale.push_back(std::abs(v));
            const double rel = oracle::jacobian_worst_rel_dev(analytic, fd, steps, f_scale, 1e-5);
            worst_f = std::max(worst_f, rel);
            if (rel >= 1e-5) ++bad_f;
        }
        // H for each beacon
        for (std::size_t beacon = 0; beacon < model.beacons.size(); ++beacon) {
            const Mat analytic = measurement_jacobian(model, x, t, beacon);
            const Mat fd = oracle::central_difference_jacobian_angles(
                [&](const std::vector<double>& p) {
                    const auto y = measurement_model(model, p, t, beacon);
                    return std::vector<double>{y[0], y[1]};
                },
                x, steps);
            const double rel = oracle::jacobian_worst_rel_dev(analytic, fd, steps, {1.0, 1.0}, 1e-5);
            worst_h = std::max(worst_h, rel);
            if (rel >= 1e-5) ++bad_h;
        }
        // cost gradient on the snapshot geometry
        {
            const ScenarioConfig tb = load_config(g_config_dir + "/three_body_fix.cfg");
            PosDetProblem problem;
            problem.t_k = Epoch{0.0};
            problem.c = tb.c;
            Rng prng = Rng::for_stream(777, probe);
            for (const auto& b : tb.bodies) {
                const SynthesizedMeasurement m = synthesize_measurement(
                    tb.truth_state0, b, Epoch{0.0}, {5.0 * constants::arcsec_to_rad, 0}, prng, tb.c);
                problem.observations.push_back({b, los_from_az_el(m.measurement.theta, m.measurement.phi)});
            }
            const Vec3 r = tb.truth_state0.r + (2e5 * prng.uniform()) * oracle::random_unit(prng);
            std::vector<double> dt;
            for (const auto& ob : problem.observations)
                dt.push_back(norm(body_state(ob.beacon, Epoch{0.0}).r - r) / tb.c + 0.2 * (prng.uniform() - 0.5));

            const std::vector<double> analytic = cost_gradient(problem, r, dt);
            std::vector<double> p{r.x, r.y, r.z, dt[0], dt[1], dt[2]};
            const Mat fd = oracle::central_difference_jacobian(
                [&](const std::vector<double>& q) {
                    return std::vector<double>{cost(problem, {q[0], q[1], q[2]}, {q[3], q[4], q[5]})};
                },
                p, {1.0, 1.0, 1.0, 1e-3, 1e-3, 1e-3});
            for (std::size_t k = 0; k < 6; ++k) {
                const double denom = std::max({std::abs(analytic[k]), std::abs(fd(0, k)), 1e-4});
                const double rel = std::abs(analytic[k] - fd(0, k)) / denom;
                worst_g = std::max(worst_g, rel);
                if (rel >= 1e-4) ++bad_g;
            }
        }
    }
    const bool pass = bad_f == 0 && bad_h == 0 && bad_g == 0;
    char detail[256];
    std::snprintf(detail, sizeof(detail),
                  "100 probes; worst rel dev: F %.2e (<1e-5), H %.2e (<1e-5), gradient %.2e (<1e-4)", worst_f,
                  worst_h, worst_g);
    report(5, "analytic F, H and cost gradient vs finite differences", pass, detail);
}

void criterion_6() {
    bool pass = true;
    std::string detail;

    // two-body invariants over +-5 periods
    {
        Rng rng(0xBEEF);
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const StateVector s0 = oracle::random_heliocentric_state(rng, constants::mu_sun_km3_s2);
            const double e0 = 0.5 * norm2(s0.v) - constants::mu_sun_km3_s2 / norm(s0.r);
            if (e0 >= 0.0) continue;
            const double a = -constants::mu_sun_km3_s2 / (2.0 * e0);
            const double period = 2.0 * constants::pi * std::sqrt(a * a * a / constants::mu_sun_km3_s2);
            const Vec3 h0 = cross(s0.r, s0.v);
            for (const double f : {-5.0, -2.2, 1.7, 5.0}) {
                const StateVector s = kepler_propagate(s0, f * period, constants::mu_sun_km3_s2);
                const double e = 0.5 * norm2(s.v) - constants::mu_sun_km3_s2 / norm(s.r);
                worst = std::max(worst, std::abs(e - e0) / std::abs(e0));
                worst = std::max(worst, norm(cross(s.r, s.v) - h0) / norm(h0));
            }
        }
        pass = pass && worst < 1e-9;
        char buf[64];
        std::snprintf(buf, sizeof(buf), "energy/momentum rel dev %.2e (<1e-9)", worst);
        detail += buf;
    }

    // light-time fixed-point residuals across the campaign geometry
    {
        const ScenarioConfig config = load_config(g_config_dir + "/beacon_campaign.cfg");
        const TruthTrajectory truth = run_truth(config);
        double worst = 0.0;
        for (double t = 0.0; t <= 8.0 * 86400.0; t += 3600.0) {
            const StateVector sc = truth.state_at(Epoch{t});
            for (const auto& b : config.bodies) {
                const LightTimeSolution lt = solve_light_time(sc.r, Epoch{t}, b, config.c);
                const double residual = std::abs(
                    lt.delta_t_s - norm(body_state(b, Epoch{t} - lt.delta_t_s).r - sc.r) / config.c);
                worst = std::max(worst, residual);
            }
        }
        pass = pass && worst < 1e-9;
        char buf[64];
        std::snprintf(buf, sizeof(buf), "; light-time residual %.2e s (<1e-9)", worst);
        detail += buf;
    }

    // covariance symmetry and PSD at every filter step of a seeded campaign
    {
        const ScenarioConfig config = load_config(g_config_dir + "/beacon_campaign.cfg");
        EkfRunOptions options;
        options.audit_eigenvalues = true;
        const FilterRunResult run = run_filter(config, options);  // health checks throw on violation
        pass = pass && run.audit_min_eig_ratio > -1e-9;
        char buf[64];
        std::snprintf(buf, sizeof(buf), "; min eig(P)/trace(P) %.2e (>-1e-9)", run.audit_min_eig_ratio);
        detail += buf;
    }

    report(6, "physical and numerical invariants", pass, detail);
}

void criterion_7() {
    namespace fs = std::filesystem;
    bool pass = true;
    std::string detail;

    const auto byte_identical = [&](const std::string& a, const std::string& b, const char* file) {
        const bool same = read_text_file(a + "/" + file) == read_text_file(b + "/" + file);
        if (!same) detail += std::string(" ") + file + " differs;";
        return same;
    };

    {
        const ScenarioConfig config = load_config(g_config_dir + "/beacon_campaign.cfg");
        const std::string d1 = g_scratch_dir + "/det_ekf_1";
        const std::string d2 = g_scratch_dir + "/det_ekf_2";
        fs::remove_all(d1);
        fs::remove_all(d2);
        run_scenario(config, ScenarioMode::Ekf, d1);
        run_scenario(config, ScenarioMode::Ekf, d2);
        for (const char* file : {"measurements.csv", "history.csv", "summary.txt", "run_info.txt"})
            pass = byte_identical(d1, d2, file) && pass;
    }
    {
        const ScenarioConfig config = load_config(g_config_dir + "/three_body_fix.cfg");
        const std::string d1 = g_scratch_dir + "/det_fix_1";
        const std::string d2 = g_scratch_dir + "/det_fix_2";
        fs::remove_all(d1);
        fs::remove_all(d2);
        RunOverrides overrides;
        overrides.jobs = 4;
        run_scenario(config, ScenarioMode::PosDet, d1, overrides);
        overrides.jobs = 1;
        run_scenario(config, ScenarioMode::PosDet, d2, overrides);
        for (const char* file : {"measurements.csv", "solutions.csv", "summary.txt", "run_info.txt"})
            pass = byte_identical(d1, d2, file) && pass;
    }
    report(7, "seeded reruns produce byte-identical outputs", pass,
           pass ? "ekf and posdet outputs identical across reruns (and across --jobs)" : detail);
}

}  // namespace

int main(int argc, char** argv) {
    g_config_dir = argc > 1 ? argv[1] : DSNAV_CONFIG_DIR;
    g_scratch_dir = argc > 2 ? argv[2] : DSNAV_TEST_TMP "/acceptance";
    std::filesystem::create_directories(g_scratch_dir);

    criterion_1_and_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();

    if (g_failures == 0) {
        std::printf("ACCEPTANCE: all 7 criteria passed\n");
        return 0;
    }
    std::printf("ACCEPTANCE: %d criterion(s) FAILED\n", g_failures);
    return 1;
}
