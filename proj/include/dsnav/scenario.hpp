#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dsnav/ekf.hpp"
#include "dsnav/ephemeris.hpp"
#include "dsnav/measurement.hpp"
#include "dsnav/posdet.hpp"
#include "dsnav/schedule.hpp"

namespace dsnav {

/// Snapshot-fix experiment settings.
struct PosDetRunSettings {
    Epoch snapshot_epoch{0.0};
    int trials = 1000;
    double pos_envelope_km = 20000.0;  // summary envelope thresholds
    double dt_envelope_s = 0.2;
};

/// Everything a run needs, parsed from one config document: body catalog,
/// truth orbit, noise budget, filter settings, tracking schedule, seeds.
struct ScenarioConfig {
    std::string name;
    std::string epoch0_iso;  // reference instant; all Epochs count from it
    double mu = constants::mu_sun_km3_s2;
    double c = constants::c_light_km_s;

    std::vector<Body> bodies;  // catalog order fixes the delay-state order
    StateVector truth_state0;
    ThrustProfile thrust;
    NoiseModel noise;

    // Filter block (Q and R are built per beacon count at run time).
    double sigma_r_km = 1e5;
    double sigma_v_km_s = 1e-1;
    double sigma_dt_s = -1.0;  // < 0 means sigma_r / c
    bool q_ones = true;        // full matrix of ones vs diagonal
    double q_scale = 1e-12;
    double meas_sigma_rad = 5.0 * constants::arcsec_to_rad;
    double step_coast_s = 60.0;
    double pos_bound_km = 1000.0;
    double vel_bound_km_s = 2e-3;

    // Campaign schedule block.
    bool has_schedule = false;
    double nav_start_s = 0.0;
    std::vector<std::string> schedule_beacons;
    double window_s = 4320.0;
    double slew_s = 864.0;
    double rate_hz = 0.1;
    int cycles = 1;

    PosDetRunSettings posdet;
    std::string out_dir;

    const Body& body(const std::string& id) const;  // throws ConfigError
    /// Coast prefix from epoch 0 (when nav_start_s > 0) plus the campaign.
    TrackingSchedule assemble_schedule() const;
    FilterSettings filter_settings() const;
    EkfModel ekf_model() const;
};

ScenarioConfig load_config(const std::string& path);

/// Queryable truth trajectory: conic propagation in coast, fixed-step RK4
/// through thrust arcs. Pure function of the construction inputs.
class TruthTrajectory {
  public:
    TruthTrajectory(StateVector state0, ThrustProfile thrust, double mu, double thrust_step_s = 60.0);

    StateVector state_at(Epoch t) const;

  private:
    struct Node {
        Epoch t;
        StateVector state;
        bool thrusting = false;
        Vec3 accel;
    };
    std::vector<Node> nodes_;
    double mu_;
    double step_;
};

TruthTrajectory run_truth(const ScenarioConfig& config);

/// One measurement log line; trial groups snapshot Monte-Carlo rows.
struct MeasurementRow {
    Epoch epoch;
    std::string beacon_id;
    double theta = 0.0;
    double phi = 0.0;
    double true_delta_t_s = 0.0;
    bool has_truth = false;
};

struct FilterRecord {
    Epoch t;
    std::vector<double> xhat;    // 6+n
    std::vector<double> sigma3;  // 3 sqrt(diag P)
    std::vector<double> err;     // xhat - truth (delays vs light-time solves)
    std::string phase;           // coast | slew | track:<beacon>
};

/// Statistics derivable from the record stream alone (report recomputes
/// them byte-identically from the history CSV).
struct EkfRunSummary {
    std::size_t records = 0;
    std::size_t updates = 0;
    bool converged = false;
    double convergence_t_s = -1.0;
    std::vector<double> final_sigma3;
    std::vector<double> final_abs_err;
    double max_post_sigma3_pos_km = 0.0;
    double max_post_sigma3_vel_km_s = 0.0;
    double coverage_pos_vel = -1.0;  // pooled per-component 3-sigma coverage
    bool final_within_bounds = false;
};

struct FilterRunResult {
    std::vector<std::string> beacon_ids;
    std::vector<FilterRecord> records;
    std::vector<MeasurementRow> measurements;
    EkfRunSummary summary;
    double audit_min_eig_ratio = 0.0;  // min over records of eigmin(P)/trace(P), audit runs only
};

struct EkfRunOptions {
    std::optional<std::uint64_t> seed;
    bool audit_eigenvalues = false;
};

/// Full continuous-discrete filter run along the scenario schedule.
FilterRunResult run_filter(const ScenarioConfig& config, const EkfRunOptions& options = {});

struct PosDetTrialRow {
    int trial = 0;
    Vec3 r;
    std::vector<double> delta_t;
    double cost = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct PosDetRunSummary {
    std::size_t trials = 0;
    std::size_t converged = 0;
    double fraction_in_envelope = 0.0;  // all position and delay errors inside
    double max_abs_err_pos_km = 0.0;
    double max_abs_err_dt_s = 0.0;
    double p99_abs_err_pos_km = 0.0;
    double p99_abs_err_dt_s = 0.0;
    double mean_iterations = 0.0;
};

struct PosDetRunResult {
    std::vector<std::string> beacon_ids;
    std::vector<PosDetTrialRow> solutions;
    std::vector<MeasurementRow> measurements;
    PosDetRunSummary summary;
};

struct PosDetRunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    int jobs = 1;
};

/// Monte-Carlo snapshot solves with per-trial derived noise streams.
PosDetRunResult run_posdet(const ScenarioConfig& config, const PosDetRunOptions& options = {});

/// Solve observation sets parsed from an external measurement log. Rows are
/// grouped into solves greedily: a group closes when a beacon id repeats.
PosDetRunResult run_posdet_from_measurements(const ScenarioConfig& config,
                                             const std::vector<MeasurementRow>& rows);

/// Measurement stream along the tracking schedule (no filter involved);
/// identical to the stream an EKF run consumes under the same seed.
std::vector<MeasurementRow> synthesize_schedule_measurements(const ScenarioConfig& config,
                                                             std::optional<std::uint64_t> seed = {});

// --- file formats -----------------------------------------------------------

std::string measurements_to_csv(const std::vector<MeasurementRow>& rows, bool with_truth);
std::vector<MeasurementRow> measurements_from_csv(const std::string& path);

std::string history_to_csv(const std::vector<FilterRecord>& records, const std::vector<std::string>& beacon_ids);
std::vector<FilterRecord> history_from_csv(const std::string& path, std::vector<std::string>& beacon_ids_out);

std::string solutions_to_csv(const std::vector<PosDetTrialRow>& rows);
std::vector<PosDetTrialRow> solutions_from_csv(const std::string& path);

EkfRunSummary compute_ekf_summary(const std::vector<FilterRecord>& records, double pos_bound_km,
                                  double vel_bound_km_s);
PosDetRunSummary compute_posdet_summary(const ScenarioConfig& config, const std::vector<PosDetTrialRow>& rows);

std::string ekf_summary_text(const ScenarioConfig& config, const EkfRunSummary& summary,
                             const std::vector<std::string>& beacon_ids);
std::string posdet_summary_text(const ScenarioConfig& config, const PosDetRunSummary& summary);

// --- orchestration ----------------------------------------------------------

enum class ScenarioMode { Synth, PosDet, Ekf };

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    int jobs = 1;
};

/// Run the selected mode, write every output file into out_dir, return the
/// summary text ("" for synth).
std::string run_scenario(const ScenarioConfig& config, ScenarioMode mode, const std::string& out_dir,
                         const RunOverrides& overrides = {});

/// Recompute the summary from the CSVs already in `dir` and rewrite
/// summary.txt there; byte-identical to the original run's.
std::string report(const ScenarioConfig& config, const std::string& dir);

}  // namespace dsnav
