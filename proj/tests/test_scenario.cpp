#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "dsnav/csv.hpp"
#include "dsnav/errors.hpp"
#include "dsnav/scenario.hpp"
#include "support/oracle.hpp"

using namespace dsnav;

namespace {

const std::string kConfigDir = DSNAV_CONFIG_DIR;
const std::string kTmpDir = DSNAV_TEST_TMP;

std::string tmp_dir(const std::string& leaf) {
    const std::string dir = kTmpDir + "/" + leaf;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("campaign schedule: single beacon, single cycle is one track segment") {
    const TrackingSchedule s = build_campaign_schedule(Epoch{0.0}, {"Earth"}, 4320.0, 864.0, 0.1, 1);
    REQUIRE(s.segments.size() == 1);
    CHECK(s.segments[0].kind == SegmentKind::Track);
    CHECK(s.segments[0].beacon_id == "Earth");
    CHECK(s.segments[0].t_start.t == 0.0);
    CHECK(s.segments[0].t_end.t == 4320.0);
}

TEST_CASE("campaign schedule reproduces the published day 7.0/7.05/7.06/7.1 boundaries exactly") {
    const double day = 86400.0;
    const TrackingSchedule s = build_campaign_schedule(Epoch{7.0 * day}, {"Earth", "Mars"}, 4320.0, 864.0, 0.1, 2);
    REQUIRE(s.segments.size() >= 4);
    CHECK(s.segments[0].kind == SegmentKind::Track);
    CHECK(s.segments[0].beacon_id == "Earth");
    CHECK(s.segments[0].t_start.t == 604800.0);  // day 7.0
    CHECK(s.segments[0].t_end.t == 609120.0);    // day 7.05
    CHECK(s.segments[1].kind == SegmentKind::Slew);
    CHECK(s.segments[1].t_end.t == 609984.0);    // day 7.06
    CHECK(s.segments[2].kind == SegmentKind::Track);
    CHECK(s.segments[2].beacon_id == "Mars");
    CHECK(s.segments[2].t_end.t == 613440.0);    // day 7.1
    // the cycle repeats: next slot starts with a slew
    CHECK(s.segments[3].kind == SegmentKind::Slew);
}

TEST_CASE("campaign schedule tiles its span with no gaps and validates bad input") {
    const TrackingSchedule s = build_campaign_schedule(Epoch{100.0}, {"A", "B", "C"}, 1000.0, 100.0, 0.5, 3);
    for (std::size_t i = 1; i < s.segments.size(); ++i) {
        CHECK(s.segments[i - 1].t_end.t == s.segments[i].t_start.t);
    }
    CHECK(s.end().t == 100.0 + 3 * 3 * 1000.0);
    CHECK_THROWS_AS(build_campaign_schedule(Epoch{0.0}, {}, 4320.0, 864.0, 0.1, 1), ConfigError);
    CHECK_THROWS_AS(build_campaign_schedule(Epoch{0.0}, {"A"}, 100.0, 200.0, 0.1, 1), ConfigError);
}

TEST_CASE("measurement epochs: fencepost count and grid placement") {
    const ScheduleSegment full{Epoch{0.0}, Epoch{4320.0}, SegmentKind::Track, "Earth", 0.1};
    const std::vector<Epoch> epochs = measurement_epochs(full);
    CHECK(epochs.size() == 433);  // window x rate rounded down, plus the start fencepost
    CHECK(epochs.front().t == 0.0);
    CHECK(epochs.back().t == 4320.0);
    for (std::size_t k = 0; k < epochs.size(); ++k) CHECK(epochs[k].t == 10.0 * static_cast<double>(k));

    const ScheduleSegment trimmed{Epoch{0.0}, Epoch{3456.0}, SegmentKind::Track, "Mars", 0.1};
    CHECK(measurement_epochs(trimmed).size() == 346);
}

TEST_CASE("config loader: shipped scenarios parse and validate") {
    const ScenarioConfig tb = load_config(kConfigDir + "/three_body_fix.cfg");
    CHECK(tb.name == "three-body-fix");
    CHECK(tb.bodies.size() == 3);
    CHECK(tb.bodies[1].id == "Earth");
    CHECK(tb.bodies[1].state0.r.x == doctest::Approx(-72168239.416));
    CHECK(tb.posdet.trials == 1000);
    CHECK_FALSE(tb.has_schedule);

    const ScenarioConfig bc = load_config(kConfigDir + "/beacon_campaign.cfg");
    CHECK(bc.has_schedule);
    CHECK(bc.schedule_beacons == std::vector<std::string>{"Earth", "Mars"});
    // the catalog epochs predate the scenario epoch; states bridge the gap
    CHECK(bc.bodies[0].epoch0.t == doctest::Approx(-278.0 * 86400.0));
    CHECK(norm(body_state(bc.bodies[0], Epoch{0.0}).r) ==
          doctest::Approx(constants::au_km).epsilon(0.02));
    const TrackingSchedule schedule = bc.assemble_schedule();
    CHECK(schedule.start().t == 0.0);
    CHECK(schedule.segments.front().kind == SegmentKind::Coast);
    CHECK(schedule.segments.front().t_end.t == 604800.0);
    CHECK(schedule.end().t == doctest::Approx(8.0 * 86400.0));

    const FilterSettings fs = bc.filter_settings();
    CHECK(fs.Q.rows() == 8);
    CHECK(fs.Q(0, 0) == 1e-12);
    CHECK(fs.Q(3, 7) == 1e-12);  // full matrix of ones
    CHECK(fs.R(0, 0) == doctest::Approx(std::pow(5.0 * constants::arcsec_to_rad, 2)));
    CHECK(fs.sigma_dt_s == doctest::Approx(1e5 / constants::c_light_km_s));
}

TEST_CASE("config loader: errors name the offending line or key") {
    const std::string dir = tmp_dir("config_errors");
    {
        std::ofstream out(dir + "/bad.cfg");
        out << "[scenario]\nname = x\nepoch0 = 2020-01-20\n\n[body B]\nstate = 1 2 3 4 5 6\n\n[truth]\nstate = 1 2 3 4 5 6\n\n[filter]\nbogus_key = 1\n";
    }
    try {
        load_config(dir + "/bad.cfg");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("bogus_key") != std::string::npos);
        CHECK(msg.find(":12:") != std::string::npos);
    }

    {
        std::ofstream out(dir + "/nobody.cfg");
        out << "[scenario]\nname = x\nepoch0 = 2020-01-20\n\n[truth]\nstate = 1 2 3 4 5 6\n";
    }
    CHECK_THROWS_AS(load_config(dir + "/nobody.cfg"), ConfigError);
}

TEST_CASE("run_truth: coast equals the conic, thrust arcs match the adaptive integrator") {
    const ScenarioConfig bc = load_config(kConfigDir + "/beacon_campaign.cfg");
    const TruthTrajectory truth = run_truth(bc);
    CHECK(truth.state_at(Epoch{0.0}) == bc.truth_state0);
    for (const double t : {3600.0, 86400.0, 4.0 * 86400.0, 7.5 * 86400.0}) {
        const StateVector conic = kepler_propagate(bc.truth_state0, t, bc.mu);
        CHECK(norm(truth.state_at(Epoch{t}).r - conic.r) < 1e-9);
    }

    const ScenarioConfig t1 = load_config(kConfigDir + "/target1.cfg");
    REQUIRE_FALSE(t1.thrust.arcs.empty());
    const TruthTrajectory powered = run_truth(t1);
    const double horizon = 7.0 * 86400.0;
    const StateVector ref =
        oracle::integrate_with_thrust(t1.truth_state0, 0.0, horizon, t1.mu, t1.thrust.arcs);
    CHECK(norm(powered.state_at(Epoch{horizon}).r - ref.r) < 1.0);
    // and inside the arc
    const double mid = 2.5 * 86400.0;
    const StateVector ref_mid =
        oracle::integrate_with_thrust(t1.truth_state0, 0.0, mid, t1.mu, t1.thrust.arcs);
    CHECK(norm(powered.state_at(Epoch{mid}).r - ref_mid.r) < 1.0);
}

TEST_CASE("schedule measurements: epochs sit inside track segments on the rate grid") {
    ScenarioConfig bc = load_config(kConfigDir + "/beacon_campaign.cfg");
    bc.cycles = 1;  // keep the unit test quick
    const std::vector<MeasurementRow> rows = synthesize_schedule_measurements(bc);
    const TrackingSchedule schedule = bc.assemble_schedule();
    CHECK(rows.size() == 433 + 346);
    for (const auto& row : rows) {
        CHECK(row.theta > -constants::pi);
        CHECK(row.theta <= constants::pi);
        CHECK(std::abs(row.phi) <= constants::pi / 2);
        bool inside = false;
        for (const auto& seg : schedule.segments) {
            if (seg.kind != SegmentKind::Track || seg.beacon_id != row.beacon_id) continue;
            if (row.epoch.t >= seg.t_start.t && row.epoch.t <= seg.t_end.t) {
                const double offset = (row.epoch.t - seg.t_start.t) * seg.rate_hz;
                inside = std::abs(offset - std::round(offset)) < 1e-9;
            }
        }
        CHECK(inside);
    }
}

TEST_CASE("run_posdet: internal synthesis and the measurement-log path agree") {
    ScenarioConfig tb = load_config(kConfigDir + "/three_body_fix.cfg");
    PosDetRunOptions options;
    options.trials = 25;
    const PosDetRunResult direct = run_posdet(tb, options);
    REQUIRE(direct.solutions.size() == 25);
    REQUIRE(direct.measurements.size() == 75);

    // round-trip the measurement log through the CSV format, then re-solve
    const std::string dir = tmp_dir("posdet_roundtrip");
    write_text_file(dir + "/m.csv", measurements_to_csv(direct.measurements, true));
    const std::vector<MeasurementRow> parsed = measurements_from_csv(dir + "/m.csv");
    REQUIRE(parsed.size() == 75);

    // a log without the truth column is equally solvable
    write_text_file(dir + "/m4.csv", measurements_to_csv(direct.measurements, false));
    const std::vector<MeasurementRow> truthless = measurements_from_csv(dir + "/m4.csv");
    REQUIRE(truthless.size() == 75);
    CHECK_FALSE(truthless.front().has_truth);
    CHECK(run_posdet_from_measurements(tb, truthless).solutions.size() == 25);
    const PosDetRunResult replay = run_posdet_from_measurements(tb, parsed);
    REQUIRE(replay.solutions.size() == 25);
    for (std::size_t i = 0; i < 25; ++i) {
        CHECK(replay.solutions[i].r.x == direct.solutions[i].r.x);
        CHECK(replay.solutions[i].delta_t == direct.solutions[i].delta_t);
        CHECK(replay.solutions[i].cost == direct.solutions[i].cost);
    }
    CHECK(posdet_summary_text(tb, replay.summary) == posdet_summary_text(tb, direct.summary));
}

TEST_CASE("run_posdet: --jobs style parallelism does not change results") {
    ScenarioConfig tb = load_config(kConfigDir + "/three_body_fix.cfg");
    PosDetRunOptions serial{{}, 40, 1};
    PosDetRunOptions parallel{{}, 40, 4};
    const PosDetRunResult a = run_posdet(tb, serial);
    const PosDetRunResult b = run_posdet(tb, parallel);
    CHECK(solutions_to_csv(a.solutions) == solutions_to_csv(b.solutions));
    CHECK(measurements_to_csv(a.measurements, true) == measurements_to_csv(b.measurements, true));
}

TEST_CASE("run_filter: noiseless consistency run stays within a kilometre of truth") {
    ScenarioConfig bc = load_config(kConfigDir + "/beacon_campaign.cfg");
    bc.noise.sigma_los_rad = 0.0;
    bc.cycles = 2;
    const FilterRunResult result = run_filter(bc);
    for (const auto& rec : result.records) {
        const double pos_err = std::sqrt(rec.err[0] * rec.err[0] + rec.err[1] * rec.err[1] + rec.err[2] * rec.err[2]);
        CHECK(pos_err < 1.0);
    }
}

TEST_CASE("run_filter: thrust arcs are modelled consistently through the coast") {
    ScenarioConfig t1 = load_config(kConfigDir + "/target1.cfg");
    REQUIRE_FALSE(t1.thrust.arcs.empty());
    t1.noise.sigma_los_rad = 0.0;
    t1.cycles = 1;
    const FilterRunResult result = run_filter(t1);
    for (const auto& rec : result.records) {
        const double pos_err = std::sqrt(rec.err[0] * rec.err[0] + rec.err[1] * rec.err[1] + rec.err[2] * rec.err[2]);
        CHECK(pos_err < 1.0);
    }
}

TEST_CASE("run_filter: record stream is time-ordered, tagged and PSD-audited") {
    ScenarioConfig bc = load_config(kConfigDir + "/beacon_campaign.cfg");
    bc.cycles = 1;
    EkfRunOptions options;
    options.audit_eigenvalues = true;
    const FilterRunResult result = run_filter(bc, options);
    REQUIRE_FALSE(result.records.empty());
    for (std::size_t i = 1; i < result.records.size(); ++i) {
        CHECK(result.records[i].t.t >= result.records[i - 1].t.t);
    }
    for (const auto& rec : result.records) {
        const bool known = rec.phase == "coast" || rec.phase == "slew" || rec.phase.rfind("track:", 0) == 0;
        CHECK(known);
    }
    CHECK(result.audit_min_eig_ratio > -1e-9);
    // measurement count: full Earth slot plus a slew-trimmed Mars slot
    CHECK(result.measurements.size() == 433 + 346);
}

TEST_CASE("run_scenario: same seed gives byte-identical outputs, report matches the original summary") {
    ScenarioConfig bc = load_config(kConfigDir + "/beacon_campaign.cfg");
    bc.cycles = 1;
    const std::string dir1 = tmp_dir("ekf_run1");
    const std::string dir2 = tmp_dir("ekf_run2");
    const std::string s1 = run_scenario(bc, ScenarioMode::Ekf, dir1);
    const std::string s2 = run_scenario(bc, ScenarioMode::Ekf, dir2);
    CHECK(s1 == s2);
    for (const char* file : {"/measurements.csv", "/history.csv", "/summary.txt", "/run_info.txt"}) {
        CHECK(read_text_file(dir1 + file) == read_text_file(dir2 + file));
    }

    // report recomputes the summary from the CSVs alone
    const std::string dir3 = tmp_dir("ekf_report");
    std::filesystem::copy(dir1 + "/history.csv", dir3 + "/history.csv");
    const std::string reported = report(bc, dir3);
    CHECK(reported == s1);
    CHECK(read_text_file(dir3 + "/summary.txt") == read_text_file(dir1 + "/summary.txt"));

    // and emits the plot-ready error/bounds table
    const CsvTable errors = read_csv(dir3 + "/errors.csv");
    CHECK(errors.header.front() == "t_s");
    CHECK(errors.header.size() == 1 + 2 * (6 + 2));
    std::vector<std::string> ids;
    CHECK(errors.rows.size() == history_from_csv(dir3 + "/history.csv", ids).size());
}

TEST_CASE("run_scenario: posdet mode writes the pinned solution columns and report agrees") {
    ScenarioConfig tb = load_config(kConfigDir + "/three_body_fix.cfg");
    const std::string dir = tmp_dir("posdet_mode");
    RunOverrides overrides;
    overrides.trials = 30;
    overrides.jobs = 2;
    const std::string summary = run_scenario(tb, ScenarioMode::PosDet, dir, overrides);
    const CsvTable table = read_csv(dir + "/solutions.csv");
    CHECK(table.header == std::vector<std::string>{"trial_id", "rx", "ry", "rz", "dt_1", "dt_2", "dt_3", "cost",
                                                   "iterations", "converged"});
    CHECK(table.rows.size() == 30);

    const std::string dir2 = tmp_dir("posdet_report");
    std::filesystem::copy(dir + "/solutions.csv", dir2 + "/solutions.csv");
    CHECK(report(tb, dir2) == summary);
    const CsvTable errors = read_csv(dir2 + "/errors.csv");
    CHECK(errors.header == std::vector<std::string>{"trial_id", "err_rx", "err_ry", "err_rz", "err_dt_1",
                                                    "err_dt_2", "err_dt_3"});
    CHECK(errors.rows.size() == 30);
}

TEST_CASE("run_scenario: synth mode emits the measurement log an ekf run would consume") {
    ScenarioConfig bc = load_config(kConfigDir + "/beacon_campaign.cfg");
    bc.cycles = 1;
    const std::string synth_dir = tmp_dir("synth_mode");
    run_scenario(bc, ScenarioMode::Synth, synth_dir);
    const std::string ekf_dir = tmp_dir("synth_vs_ekf");
    run_scenario(bc, ScenarioMode::Ekf, ekf_dir);
    CHECK(read_text_file(synth_dir + "/measurements.csv") == read_text_file(ekf_dir + "/measurements.csv"));
}

TEST_CASE("history CSV round-trips records losslessly") {
    ScenarioConfig bc = load_config(kConfigDir + "/beacon_campaign.cfg");
    bc.cycles = 1;
    bc.nav_start_s = 0.0;  // skip the coast for speed; track + slew only
    const FilterRunResult result = run_filter(bc);
    const std::string dir = tmp_dir("history_roundtrip");
    write_text_file(dir + "/history.csv", history_to_csv(result.records, result.beacon_ids));
    std::vector<std::string> ids;
    const std::vector<FilterRecord> parsed = history_from_csv(dir + "/history.csv", ids);
    REQUIRE(ids == result.beacon_ids);
    REQUIRE(parsed.size() == result.records.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        CHECK(parsed[i].t.t == result.records[i].t.t);
        CHECK(parsed[i].xhat == result.records[i].xhat);
        CHECK(parsed[i].sigma3 == result.records[i].sigma3);
        CHECK(parsed[i].err == result.records[i].err);
        CHECK(parsed[i].phase == result.records[i].phase);
    }
}

TEST_CASE("summary statistics recomputed from rows match the returned summary") {
    ScenarioConfig tb = load_config(kConfigDir + "/three_body_fix.cfg");
    PosDetRunOptions options;
    options.trials = 50;
    const PosDetRunResult run = run_posdet(tb, options);
    const PosDetRunSummary recomputed = compute_posdet_summary(tb, run.solutions);
    CHECK(posdet_summary_text(tb, recomputed) == posdet_summary_text(tb, run.summary));
}
