#include <algorithm>
#include <filesystem>
#include <sstream>

#include "dsnav/csv.hpp"
#include "dsnav/errors.hpp"
#include "dsnav/kernels.hpp"
#include "dsnav/scenario.hpp"

namespace dsnav {

std::string measurements_to_csv(const std::vector<MeasurementRow>& rows, bool with_truth) {
    std::ostringstream out;
    out << "epoch_s,beacon_id,theta_rad,phi_rad";
    if (with_truth) out << ",true_delta_t_s";
    out << "\n";
    for (const auto& r : rows) {
        out << format_double(r.epoch.t) << ',' << r.beacon_id << ',' << format_double(r.theta) << ','
            << format_double(r.phi);
        if (with_truth) out << ',' << format_double(r.true_delta_t_s);
        out << "\n";
    }
    return out.str();
}

std::vector<MeasurementRow> measurements_from_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    const std::size_t c_epoch = table.column("epoch_s");
    const std::size_t c_id = table.column("beacon_id");
    const std::size_t c_theta = table.column("theta_rad");
    const std::size_t c_phi = table.column("phi_rad");
    const bool has_truth =
        std::find(table.header.begin(), table.header.end(), "true_delta_t_s") != table.header.end();
    const std::size_t c_truth = has_truth ? table.column("true_delta_t_s") : 0;
    std::vector<MeasurementRow> rows;
    rows.reserve(table.rows.size());
    for (const auto& fields : table.rows) {
        MeasurementRow r;
        r.epoch = Epoch{parse_double(fields.at(c_epoch))};
        r.beacon_id = fields.at(c_id);
        r.theta = parse_double(fields.at(c_theta));
        r.phi = parse_double(fields.at(c_phi));
        if (has_truth) {
            r.true_delta_t_s = parse_double(fields.at(c_truth));
            r.has_truth = true;
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

const char* kStateNames[6] = {"rx", "ry", "rz", "vx", "vy", "vz"};

void append_block(std::ostringstream& out, const std::string& prefix, const std::vector<std::string>& beacon_ids) {
    for (const auto* name : kStateNames) out << ',' << prefix << '_' << name;
    for (const auto& id : beacon_ids) out << ',' << prefix << "_dt_" << id;
}

}  // namespace

std::string history_to_csv(const std::vector<FilterRecord>& records, const std::vector<std::string>& beacon_ids) {
    std::ostringstream out;
    out << "t_s";
    append_block(out, "xhat", beacon_ids);
    append_block(out, "sig3", beacon_ids);
    append_block(out, "err", beacon_ids);
    out << ",phase\n";
    for (const auto& rec : records) {
        out << format_double(rec.t.t);
        for (const double v : rec.xhat) out << ',' << format_double(v);
        for (const double v : rec.sigma3) out << ',' << format_double(v);
        for (const double v : rec.err) out << ',' << format_double(v);
        out << ',' << rec.phase << "\n";
    }
    return out.str();
}

std::vector<FilterRecord> history_from_csv(const std::string& path, std::vector<std::string>& beacon_ids_out) {
    const CsvTable table = read_csv(path);
    beacon_ids_out.clear();
    const std::string dt_prefix = "xhat_dt_";
    for (const auto& name : table.header) {
        if (name.rfind(dt_prefix, 0) == 0) beacon_ids_out.push_back(name.substr(dt_prefix.size()));
    }
    const std::size_t dim = 6 + beacon_ids_out.size();
    if (table.header.size() != 2 + 3 * dim) throw IoError("history CSV '" + path + "' has unexpected column count");

    std::vector<FilterRecord> records;
    records.reserve(table.rows.size());
    for (const auto& fields : table.rows) {
        if (fields.size() != table.header.size()) throw IoError("history CSV row width mismatch in '" + path + "'");
        FilterRecord rec;
        rec.t = Epoch{parse_double(fields[0])};
        rec.xhat.resize(dim);
        rec.sigma3.resize(dim);
        rec.err.resize(dim);
        for (std::size_t i = 0; i < dim; ++i) rec.xhat[i] = parse_double(fields[1 + i]);
        for (std::size_t i = 0; i < dim; ++i) rec.sigma3[i] = parse_double(fields[1 + dim + i]);
        for (std::size_t i = 0; i < dim; ++i) rec.err[i] = parse_double(fields[1 + 2 * dim + i]);
        rec.phase = fields.back();
        records.push_back(std::move(rec));
    }
    return records;
}

std::string solutions_to_csv(const std::vector<PosDetTrialRow>& rows) {
    std::ostringstream out;
    const std::size_t n = rows.empty() ? 0 : rows.front().delta_t.size();
    out << "trial_id,rx,ry,rz";
    for (std::size_t i = 1; i <= n; ++i) out << ",dt_" << i;
    out << ",cost,iterations,converged\n";
    for (const auto& r : rows) {
        out << r.trial << ',' << format_double(r.r.x) << ',' << format_double(r.r.y) << ',' << format_double(r.r.z);
        for (const double dt : r.delta_t) out << ',' << format_double(dt);
        out << ',' << format_double(r.cost) << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << "\n";
    }
    return out.str();
}

std::vector<PosDetTrialRow> solutions_from_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    std::size_t n = 0;
    for (const auto& name : table.header) {
        if (name.rfind("dt_", 0) == 0) ++n;
    }
    if (table.header.size() != 7 + n) throw IoError("solutions CSV '" + path + "' has unexpected column count");
    std::vector<PosDetTrialRow> rows;
    rows.reserve(table.rows.size());
    for (const auto& fields : table.rows) {
        if (fields.size() != table.header.size()) throw IoError("solutions CSV row width mismatch in '" + path + "'");
        PosDetTrialRow r;
        r.trial = static_cast<int>(parse_double(fields[0]));
        r.r = {parse_double(fields[1]), parse_double(fields[2]), parse_double(fields[3])};
        r.delta_t.resize(n);
        for (std::size_t i = 0; i < n; ++i) r.delta_t[i] = parse_double(fields[4 + i]);
        r.cost = parse_double(fields[4 + n]);
        r.iterations = static_cast<int>(parse_double(fields[5 + n]));
        r.converged = parse_double(fields[6 + n]) != 0.0;
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string ekf_summary_text(const ScenarioConfig& config, const EkfRunSummary& summary,
                             const std::vector<std::string>& beacon_ids) {
    std::ostringstream out;
    out << "scenario = " << config.name << "\n";
    out << "mode = ekf\n";
    out << "records = " << summary.records << "\n";
    out << "converged = " << (summary.converged ? 1 : 0) << "\n";
    out << "convergence_t_s = " << format_double(summary.convergence_t_s) << "\n";
    const char* names[6] = {"rx_km", "ry_km", "rz_km", "vx_km_s", "vy_km_s", "vz_km_s"};
    for (int i = 0; i < 6; ++i)
        out << "final_sig3_" << names[i] << " = " << format_double(summary.final_sigma3[i]) << "\n";
    for (std::size_t i = 0; i < beacon_ids.size(); ++i)
        out << "final_sig3_dt_" << beacon_ids[i] << "_s = " << format_double(summary.final_sigma3[6 + i]) << "\n";
    for (int i = 0; i < 6; ++i)
        out << "final_abs_err_" << names[i] << " = " << format_double(summary.final_abs_err[i]) << "\n";
    for (std::size_t i = 0; i < beacon_ids.size(); ++i)
        out << "final_abs_err_dt_" << beacon_ids[i] << "_s = " << format_double(summary.final_abs_err[6 + i]) << "\n";
    out << "max_post_sig3_pos_km = " << format_double(summary.max_post_sigma3_pos_km) << "\n";
    out << "max_post_sig3_vel_km_s = " << format_double(summary.max_post_sigma3_vel_km_s) << "\n";
    out << "coverage_pos_vel = " << format_double(summary.coverage_pos_vel) << "\n";
    out << "final_within_bounds = " << (summary.final_within_bounds ? 1 : 0) << "\n";
    return out.str();
}

std::string posdet_summary_text(const ScenarioConfig& config, const PosDetRunSummary& summary) {
    std::ostringstream out;
    out << "scenario = " << config.name << "\n";
    out << "mode = posdet\n";
    out << "trials = " << summary.trials << "\n";
    out << "converged = " << summary.converged << "\n";
    out << "fraction_in_envelope = " << format_double(summary.fraction_in_envelope) << "\n";
    out << "pos_envelope_km = " << format_double(config.posdet.pos_envelope_km) << "\n";
    out << "dt_envelope_s = " << format_double(config.posdet.dt_envelope_s) << "\n";
    out << "max_abs_err_pos_km = " << format_double(summary.max_abs_err_pos_km) << "\n";
    out << "max_abs_err_dt_s = " << format_double(summary.max_abs_err_dt_s) << "\n";
    out << "p99_abs_err_pos_km = " << format_double(summary.p99_abs_err_pos_km) << "\n";
    out << "p99_abs_err_dt_s = " << format_double(summary.p99_abs_err_dt_s) << "\n";
    out << "mean_iterations = " << format_double(summary.mean_iterations) << "\n";
    return out.str();
}

namespace {

void write_run_info(const ScenarioConfig& config, const std::string& dir, const char* mode,
                    std::uint64_t seed, std::optional<int> trials) {
    std::ostringstream out;
    out << "scenario = " << config.name << "\n";
    out << "mode = " << mode << "\n";
    out << "seed = " << seed << "\n";
    if (trials) out << "trials = " << *trials << "\n";
    out << "kernels = " << kernels::ops().name << "\n";
    write_text_file(dir + "/run_info.txt", out.str());
}

}  // namespace

std::string run_scenario(const ScenarioConfig& config, ScenarioMode mode, const std::string& out_dir,
                         const RunOverrides& overrides) {
    std::filesystem::create_directories(out_dir);
    const std::uint64_t seed = overrides.seed.value_or(config.noise.seed);

    switch (mode) {
        case ScenarioMode::Synth: {
            std::vector<MeasurementRow> rows;
            if (config.has_schedule) {
                rows = synthesize_schedule_measurements(config, seed);
            } else {
                const PosDetRunResult r = run_posdet(config, {overrides.seed, overrides.trials, overrides.jobs});
                rows = r.measurements;
            }
            write_text_file(out_dir + "/measurements.csv", measurements_to_csv(rows, true));
            write_run_info(config, out_dir, "synth", seed, std::nullopt);
            return {};
        }
        case ScenarioMode::PosDet: {
            const PosDetRunResult r = run_posdet(config, {overrides.seed, overrides.trials, overrides.jobs});
            write_text_file(out_dir + "/measurements.csv", measurements_to_csv(r.measurements, true));
            write_text_file(out_dir + "/solutions.csv", solutions_to_csv(r.solutions));
            const std::string summary = posdet_summary_text(config, r.summary);
            write_text_file(out_dir + "/summary.txt", summary);
            write_run_info(config, out_dir, "posdet", seed, static_cast<int>(r.summary.trials));
            return summary;
        }
        case ScenarioMode::Ekf: {
            const FilterRunResult r = run_filter(config, {overrides.seed, false});
            write_text_file(out_dir + "/measurements.csv", measurements_to_csv(r.measurements, true));
            write_text_file(out_dir + "/history.csv", history_to_csv(r.records, r.beacon_ids));
            const std::string summary = ekf_summary_text(config, r.summary, r.beacon_ids);
            write_text_file(out_dir + "/summary.txt", summary);
            write_run_info(config, out_dir, "ekf", seed, std::nullopt);
            return summary;
        }
    }
    throw Error("run_scenario: unknown mode");
}

namespace {

// Plot-ready view of a filter run: time, error components, +-3-sigma
// bounds. Any plotting tool can reproduce the error/envelope figures from
// it directly.
std::string ekf_errors_csv(const std::vector<FilterRecord>& records, const std::vector<std::string>& beacon_ids) {
    std::ostringstream out;
    out << "t_s";
    append_block(out, "err", beacon_ids);
    append_block(out, "sig3", beacon_ids);
    out << "\n";
    for (const auto& rec : records) {
        out << format_double(rec.t.t);
        for (const double v : rec.err) out << ',' << format_double(v);
        for (const double v : rec.sigma3) out << ',' << format_double(v);
        out << "\n";
    }
    return out.str();
}

// Per-trial snapshot-fix errors against the configured truth.
std::string posdet_errors_csv(const ScenarioConfig& config, const std::vector<PosDetTrialRow>& rows) {
    const TruthTrajectory truth = run_truth(config);
    const Epoch t = config.posdet.snapshot_epoch;
    const StateVector truth_state = truth.state_at(t);
    std::vector<double> true_dt(config.bodies.size());
    for (std::size_t i = 0; i < config.bodies.size(); ++i) {
        true_dt[i] = solve_light_time(truth_state.r, t, config.bodies[i], config.c).delta_t_s;
    }
    std::ostringstream out;
    out << "trial_id,err_rx,err_ry,err_rz";
    for (std::size_t i = 1; i <= config.bodies.size(); ++i) out << ",err_dt_" << i;
    out << "\n";
    for (const auto& row : rows) {
        out << row.trial << ',' << format_double(row.r.x - truth_state.r.x) << ','
            << format_double(row.r.y - truth_state.r.y) << ',' << format_double(row.r.z - truth_state.r.z);
        for (std::size_t i = 0; i < true_dt.size() && i < row.delta_t.size(); ++i)
            out << ',' << format_double(row.delta_t[i] - true_dt[i]);
        out << "\n";
    }
    return out.str();
}

}  // namespace

std::string report(const ScenarioConfig& config, const std::string& dir) {
    namespace fs = std::filesystem;
    if (fs::exists(dir + "/history.csv")) {
        std::vector<std::string> beacon_ids;
        const std::vector<FilterRecord> records = history_from_csv(dir + "/history.csv", beacon_ids);
        const EkfRunSummary summary = compute_ekf_summary(records, config.pos_bound_km, config.vel_bound_km_s);
        const std::string text = ekf_summary_text(config, summary, beacon_ids);
        write_text_file(dir + "/errors.csv", ekf_errors_csv(records, beacon_ids));
        write_text_file(dir + "/summary.txt", text);
        return text;
    }
    if (fs::exists(dir + "/solutions.csv")) {
        const std::vector<PosDetTrialRow> rows = solutions_from_csv(dir + "/solutions.csv");
        const PosDetRunSummary summary = compute_posdet_summary(config, rows);
        const std::string text = posdet_summary_text(config, summary);
        write_text_file(dir + "/errors.csv", posdet_errors_csv(config, rows));
        write_text_file(dir + "/summary.txt", text);
        return text;
    }
    throw IoError("report: no history.csv or solutions.csv in '" + dir + "'");
}

}  // namespace dsnav
