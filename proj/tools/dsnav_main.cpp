// dsnav: scenario-driven deep-space optical navigation simulator.
//
//   dsnav synth  --config cfg [--out dir] [--seed N]            measurement CSV only
//   dsnav posdet --config cfg [--measurements log.csv] [...]    snapshot position fixes
//   dsnav ekf    --config cfg [...]                             full filter campaign
//   dsnav report --config cfg --out dir                         recompute summary from CSVs

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dsnav/csv.hpp"
#include "dsnav/errors.hpp"
#include "dsnav/scenario.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    int jobs = 1;
    bool verbose = false;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_trials) {
    cmd->add_option("--config", args.config_path, "scenario config file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out_dir, "output directory (default: config [output] dir)");
    cmd->add_option("--seed", args.seed, "override the scenario seed");
    cmd->add_option("--jobs", args.jobs, "worker threads for independent trials")->check(CLI::PositiveNumber);
    if (with_trials) cmd->add_option("--trials", args.trials, "Monte-Carlo trial count override");
    cmd->add_flag("-v,--verbose", args.verbose, "print the full summary");
    cmd->add_flag("-q,--quiet", args.quiet, "suppress normal output");
}

std::string resolve_out(const CommonArgs& args, const dsnav::ScenarioConfig& config) {
    return args.out_dir.empty() ? config.out_dir : args.out_dir;
}

void emit(const CommonArgs& args, const std::string& out_dir, const std::string& summary) {
    if (args.quiet) return;
    if (args.verbose && !summary.empty()) {
        std::cout << summary;
    }
    std::cout << "wrote " << out_dir << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deep-space optical navigation simulator"};
    app.require_subcommand(1);

    CommonArgs synth_args, posdet_args, ekf_args, report_args;
    std::string measurements_path;

    CLI::App* synth = app.add_subcommand("synth", "synthesize the measurement log only");
    add_common(synth, synth_args, true);

    CLI::App* posdet = app.add_subcommand("posdet", "snapshot position determination (Monte-Carlo or from a log)");
    add_common(posdet, posdet_args, true);
    posdet->add_option("--measurements", measurements_path, "solve observation sets from this measurement CSV")
        ->check(CLI::ExistingFile);

    CLI::App* ekf = app.add_subcommand("ekf", "run the Kalman-filter campaign");
    add_common(ekf, ekf_args, false);

    CLI::App* report = app.add_subcommand("report", "recompute summary statistics from an output directory");
    add_common(report, report_args, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            const auto config = dsnav::load_config(synth_args.config_path);
            const std::string out = resolve_out(synth_args, config);
            dsnav::run_scenario(config, dsnav::ScenarioMode::Synth, out,
                                {synth_args.seed, synth_args.trials, synth_args.jobs});
            emit(synth_args, out, {});
        } else if (posdet->parsed()) {
            const auto config = dsnav::load_config(posdet_args.config_path);
            const std::string out = resolve_out(posdet_args, config);
            if (!measurements_path.empty()) {
                const auto rows = dsnav::measurements_from_csv(measurements_path);
                const auto result = dsnav::run_posdet_from_measurements(config, rows);
                std::filesystem::create_directories(out);
                dsnav::write_text_file(out + "/solutions.csv", dsnav::solutions_to_csv(result.solutions));
                const std::string summary = dsnav::posdet_summary_text(config, result.summary);
                dsnav::write_text_file(out + "/summary.txt", summary);
                emit(posdet_args, out, summary);
            } else {
                const std::string summary = dsnav::run_scenario(config, dsnav::ScenarioMode::PosDet, out,
                                                                {posdet_args.seed, posdet_args.trials, posdet_args.jobs});
                emit(posdet_args, out, summary);
            }
        } else if (ekf->parsed()) {
            const auto config = dsnav::load_config(ekf_args.config_path);
            const std::string out = resolve_out(ekf_args, config);
            const std::string summary =
                dsnav::run_scenario(config, dsnav::ScenarioMode::Ekf, out, {ekf_args.seed, std::nullopt, 1});
            emit(ekf_args, out, summary);
        } else if (report->parsed()) {
            const auto config = dsnav::load_config(report_args.config_path);
            const std::string out = resolve_out(report_args, config);
            const std::string summary = dsnav::report(config, out);
            emit(report_args, out, summary);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
