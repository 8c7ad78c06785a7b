#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fatnode/calibrate.hpp"
#include "fatnode/errors.hpp"
#include "fatnode/json_io.hpp"
#include "fatnode/manifest.hpp"
#include "fatnode/matcher.hpp"
#include "fatnode/simulator.hpp"
#include "fatnode/sweep.hpp"

#ifndef FATNODE_DEFAULT_PRESET_DIR
#define FATNODE_DEFAULT_PRESET_DIR "presets"
#endif

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitUnderdetermined = 4;

std::string preset_dir() {
    if (const char* env = std::getenv("FATNODE_PRESET_DIR")) return env;
    return FATNODE_DEFAULT_PRESET_DIR;
}

struct CommonArgs {
    std::string config_path;
    std::string preset;
    std::string out_path;

    std::string resolve_config() const {
        if (!config_path.empty() && !preset.empty())
            throw fatnode::ValidationError("give either a config path or --preset, not both");
        if (!config_path.empty()) return config_path;
        if (!preset.empty()) {
            std::string name = preset;
            if (name.size() < 5 || name.substr(name.size() - 5) != ".json") name += ".json";
            return preset_dir() + "/" + name;
        }
        throw fatnode::ValidationError("no config given (pass a path or --preset NAME)");
    }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("config", args.config_path, "JSON config path");
    cmd->add_option("--preset", args.preset,
                    "bundled preset name (see FATNODE_PRESET_DIR)");
    cmd->add_option("--out", args.out_path, "output path")->required();
}

int cmd_match(const CommonArgs& args) {
    const std::string config_path = args.resolve_config();
    const fatnode::MatchConfig config =
        fatnode::match_config_from_json(fatnode::parse_json_file(config_path));

    const fatnode::MatchOutcome outcome =
        fatnode::pool_match(config.jobs, config.queue, config.node, config.profile);

    const std::string rejections_path = args.out_path + ".rejections.jsonl";
    const fatnode::RunManifest manifest = fatnode::make_manifest(
        "match", {config_path}, {args.out_path, rejections_path});

    fatnode::json doc;
    doc["manifest"] = fatnode::to_json(manifest);
    doc.update(fatnode::to_json(outcome));
    fatnode::write_file(args.out_path, doc.dump(2) + "\n");

    std::string jsonl;
    for (const auto& r : outcome.rejections) {
        fatnode::json line;
        line["job_id"] = r.job_id;
        line["reason"] = r.reason;
        jsonl += line.dump() + "\n";
    }
    fatnode::write_file(rejections_path, jsonl);

    std::cout << "matched " << outcome.allocation.by_job.size() << " job(s), rejected "
              << outcome.rejections.size() << ", free " << outcome.allocation.free.count()
              << "/" << outcome.allocation.nproc << " processors\n";
    return kExitOk;
}

int cmd_sweep(const CommonArgs& args, const std::string& format) {
    const std::string config_path = args.resolve_config();
    const fatnode::SweepConfig config =
        fatnode::sweep_config_from_json(fatnode::parse_json_file(config_path));

    const fatnode::SweepResult result =
        fatnode::run_sweep(config.node, config.profile, config.grid);
    const fatnode::SweepRow& best = fatnode::best_configuration(result);

    const std::string manifest_path = args.out_path + ".manifest.json";
    const fatnode::RunManifest manifest = fatnode::make_manifest(
        "sweep", {config_path}, {args.out_path, manifest_path});

    fatnode::write_file(args.out_path, format == "json" ? fatnode::emit_json(result)
                                                        : fatnode::emit_csv(result));
    fatnode::write_file(manifest_path,
                        fatnode::to_json(manifest).dump(2) + "\n");

    std::cout << "best: " << fatnode::format_row_csv(best) << "\n";
    return kExitOk;
}

int cmd_simulate(const CommonArgs& args) {
    const std::string config_path = args.resolve_config();
    const fatnode::SimConfig config =
        fatnode::sim_config_from_json(fatnode::parse_json_file(config_path));

    const fatnode::SimResult result = fatnode::run(config);

    const std::string trace_path = args.out_path + ".trace.jsonl";
    const std::string report_path = args.out_path + ".report.json";
    const fatnode::RunManifest manifest =
        fatnode::make_manifest("simulate", {config_path}, {trace_path, report_path});

    fatnode::write_file(trace_path, fatnode::trace_to_jsonl(result.trace));
    fatnode::json doc;
    doc["manifest"] = fatnode::to_json(manifest);
    doc.update(fatnode::to_json(result.report));
    fatnode::write_file(report_path, doc.dump(2) + "\n");

    std::cout << "completed " << result.report.total_events << " event(s) in "
              << result.report.span_min << " min ("
              << result.report.throughput_epm << " events/min)\n";
    return kExitOk;
}

int cmd_calibrate(const CommonArgs& args) {
    const std::string config_path = args.resolve_config();
    const fatnode::CalibrationConfig config =
        fatnode::calibration_config_from_json(fatnode::parse_json_file(config_path));

    const fatnode::CalibrationResult result = fatnode::calibrate(
        config.node, config.profile, config.free_params, config.observations);

    const fatnode::RunManifest manifest =
        fatnode::make_manifest("calibrate", {config_path}, {args.out_path});

    fatnode::json doc;
    doc["manifest"] = fatnode::to_json(manifest);
    doc.update(fatnode::to_json(result));
    fatnode::write_file(args.out_path, doc.dump(2) + "\n");

    std::cout << "fitted " << config.free_params.size() << " parameter(s), rms relative residual "
              << result.rms_relative_residual << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fat-node workload placement: match, simulate, sweep, calibrate"};
    app.set_version_flag("--version", std::string(fatnode::kToolVersion));
    app.require_subcommand(1);

    CommonArgs match_args, sweep_args, sim_args, calib_args;
    std::string sweep_format = "csv";

    CLI::App* match = app.add_subcommand("match", "partition a node among queued jobs");
    add_common(match, match_args);

    CLI::App* sweep = app.add_subcommand(
        "sweep", "evaluate every (instances x workers) configuration");
    add_common(sweep, sweep_args);
    sweep->add_option("--format", sweep_format, "table format")
        ->check(CLI::IsMember({"csv", "json"}));

    CLI::App* simulate =
        app.add_subcommand("simulate", "discrete-event run of a pilot on one node");
    add_common(simulate, sim_args);

    CLI::App* calibrate =
        app.add_subcommand("calibrate", "fit profile parameters to observed rates");
    add_common(calibrate, calib_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (match->parsed()) return cmd_match(match_args);
        if (sweep->parsed()) return cmd_sweep(sweep_args, sweep_format);
        if (simulate->parsed()) return cmd_simulate(sim_args);
        if (calibrate->parsed()) return cmd_calibrate(calib_args);
    } catch (const fatnode::UnderdeterminedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnderdetermined;
    } catch (const fatnode::InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const fatnode::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
