#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rfsense/baseline.hpp"
#include "rfsense/detector.hpp"
#include "rfsense/errors.hpp"
#include "rfsense/mapping.hpp"
#include "rfsense/simulate.hpp"
#include "rfsense/trace_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;  // validation / parse failures
constexpr int kExitIo = 2;       // filesystem failures

void run_simulate(const std::string& scenario_path, const std::string& fixture_id,
                  bool seed_given, std::uint64_t seed, const std::string& out_path) {
    if (scenario_path.empty() == fixture_id.empty()) {
        throw rfsense::ValidationError("simulate needs exactly one of --scenario or --fixture");
    }
    rfsense::Scenario scenario = fixture_id.empty()
                                     ? rfsense::load_scenario(scenario_path)
                                     : rfsense::fixture_scenario(fixture_id);
    if (seed_given) {
        scenario.seed = seed;
    }
    rfsense::write_trace_file(out_path, rfsense::simulate(scenario));
}

void run_calibrate(const std::string& trace_path, std::size_t window) {
    const auto samples = rfsense::read_trace_file(trace_path);
    std::map<rfsense::Bssid, std::vector<rfsense::RssiSample>> streams;
    for (const auto& s : samples) {
        streams[s.bssid].push_back(s);
    }
    if (streams.empty()) {
        throw rfsense::CalibrationError("trace " + trace_path + " contains no samples");
    }
    std::cout << "bssid,level_dbm,spread_db\n";
    for (const auto& [bssid, stream] : streams) {
        const rfsense::Baseline baseline = rfsense::calibrate(stream, window);
        char row[96];
        std::snprintf(row, sizeof(row), "%s,%.2f,%.2f\n", bssid.to_string().c_str(),
                      baseline.level_dbm, baseline.spread_db);
        std::cout << row;
    }
}

void run_detect(const std::string& trace_path, const std::string& config_path,
                const std::string& out_path, const std::string& plot_path) {
    const auto samples = rfsense::read_trace_file(trace_path);
    rfsense::DetectOptions options;
    if (!config_path.empty()) {
        options = rfsense::load_detect_options(config_path);
    }
    std::vector<rfsense::PlotRow> plot_rows;
    const auto events = rfsense::detect_trace(samples, options.config, options.baseline_window,
                                              options.min_calibration,
                                              plot_path.empty() ? nullptr : &plot_rows);
    rfsense::write_events_file(out_path, events);
    if (!plot_path.empty()) {
        rfsense::write_plot_csv_file(plot_path, plot_rows);
    }
}

void run_map(const std::string& manifest_path, const std::string& model_path,
             const std::string& out_prefix) {
    const rfsense::SweepManifest manifest = rfsense::load_sweep_manifest(manifest_path);
    const rfsense::PathLossModel model = rfsense::load_path_loss(model_path);
    const rfsense::AttenuationMap map =
        rfsense::build_map(manifest.points, model, manifest.cell_size_m);
    rfsense::write_map_file(map, out_prefix + ".csv", rfsense::MapFormat::csv);
    rfsense::write_map_file(map, out_prefix + ".pgm", rfsense::MapFormat::pgm);
}

void run_convert(const std::string& in_path, const std::string& out_path) {
    rfsense::write_trace_file(out_path, rfsense::read_trace_file(in_path));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Passive Wi-Fi RSSI motion sensing: simulate, detect, map"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate",
                                   "Generate a trace from a scenario file or a bundled fixture");
    std::string sim_scenario, sim_fixture, sim_out;
    std::uint64_t sim_seed = 0;
    sim->add_option("--scenario", sim_scenario, "Scenario JSON file");
    sim->add_option("--fixture", sim_fixture, "Bundled fixture id");
    sim->add_option("--out", sim_out, "Output trace (.csv or .jsonl)")->required();
    auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "Noise seed (default: scenario's)");

    auto* cal = app.add_subcommand("calibrate", "Print per-BSSID baseline level and spread");
    std::string cal_trace;
    std::size_t cal_window = rfsense::kDefaultBaselineWindow;
    cal->add_option("--trace", cal_trace, "Input trace")->required();
    cal->add_option("--window", cal_window, "Samples per baseline window");

    auto* det = app.add_subcommand("detect", "Detect motion events in a trace");
    std::string det_trace, det_config, det_out, det_plot;
    det->add_option("--trace", det_trace, "Input trace")->required();
    det->add_option("--config", det_config, "Detector config JSON");
    det->add_option("--out", det_out, "Output events (JSON lines)")->required();
    det->add_option("--plot-data", det_plot,
                    "Also write per-sample baseline/event CSV for plotting");

    auto* map_cmd = app.add_subcommand("map", "Build a 2D excess-attenuation map from sweeps");
    std::string map_manifest, map_model, map_out;
    map_cmd->add_option("--manifest", map_manifest, "Sweep manifest JSON")->required();
    map_cmd->add_option("--model", map_model, "Path-loss model JSON")->required();
    map_cmd->add_option("--out", map_out, "Output prefix (writes <prefix>.csv and <prefix>.pgm)")
        ->required();

    auto* conv = app.add_subcommand("convert", "Convert a trace between csv and jsonl");
    std::string conv_in, conv_out;
    conv->add_option("--in", conv_in, "Input trace")->required();
    conv->add_option("--out", conv_out, "Output trace")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help or the parse diagnostic
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (sim->parsed()) {
            run_simulate(sim_scenario, sim_fixture, sim_seed_opt->count() > 0, sim_seed, sim_out);
        } else if (cal->parsed()) {
            run_calibrate(cal_trace, cal_window);
        } else if (det->parsed()) {
            run_detect(det_trace, det_config, det_out, det_plot);
        } else if (map_cmd->parsed()) {
            run_map(map_manifest, map_model, map_out);
        } else if (conv->parsed()) {
            run_convert(conv_in, conv_out);
        }
    } catch (const rfsense::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const rfsense::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    return kExitOk;
}
