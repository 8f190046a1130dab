// qres: run reservoir experiments from JSON configs and aggregate results.
//
//   qres run <config.json|preset> [--output DIR] [--workers N]
//   qres plotdata <results.csv> --figure <tag> [--out DIR]
//   qres presets list
//   qres presets show <name>
//
// Exit codes: 0 success, 1 config or usage error, 2 some cells failed.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "qres/error.hpp"
#include "qres/experiment.hpp"

namespace ex = qres::experiment;

namespace {

ex::ExperimentConfig load(const std::string& source) {
    if (std::filesystem::exists(source)) return ex::load_config(source);
    for (const auto& p : ex::preset_list()) {
        if (p.name == source) return ex::parse_config(ex::preset(source));
    }
    throw qres::ConfigError("", "no config file or preset named '" + source + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-shot quantum reservoir computing experiments"};
    app.set_version_flag("--version", ex::version());
    app.require_subcommand(1);

    std::string config_source, output_dir;
    std::size_t workers = 0;
    bool workers_set = false;
    auto* run = app.add_subcommand("run", "Run an experiment config or a preset by name");
    run->add_option("config", config_source, "Config file or preset name")->required();
    run->add_option("--output,-o", output_dir, "Output directory (overrides config and QRES_OUTPUT_DIR)");
    run->add_option("--workers,-j", workers, "Cell worker threads (0 = all cores)")
        ->each([&](const std::string&) { workers_set = true; });

    std::string results_path, figure_tag, plot_out;
    auto* plot = app.add_subcommand("plotdata", "Aggregate results into plot-ready CSV");
    plot->add_option("results", results_path, "results.csv written by `run`")->required();
    plot->add_option("--figure,-f", figure_tag, "shot-sweep, snr-bars, mse-vs-states or ke-reconstruction")
        ->required();
    plot->add_option("--out", plot_out, "Directory for plot_<figure>.csv (default: next to results)");

    auto* presets = app.add_subcommand("presets", "List or print the built-in configs");
    presets->require_subcommand(1);
    auto* list = presets->add_subcommand("list", "List preset names");
    std::string show_name;
    auto* show = presets->add_subcommand("show", "Print a preset as JSON");
    show->add_option("name", show_name)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*run) {
            ex::ExperimentConfig cfg = load(config_source);
            if (!output_dir.empty()) cfg.output = output_dir;
            if (workers_set) cfg.workers = workers;
            const auto summary = ex::run_experiment(cfg);
            std::cout << summary.output_dir.string() << ": " << summary.cells << " cells, "
                      << summary.failed << " failed\n";
            return summary.exit_code();
        }
        if (*plot) {
            const ex::Figure fig = ex::parse_figure(figure_tag);
            std::cout << ex::emit_plotdata(results_path, fig, plot_out).string() << '\n';
            return 0;
        }
        if (*list) {
            for (const auto& p : ex::preset_list()) std::cout << p.name << "\t" << p.description << '\n';
            return 0;
        }
        if (*show) {
            std::cout << ex::preset(show_name).dump(2) << '\n';
            return 0;
        }
    } catch (const qres::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const qres::InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
