#pragma once

// Config-driven experiment runner: data generation, reservoir, optional
// denoising, ridge readout and metrics for every (architecture, shots, seed)
// cell, written as CSV.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qres/denoise.hpp"
#include "qres/dynamics.hpp"
#include "qres/qsim.hpp"
#include "qres/reservoir.hpp"

namespace qres::experiment {

using json = nlohmann::json;

struct ModelConfig {
    dynamics::ModelSpec spec = dynamics::ModelSpec::lorenz63();
    std::size_t steps = 2222;
    std::size_t transient = 1000;
    bool perturb_initial = true;  // seeded perturbation of the initial state
};

enum class Metric {
    TrainMse,       // "train_mse"
    TrainMseAtK,    // "train_mse@k": one row per entry of `states`
    SnrDb,          // "snr_db"
    ActiveDim,      // "active_dim"
    ReservoirMse,   // "reservoir_mse": mean squared distance to the exact matrix
    KeMse,          // "ke_mse": kinetic energy of the fitted outputs (MFE only)
};

std::string metric_name(Metric m);
Metric parse_metric(const std::string& name);

struct ExperimentConfig {
    std::string name = "experiment";
    ModelConfig model;
    std::vector<reservoir::Architecture> architectures{reservoir::Architecture::RfQrc};
    qsim::AnsatzConfig ansatz;  // n_inputs follows the model dimension
    reservoir::EsnConfig esn;
    std::vector<std::optional<std::uint64_t>> shots_grid{std::nullopt};
    double leak_rate = 0.1;
    double beta = 1e-6;
    bool bias = true;
    Index washout = 100;
    bool include_noisy = true;
    std::vector<denoise::DenoiseMethod> denoisers;
    std::vector<Metric> metrics{Metric::TrainMse};
    std::vector<Index> states;
    double active_energy = 0.99;
    std::size_t chunks = 1;
    std::size_t workers = 1;
    std::vector<std::uint64_t> seeds;
    std::string output;  // empty: environment or ./results/<name>
};

// Throws ConfigError naming the offending field (e.g. "shots[2]").
ExperimentConfig parse_config(const json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
json to_json(const ExperimentConfig& cfg);

// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

// Built-in configs.
struct PresetInfo {
    std::string name;
    std::string description;
};
std::vector<PresetInfo> preset_list();
json preset(const std::string& name);  // throws ConfigError for unknown names

// One ResultRecord per (cell, arm, metric[, state count]).
struct ResultRecord {
    std::string arch;
    unsigned qubits = 0;
    std::string shots;  // "exact" or the count
    double eps = 0.0;
    double beta = 0.0;
    std::string denoiser;  // "none" for the noisy arm
    std::string metric;
    double value = 0.0;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;
};

struct KeSample {
    std::string arch;
    std::string shots;
    std::string denoiser;
    std::uint64_t seed = 0;
    Index step = 0;
    double ke_true = 0.0;
    double ke_pred = 0.0;
};

struct Cell {
    reservoir::Architecture arch;
    std::optional<std::uint64_t> shots;
    std::uint64_t seed = 0;
};

// Cells in output order: architecture, then shots, then seed.
std::vector<Cell> enumerate_cells(const ExperimentConfig& cfg);

struct CellOutput {
    std::vector<ResultRecord> records;
    std::vector<KeSample> ke;
};

CellOutput run_cell(const ExperimentConfig& cfg, const Cell& cell);

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg);

struct RunSummary {
    std::filesystem::path output_dir;
    std::size_t cells = 0;
    std::size_t failed = 0;
    int exit_code() const noexcept { return failed == 0 ? 0 : 2; }
};

// Writes results.csv (flushed per cell, in cell order), errors.csv when cells
// fail, ke_series.csv for the ke_mse metric, and manifest.json.
RunSummary run_experiment(const ExperimentConfig& cfg);

inline const char* const kResultsHeader =
    "arch,qubits,shots,eps,beta,denoiser,metric,value,seed,wall_time_s";

std::string format_record(const ResultRecord& r);

enum class Figure { ShotSweep, SnrBars, MseVsStates, KeReconstruction };

Figure parse_figure(const std::string& tag);  // throws InvalidInput
std::string figure_tag(Figure f);

// Aggregates results (mean, population std, count over seeds) into
// plot_<tag>.csv next to the input, or in out_dir when given. The
// ke-reconstruction figure reads ke_series.csv from the same directory.
std::filesystem::path emit_plotdata(const std::filesystem::path& results_csv, Figure figure,
                                    const std::filesystem::path& out_dir = {});

std::string version();

}  // namespace qres::experiment
