#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>
#include <variant>

#include "qres/csv.hpp"
#include "qres/error.hpp"
#include "qres/experiment.hpp"
#include "qres/rng.hpp"
#include "qres/train.hpp"

namespace qres::experiment {

namespace {

using reservoir::Architecture;

struct CellData {
    dynamics::TimeSeries raw;
    dynamics::TimeSeries series;  // normalized
    dynamics::NormalizationParams norm;
};

CellData make_data(const ExperimentConfig& cfg, std::uint64_t seed) {
    const auto& m = cfg.model;
    std::optional<std::uint64_t> perturb;
    if (m.perturb_initial) perturb = seed;
    CellData d;
    d.raw = dynamics::rk4_integrate(m.spec, dynamics::default_initial_state(m.spec), m.steps, m.transient, perturb);
    std::tie(d.series, d.norm) = dynamics::normalize(d.raw);
    return d;
}

reservoir::QuantumReservoirSpec quantum_spec(const ExperimentConfig& cfg, const Cell& cell,
                                             bool exact) {
    reservoir::QuantumReservoirSpec spec;
    spec.ansatz = cfg.ansatz;
    spec.params = qsim::sample_random_unitary_params(cfg.ansatz.n_qubits, cell.seed);
    if (!exact && cell.shots) {
        spec.shots = sampling::ShotConfig::finite(*cell.shots, rng::derive_seed(cell.seed, rng::Stream::Shots, *cell.shots));
    }
    spec.leak_rate = cfg.leak_rate;
    return spec;
}

Matrix generate(const ExperimentConfig& cfg, const Cell& cell, const dynamics::TimeSeries& series, bool exact) {
    switch (cell.arch) {
        case Architecture::Esn: {
            reservoir::EsnConfig esn = cfg.esn;
            esn.seed = cell.seed;
            return reservoir::esn_generate(series, esn, cfg.leak_rate).values();
        }
        case Architecture::RfQrc:
            return reservoir::rf_qrc_generate(series, quantum_spec(cfg, cell, exact), cfg.chunks, cfg.chunks)
                .values();
        case Architecture::Qrc:
            return reservoir::qrc_generate(series, quantum_spec(cfg, cell, exact)).values();
    }
    throw InvalidInput("unknown architecture");
}

// Evenly spaced row indices over [0, n - 1].
std::vector<Index> stride_rows(Index n, Index k) {
    if (k > n) {
        throw InvalidInput("state count " + std::to_string(k) + " exceeds the " + std::to_string(n) +
                           " reservoir neurons");
    }
    std::vector<Index> rows(static_cast<std::size_t>(k));
    for (Index i = 0; i < k; ++i) rows[static_cast<std::size_t>(i)] = k == 1 ? 0 : i * (n - 1) / (k - 1);
    return rows;
}

Matrix select_rows(const Matrix& m, const std::vector<Index>& rows) {
    Matrix out(static_cast<Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
    return out;
}

struct Arm {
    std::string label;
    const denoise::DenoiseMethod* method = nullptr;  // null for the noisy arm
    Matrix values;
};

}  // namespace

std::vector<Cell> enumerate_cells(const ExperimentConfig& cfg) {
    std::vector<Cell> cells;
    for (Architecture arch : cfg.architectures) {
        if (arch == Architecture::Esn) {
            // Classical reservoirs have no measurement step.
            for (std::uint64_t seed : cfg.seeds) cells.push_back({arch, std::nullopt, seed});
            continue;
        }
        for (const auto& shots : cfg.shots_grid) {
            for (std::uint64_t seed : cfg.seeds) cells.push_back({arch, shots, seed});
        }
    }
    return cells;
}

CellOutput run_cell(const ExperimentConfig& cfg, const Cell& cell) {
    const auto start = std::chrono::steady_clock::now();
    const CellData data = make_data(cfg, cell.seed);
    const Matrix noisy = generate(cfg, cell, data.series, false);

    bool needs_reference = false;
    for (Metric m : cfg.metrics) needs_reference |= m == Metric::SnrDb || m == Metric::ReservoirMse;
    Matrix reference;
    if (needs_reference) {
        if (cell.arch == Architecture::Esn) {
            throw InvalidInput("snr_db and reservoir_mse need a quantum architecture");
        }
        reference = cell.shots ? generate(cfg, cell, data.series, true) : noisy;
    }

    std::vector<Arm> arms;
    if (cfg.include_noisy) arms.push_back({"none", nullptr, noisy});
    for (const auto& d : cfg.denoisers) arms.push_back({denoise::label(d), &d, denoise::denoise_matrix(noisy, d)});

    const Index w = cfg.washout;
    const Index n_cols = noisy.cols() - w;
    CellOutput out;
    const std::string arch(reservoir::architecture_name(cell.arch));
    const unsigned qubits = cell.arch == Architecture::Esn ? 0 : cfg.ansatz.n_qubits;
    const std::string shots = cell.shots ? std::to_string(*cell.shots) : "exact";
    auto emit = [&](const std::string& denoiser, const std::string& metric, double value) {
        out.records.push_back({arch, qubits, shots, cfg.leak_rate, cfg.beta, denoiser, metric, value, cell.seed, 0.0});
    };
    auto fit_mse = [&](const Matrix& values) {
        const auto ts = train::one_step_ahead(values, data.series, w);
        return train::training_mse(train::ridge_fit(ts.r, ts.y, cfg.beta, cfg.bias), ts.r, ts.y);
    };

    for (const Arm& arm : arms) {
        for (Metric metric : cfg.metrics) {
            switch (metric) {
                case Metric::TrainMse:
                    emit(arm.label, "train_mse", fit_mse(arm.values));
                    break;
                case Metric::TrainMseAtK:
                    for (Index k : cfg.states) {
                        const auto* svd = arm.method ? std::get_if<denoise::SvdMethod>(arm.method) : nullptr;
                        const std::string name = "train_mse@" + std::to_string(k);
                        if (svd && std::holds_alternative<denoise::FixedRank>(svd->spec)) {
                            // Matched comparison: rank-k reconstruction of the full matrix.
                            const denoise::SvdSpec spec = denoise::FixedRank{k};
                            emit(denoise::label(denoise::SvdMethod{spec}), name,
                                 fit_mse(denoise::svd_truncate(noisy, spec).reconstruction));
                        } else {
                            emit(arm.label, name, fit_mse(select_rows(arm.values, stride_rows(arm.values.rows(), k))));
                        }
                    }
                    break;
                case Metric::SnrDb:
                    emit(arm.label, "snr_db",
                         train::snr_db(arm.values.rightCols(n_cols), reference.rightCols(n_cols)));
                    break;
                case Metric::ReservoirMse:
                    emit(arm.label, "reservoir_mse",
                         (arm.values.rightCols(n_cols) - reference.rightCols(n_cols)).squaredNorm() /
                             static_cast<double>(n_cols * noisy.rows()));
                    break;
                case Metric::ActiveDim:
                    emit(arm.label, "active_dim",
                         static_cast<double>(train::active_dimension(arm.values.rightCols(n_cols), cfg.active_energy)));
                    break;
                case Metric::KeMse: {
                    const auto ts = train::one_step_ahead(arm.values, data.series, w);
                    const auto weights = train::ridge_fit(ts.r, ts.y, cfg.beta, cfg.bias);
                    dynamics::TimeSeries fitted = data.series.slice(w + 1, ts.y.rows());
                    fitted.data = train::readout(weights, ts.r);
                    const Vector ke_pred = train::kinetic_energy(data.norm.invert(fitted));
                    const Vector ke_true = train::kinetic_energy(data.raw.slice(w + 1, ts.y.rows()));
                    emit(arm.label, "ke_mse", (ke_pred - ke_true).squaredNorm() / static_cast<double>(ke_true.size()));
                    for (Index i = 0; i < ke_true.size(); ++i) {
                        out.ke.push_back({arch, shots, arm.label, cell.seed, w + 1 + i, ke_true[i], ke_pred[i]});
                    }
                    break;
                }
            }
        }
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto& r : out.records) r.wall_time_s = elapsed;
    return out;
}

std::string format_record(const ResultRecord& r) {
    return csv::join({r.arch, std::to_string(r.qubits), r.shots, csv::format_double(r.eps),
                      csv::format_double(r.beta), r.denoiser, r.metric, csv::format_double(r.value),
                      std::to_string(r.seed), csv::format_double(r.wall_time_s)});
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg) {
    if (!cfg.output.empty()) return cfg.output;
    if (const char* env = std::getenv("QRES_OUTPUT_DIR"); env && *env) {
        return std::filesystem::path(env) / cfg.name;
    }
    return std::filesystem::path("results") / cfg.name;
}

RunSummary run_experiment(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    RunSummary summary;
    summary.output_dir = resolve_output_dir(cfg);
    fs::create_directories(summary.output_dir);
    const fs::path results_path = summary.output_dir / "results.csv";
    const fs::path errors_path = summary.output_dir / "errors.csv";
    const fs::path ke_path = summary.output_dir / "ke_series.csv";
    fs::remove(errors_path);
    fs::remove(ke_path);

    std::ofstream results(results_path);
    if (!results) throw Error("cannot write " + results_path.string());
    results << kResultsHeader << '\n';
    results.flush();
    std::ofstream errors;
    std::ofstream ke;
    bool wants_ke = false;
    for (Metric m : cfg.metrics) wants_ke |= m == Metric::KeMse;
    if (wants_ke) {
        ke.open(ke_path);
        ke << "arch,shots,denoiser,seed,step,ke_true,ke_pred\n";
    }

    const std::vector<Cell> cells = enumerate_cells(cfg);
    summary.cells = cells.size();
    using Outcome = std::variant<std::monostate, CellOutput, std::string>;
    std::vector<Outcome> outcomes(cells.size());
    std::size_t next_flush = 0;
    std::mutex lock;
    std::atomic<std::size_t> next{0};

    auto write_ready = [&] {
        // Caller holds the lock; writes the completed prefix in cell order.
        while (next_flush < cells.size() && !std::holds_alternative<std::monostate>(outcomes[next_flush])) {
            const Cell& c = cells[next_flush];
            if (const auto* ok = std::get_if<CellOutput>(&outcomes[next_flush])) {
                for (const auto& r : ok->records) results << format_record(r) << '\n';
                for (const auto& s : ok->ke) {
                    ke << csv::join({s.arch, s.shots, s.denoiser, std::to_string(s.seed), std::to_string(s.step),
                                     csv::format_double(s.ke_true), csv::format_double(s.ke_pred)})
                       << '\n';
                }
                results.flush();
            } else {
                if (!errors.is_open()) {
                    errors.open(errors_path);
                    errors << "arch,shots,seed,error\n";
                }
                std::string msg = std::get<std::string>(outcomes[next_flush]);
                for (char& ch : msg) {
                    if (ch == ',' || ch == '\n') ch = ';';
                }
                errors << reservoir::architecture_name(c.arch) << ',' << (c.shots ? std::to_string(*c.shots) : "exact")
                       << ',' << c.seed << ',' << msg << '\n';
                errors.flush();
                ++summary.failed;
            }
            outcomes[next_flush] = CellOutput{};  // release memory
            ++next_flush;
        }
    };

    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
            Outcome result;
            try {
                result = run_cell(cfg, cells[i]);
            } catch (const std::exception& e) {
                result = std::string(e.what());
            }
            std::lock_guard<std::mutex> guard(lock);
            outcomes[i] = std::move(result);
            write_ready();
        }
    };

    std::size_t n_workers = cfg.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.workers;
    n_workers = std::min(n_workers, std::max<std::size_t>(cells.size(), 1));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    }

    json manifest;
    manifest["name"] = cfg.name;
    manifest["config_hash"] = config_hash(cfg);
    manifest["version"] = version();
    manifest["seeds"] = cfg.seeds;
    manifest["cells"] = summary.cells;
    manifest["failed_cells"] = summary.failed;
    json files = json::array({"results.csv"});
    if (summary.failed) files.push_back("errors.csv");
    if (wants_ke) files.push_back("ke_series.csv");
    manifest["files"] = files;
    manifest["config"] = to_json(cfg);
    // Same fields as the hash: scheduling and destination do not change results.
    for (const char* key : {"output", "workers", "chunks"}) manifest["config"].erase(key);
    std::ofstream(summary.output_dir / "manifest.json") << manifest.dump(2) << '\n';
    return summary;
}

}  // namespace qres::experiment
