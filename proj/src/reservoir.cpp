#include "qres/reservoir.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qres/csv.hpp"
#include "qres/error.hpp"
#include "qres/rng.hpp"
#include "qres/simd/kernels.hpp"

namespace qres::reservoir {

namespace {

Vector row_of(const TimeSeries& series, Index t) { return series.data.row(t).transpose(); }

std::span<const double> as_span(const Vector& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

// Rethrows the in-flight exception with the failing timestep in its message,
// keeping the exception type.
[[noreturn]] void rethrow_at_step(Index t) {
    const std::string where = "timestep " + std::to_string(t) + ": ";
    try {
        throw;
    } catch (const RangeError& e) {
        throw RangeError(where + e.what());
    } catch (const InvalidInput& e) {
        throw InvalidInput(where + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(where + e.what());
    } catch (const Error& e) {
        throw Error(where + e.what());
    }
}

void check_series(const TimeSeries& series) {
    if (series.steps() < 1) throw InvalidInput("reservoir: input series is empty");
    if (!series.data.allFinite()) throw InvalidInput("reservoir: input series is not finite");
}

void check_quantum_spec(const TimeSeries& series, const QuantumReservoirSpec& spec) {
    check_series(series);
    spec.ansatz.validate();
    spec.shots.validate();
    validate_leak_rate(spec.leak_rate);
    if (series.components() != static_cast<Index>(spec.ansatz.n_inputs)) {
        throw InvalidInput("reservoir: series has " + std::to_string(series.components()) +
                           " components, ansatz expects " +
                           std::to_string(spec.ansatz.n_inputs));
    }
}

ReservoirMetadata quantum_meta(Architecture arch, const QuantumReservoirSpec& spec) {
    return {arch, spec.leak_rate, spec.shots.shots, spec.shots.seed};
}

Vector measure(const Vector& probs, const sampling::ShotConfig& shots, Index t) {
    return sampling::sample_probs(probs, shots.at_step(static_cast<std::uint64_t>(t)));
}

}  // namespace

std::string_view architecture_name(Architecture arch) noexcept {
    switch (arch) {
        case Architecture::Esn: return "esn";
        case Architecture::Qrc: return "qrc";
        case Architecture::RfQrc: return "rfqrc";
    }
    return "unknown";
}

Architecture parse_architecture(std::string_view name) {
    if (name == "esn") return Architecture::Esn;
    if (name == "qrc") return Architecture::Qrc;
    if (name == "rfqrc") return Architecture::RfQrc;
    throw InvalidInput("unknown architecture '" + std::string(name) + "' (esn, qrc, rfqrc)");
}

void validate_leak_rate(double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) {
        throw InvalidInput("leak rate must lie in (0, 1], got " + std::to_string(eps));
    }
}

ReservoirMatrix::ReservoirMatrix(Matrix values, Matrix raw, ReservoirMetadata meta)
    : values_(std::move(values)), raw_(std::move(raw)), meta_(meta) {
    validate_leak_rate(meta_.leak_rate);
    if (raw_.size() != 0 && (raw_.rows() != values_.rows() || raw_.cols() != values_.cols())) {
        throw InvalidInput("reservoir: raw and integrated blocks differ in shape");
    }
}

ReservoirMatrix ReservoirMatrix::with_values(Matrix values) const {
    if (values.rows() != values_.rows() || values.cols() != values_.cols()) {
        throw InvalidInput("reservoir: replacement values change the shape");
    }
    return ReservoirMatrix(std::move(values), raw_, meta_);
}

ReservoirMatrix ReservoirMatrix::columns(Index first, Index count) const {
    if (first < 0 || count < 0 || first + count > steps()) {
        throw InvalidInput("reservoir: column range out of bounds");
    }
    Matrix raw = raw_.size() ? Matrix(raw_.middleCols(first, count)) : Matrix();
    return ReservoirMatrix(values_.middleCols(first, count), std::move(raw), meta_);
}

Vector leak_update(const Vector& r_prev, const Vector& r_hat, double eps) {
    if (r_prev.size() != r_hat.size()) {
        throw InvalidInput("leak_update: length mismatch (" + std::to_string(r_prev.size()) +
                           " vs " + std::to_string(r_hat.size()) + ")");
    }
    validate_leak_rate(eps);
    Vector out(r_prev.size());
    simd::kernels().blend(r_prev.data(), r_hat.data(), eps, out.data(),
                          static_cast<std::size_t>(out.size()));
    return out;
}

void EsnConfig::validate() const {
    if (n_reservoir < 1) throw ConfigError("esn.neurons", "must be >= 1");
    if (!(spectral_radius > 0.0 && spectral_radius < 1.0)) {
        throw ConfigError("esn.spectral_radius", "must lie in (0, 1)");
    }
    if (!(input_scale > 0.0)) throw ConfigError("esn.input_scale", "must be > 0");
    if (connectivity_degree < 1) throw ConfigError("esn.degree", "must be >= 1");
}

EsnWeights make_esn_weights(const EsnConfig& cfg, Index n_inputs) {
    cfg.validate();
    if (n_inputs < 1) throw InvalidInput("esn: n_inputs must be >= 1");
    auto engine = rng::make_engine(rng::derive_seed(cfg.seed, rng::Stream::EsnWeights));
    const Index n = cfg.n_reservoir;

    EsnWeights weights;
    weights.w_in.resize(n, n_inputs);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n_inputs; ++j)
            weights.w_in(i, j) = rng::uniform(engine, -cfg.input_scale, cfg.input_scale);

    const Index degree = std::min(cfg.connectivity_degree, n);
    std::vector<Eigen::Triplet<double>> triplets;
    std::vector<Index> cols(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        std::iota(cols.begin(), cols.end(), Index{0});
        // Partial Fisher-Yates: the first `degree` entries are a uniform subset.
        for (Index k = 0; k < degree; ++k) {
            const auto span = static_cast<std::uint64_t>(n - k);
            const auto pick = k + static_cast<Index>(engine() % span);
            std::swap(cols[static_cast<std::size_t>(k)], cols[static_cast<std::size_t>(pick)]);
            triplets.emplace_back(i, cols[static_cast<std::size_t>(k)],
                                  rng::uniform(engine, -1.0, 1.0));
        }
    }
    weights.w.resize(n, n);
    weights.w.setFromTriplets(triplets.begin(), triplets.end());

    const Matrix dense(weights.w);
    const Eigen::EigenSolver<Matrix> solver(dense, false);
    if (solver.info() != Eigen::Success) {
        throw ConfigError("esn", "eigenvalue computation for spectral-radius rescaling failed");
    }
    const double radius = solver.eigenvalues().cwiseAbs().maxCoeff();
    if (!(radius > 1e-12)) {
        throw ConfigError("esn", "reservoir matrix has zero spectral radius; cannot rescale");
    }
    weights.w *= cfg.spectral_radius / radius;
    return weights;
}

namespace {

class EsnStepper final : public ReservoirStepper {
public:
    EsnStepper(EsnWeights weights, double eps) : weights_(std::move(weights)), eps_(eps) {
        validate_leak_rate(eps);
        if (weights_.w.rows() != weights_.w_in.rows() || weights_.w.cols() != weights_.w.rows()) {
            throw InvalidInput("esn: weight shapes are inconsistent");
        }
        reset();
    }

    Index neurons() const override { return weights_.w_in.rows(); }

    void reset() override {
        state_ = Vector::Zero(neurons());
        raw_ = Vector::Zero(neurons());
    }

    const Vector& step(const Vector& u) override {
        if (u.size() != weights_.w_in.cols()) throw InvalidInput("esn: input dimension mismatch");
        raw_ = (weights_.w_in * u + weights_.w * state_).array().tanh().matrix();
        state_ = leak_update(state_, raw_, eps_);
        return state_;
    }

    const Vector& last_raw() const override { return raw_; }

private:
    EsnWeights weights_;
    double eps_;
    Vector state_;
    Vector raw_;
};

class RfQrcStepper final : public ReservoirStepper {
public:
    explicit RfQrcStepper(QuantumReservoirSpec spec) : spec_(std::move(spec)) {
        spec_.ansatz.validate();
        validate_leak_rate(spec_.leak_rate);
        reset();
    }

    Index neurons() const override { return static_cast<Index>(spec_.ansatz.dimension()); }

    void reset() override {
        t_ = 0;
        state_ = Vector::Zero(neurons());
        raw_ = Vector::Zero(neurons());
    }

    const Vector& step(const Vector& u) override {
        try {
            raw_ = measure(qsim::run_rf_circuit(as_span(u), spec_.params, spec_.ansatz),
                           spec_.shots, t_);
        } catch (const Error&) {
            rethrow_at_step(t_);
        }
        state_ = t_ == 0 ? raw_ : leak_update(state_, raw_, spec_.leak_rate);
        ++t_;
        return state_;
    }

    const Vector& last_raw() const override { return raw_; }
    bool requires_unit_interval() const override { return true; }

private:
    QuantumReservoirSpec spec_;
    Index t_ = 0;
    Vector state_;
    Vector raw_;
};

class QrcStepper final : public ReservoirStepper {
public:
    QrcStepper(QuantumReservoirSpec spec, qsim::RecurrentBlock block)
        : spec_(std::move(spec)), block_(block) {
        spec_.ansatz.validate();
        validate_leak_rate(spec_.leak_rate);
        reset();
    }

    Index neurons() const override { return static_cast<Index>(spec_.ansatz.dimension()); }

    void reset() override {
        t_ = 0;
        state_ = Vector::Constant(neurons(), 1.0 / static_cast<double>(neurons()));
        raw_ = Vector::Zero(neurons());
    }

    const Vector& step(const Vector& u) override {
        try {
            raw_ = measure(qsim::run_qrc_circuit(as_span(u), as_span(state_), spec_.params,
                                                 spec_.ansatz, block_),
                           spec_.shots, t_);
        } catch (const Error&) {
            rethrow_at_step(t_);
        }
        state_ = leak_update(state_, raw_, spec_.leak_rate);
        ++t_;
        return state_;
    }

    const Vector& last_raw() const override { return raw_; }
    bool requires_unit_interval() const override { return true; }

private:
    QuantumReservoirSpec spec_;
    qsim::RecurrentBlock block_;
    Index t_ = 0;
    Vector state_;
    Vector raw_;
};

ReservoirMatrix drive(const TimeSeries& series, ReservoirStepper& stepper,
                      const ReservoirMetadata& meta) {
    const Index n = stepper.neurons();
    Matrix values(n, series.steps());
    Matrix raw(n, series.steps());
    stepper.reset();
    for (Index t = 0; t < series.steps(); ++t) {
        values.col(t) = stepper.step(row_of(series, t));
        raw.col(t) = stepper.last_raw();
    }
    return ReservoirMatrix(std::move(values), std::move(raw), meta);
}

}  // namespace

std::unique_ptr<ReservoirStepper> make_esn_stepper(EsnWeights weights, double eps) {
    return std::make_unique<EsnStepper>(std::move(weights), eps);
}

std::unique_ptr<ReservoirStepper> make_rf_qrc_stepper(QuantumReservoirSpec spec) {
    return std::make_unique<RfQrcStepper>(std::move(spec));
}

std::unique_ptr<ReservoirStepper> make_qrc_stepper(QuantumReservoirSpec spec,
                                                   qsim::RecurrentBlock block) {
    return std::make_unique<QrcStepper>(std::move(spec), block);
}

ReservoirMatrix esn_generate(const TimeSeries& series, const EsnWeights& weights, double eps,
                             std::uint64_t seed) {
    check_series(series);
    EsnStepper stepper(weights, eps);
    return drive(series, stepper, {Architecture::Esn, eps, std::nullopt, seed});
}

ReservoirMatrix esn_generate(const TimeSeries& series, const EsnConfig& cfg, double eps) {
    check_series(series);
    return esn_generate(series, make_esn_weights(cfg, series.components()), eps, cfg.seed);
}

ReservoirMatrix rf_qrc_generate(const TimeSeries& series, const QuantumReservoirSpec& spec,
                                std::size_t chunks, std::size_t workers) {
    check_quantum_spec(series, spec);
    if (chunks < 1) throw InvalidInput("rf_qrc_generate: chunks must be >= 1");
    const Index steps = series.steps();
    const Index dim = static_cast<Index>(spec.ansatz.dimension());
    chunks = std::min<std::size_t>(chunks, static_cast<std::size_t>(steps));
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, chunks);

    Matrix raw(dim, steps);
    std::vector<std::exception_ptr> failures(chunks);
    std::atomic<std::size_t> next{0};

    // Each chunk owns a disjoint column range of `raw`.
    auto run_chunks = [&] {
        for (std::size_t c = next++; c < chunks; c = next++) {
            const Index lo = static_cast<Index>(c) * steps / static_cast<Index>(chunks);
            const Index hi = static_cast<Index>(c + 1) * steps / static_cast<Index>(chunks);
            try {
                for (Index t = lo; t < hi; ++t) {
                    try {
                        const Vector u = row_of(series, t);
                        raw.col(t) = measure(qsim::run_rf_circuit(as_span(u), spec.params,
                                                                  spec.ansatz),
                                             spec.shots, t);
                    } catch (const Error&) {
                        rethrow_at_step(t);
                    }
                }
            } catch (...) {
                failures[c] = std::current_exception();
            }
        }
    };

    if (workers == 1) {
        run_chunks();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run_chunks);
    }
    for (const auto& failure : failures) {
        if (failure) std::rethrow_exception(failure);
    }

    Matrix values(dim, steps);
    values.col(0) = raw.col(0);
    for (Index t = 1; t < steps; ++t) {
        simd::kernels().blend(values.col(t - 1).data(), raw.col(t).data(), spec.leak_rate,
                              values.col(t).data(), static_cast<std::size_t>(dim));
    }
    return ReservoirMatrix(std::move(values), std::move(raw),
                           quantum_meta(Architecture::RfQrc, spec));
}

ReservoirMatrix qrc_generate(const TimeSeries& series, const QuantumReservoirSpec& spec,
                             qsim::RecurrentBlock block) {
    check_quantum_spec(series, spec);
    QrcStepper stepper(spec, block);
    return drive(series, stepper, quantum_meta(Architecture::Qrc, spec));
}

void write_csv(std::ostream& out, const ReservoirMatrix& r) {
    const auto& meta = r.meta();
    out << "# qres-reservoir v1\n";
    out << "# architecture=" << architecture_name(meta.architecture) << '\n';
    out << "# leak_rate=" << csv::format_double(meta.leak_rate) << '\n';
    out << "# shots=" << (meta.shots ? std::to_string(*meta.shots) : std::string("exact")) << '\n';
    out << "# seed=" << meta.seed << '\n';
    out << "# neurons=" << r.neurons() << '\n';
    out << "# timesteps=" << r.steps() << '\n';
    for (Index i = 0; i < r.neurons(); ++i) {
        for (Index t = 0; t < r.steps(); ++t) {
            if (t) out << ',';
            out << csv::format_double(r.values()(i, t));
        }
        out << '\n';
    }
}

void write_csv(const std::string& path, const ReservoirMatrix& r) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
    write_csv(out, r);
}

ReservoirMatrix read_csv(std::istream& in) {
    ReservoirMetadata meta;
    Index neurons = -1, timesteps = -1;
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(1, eq - 1);
            key.erase(0, key.find_first_not_of(' '));
            const std::string value = line.substr(eq + 1);
            if (key == "architecture") meta.architecture = parse_architecture(value);
            else if (key == "leak_rate") meta.leak_rate = csv::parse_double(value);
            else if (key == "shots") meta.shots = value == "exact" ? std::nullopt
                                                                   : std::optional<std::uint64_t>(std::stoull(value));
            else if (key == "seed") meta.seed = std::stoull(value);
            else if (key == "neurons") neurons = std::stoll(value);
            else if (key == "timesteps") timesteps = std::stoll(value);
            continue;
        }
        std::vector<double> row;
        for (const auto& field : csv::split(line)) row.push_back(csv::parse_double(field));
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw InvalidInput("reservoir CSV row " + std::to_string(rows.size()) +
                               " has a different length");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InvalidInput("reservoir CSV has no data rows");
    const auto n = static_cast<Index>(rows.size());
    const auto m = static_cast<Index>(rows.front().size());
    if ((neurons >= 0 && neurons != n) || (timesteps >= 0 && timesteps != m)) {
        throw InvalidInput("reservoir CSV shape disagrees with its header");
    }
    Matrix values(n, m);
    for (Index i = 0; i < n; ++i)
        for (Index t = 0; t < m; ++t) values(i, t) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)];
    return ReservoirMatrix(std::move(values), Matrix(), meta);
}

ReservoirMatrix read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path + "' for reading");
    return read_csv(in);
}

}  // namespace qres::reservoir
