#pragma once

// Reservoir activation matrices for three architectures: the classical leaky
// echo state network, recurrent QRC and recurrence-free QRC (RF-QRC).
// Column t of a ReservoirMatrix is the reservoir state after consuming input
// row t.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/SparseCore>

#include "qres/dynamics.hpp"
#include "qres/qsim.hpp"
#include "qres/sampling.hpp"
#include "qres/types.hpp"

namespace qres::reservoir {

using dynamics::TimeSeries;

enum class Architecture { Esn, Qrc, RfQrc };

std::string_view architecture_name(Architecture arch) noexcept;  // "esn", "qrc", "rfqrc"
Architecture parse_architecture(std::string_view name);

struct ReservoirMetadata {
    Architecture architecture = Architecture::RfQrc;
    double leak_rate = 1.0;
    std::optional<std::uint64_t> shots;  // nullopt = exact
    std::uint64_t seed = 0;
};

// Immutable once built. `values` holds leak-integrated states; `raw` the
// per-step activations before integration (measured probabilities for the
// quantum architectures, tanh activations for the ESN). Imported matrices
// carry no raw block.
class ReservoirMatrix {
public:
    ReservoirMatrix(Matrix values, Matrix raw, ReservoirMetadata meta);

    const Matrix& values() const noexcept { return values_; }
    const Matrix& raw() const noexcept { return raw_; }
    const ReservoirMetadata& meta() const noexcept { return meta_; }
    Index neurons() const noexcept { return values_.rows(); }
    Index steps() const noexcept { return values_.cols(); }

    // Same metadata and raw block, new values (e.g. after denoising).
    ReservoirMatrix with_values(Matrix values) const;
    // Columns [first, first + count) of both blocks.
    ReservoirMatrix columns(Index first, Index count) const;

private:
    Matrix values_;
    Matrix raw_;
    ReservoirMetadata meta_;
};

// (1 - eps) * r_prev + eps * r_hat
Vector leak_update(const Vector& r_prev, const Vector& r_hat, double eps);

void validate_leak_rate(double eps);

struct EsnConfig {
    Index n_reservoir = 100;
    double input_scale = 1.0;
    double spectral_radius = 0.99;
    Index connectivity_degree = 3;
    std::uint64_t seed = 0;

    void validate() const;
};

struct EsnWeights {
    Matrix w_in;                                          // N_r x N_u
    Eigen::SparseMatrix<double, Eigen::RowMajor> w;       // N_r x N_r
};

// W_in ~ Uniform(-input_scale, input_scale); W has connectivity_degree
// nonzeros per row, rescaled to the requested spectral radius. Throws
// ConfigError when W has zero spectral radius.
EsnWeights make_esn_weights(const EsnConfig& cfg, Index n_inputs);

ReservoirMatrix esn_generate(const TimeSeries& series, const EsnWeights& weights, double eps,
                             std::uint64_t seed = 0);
ReservoirMatrix esn_generate(const TimeSeries& series, const EsnConfig& cfg, double eps);

struct QuantumReservoirSpec {
    qsim::AnsatzConfig ansatz;
    qsim::RandomUnitaryParams params;
    sampling::ShotConfig shots;
    double leak_rate = 0.1;
};

// Raw columns are evaluated in `chunks` contiguous index ranges on up to
// `workers` threads (0 = hardware concurrency); leak integration runs
// afterwards in time order with r(0) = first measured column. The result is
// bitwise independent of chunks and workers.
ReservoirMatrix rf_qrc_generate(const TimeSeries& series, const QuantumReservoirSpec& spec,
                                std::size_t chunks = 1, std::size_t workers = 1);

// Strictly sequential: each sampled state is re-encoded into the next
// circuit. r(0) is the uniform vector.
ReservoirMatrix qrc_generate(const TimeSeries& series, const QuantumReservoirSpec& spec,
                             qsim::RecurrentBlock block = qsim::RecurrentBlock::Encoded);

// Step-by-step driver shared by generation and forecasting. Step t uses the
// same shot seed as column t of the corresponding generate call.
class ReservoirStepper {
public:
    virtual ~ReservoirStepper() = default;
    virtual Index neurons() const = 0;
    virtual void reset() = 0;
    // Consumes one input row and returns the leak-integrated state.
    virtual const Vector& step(const Vector& u) = 0;
    // Activation of the last step before leak integration.
    virtual const Vector& last_raw() const = 0;
    // Quantum encoders only accept inputs in [0, 1].
    virtual bool requires_unit_interval() const { return false; }
};

std::unique_ptr<ReservoirStepper> make_esn_stepper(EsnWeights weights, double eps);
std::unique_ptr<ReservoirStepper> make_rf_qrc_stepper(QuantumReservoirSpec spec);
std::unique_ptr<ReservoirStepper> make_qrc_stepper(
    QuantumReservoirSpec spec, qsim::RecurrentBlock block = qsim::RecurrentBlock::Encoded);

// Leak-integrated values as neurons x timesteps, preceded by `# key=value`
// metadata lines (architecture, leak_rate, shots, seed).
void write_csv(std::ostream& out, const ReservoirMatrix& r);
void write_csv(const std::string& path, const ReservoirMatrix& r);
ReservoirMatrix read_csv(std::istream& in);
ReservoirMatrix read_csv(const std::string& path);

}  // namespace qres::reservoir
